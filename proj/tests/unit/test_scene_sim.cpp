#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "oracles.hpp"
#include "tactile/scene_io.hpp"
#include "tactile/scene_sim.hpp"

namespace {

using namespace tactile;
using namespace tactile::sim;

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

Scene open_scene(double half = 20.0) {
  Scene s;
  s.name = "open";
  s.start = {0.0, 0.0, 0.0};
  s.goal = {100.0, 100.0, 101.0, 101.0};
  s.bounds = {-half, -half, half, half};
  return s;
}

Scene wall_ahead(double x, HeightClass cls) {
  Scene s = open_scene();
  s.walls.push_back({{x, -50.0}, {x, 50.0}, cls});
  return s;
}

double column_angle(const CameraModel& cam, int j) {
  return deg(cam.h_fov_deg * (static_cast<double>(j) / (cam.width - 1) - 0.5));
}

double row_elevation(const CameraModel& cam, int i) {
  return deg(cam.v_fov_deg * (0.5 - static_cast<double>(i) / (cam.height - 1)));
}

std::uint16_t px(const haptic::DepthFrame& f, int row, int col) {
  return f.depths[static_cast<std::size_t>(row * f.width + col)];
}

SessionLog run_scene(const Scene& scene, Controller& controller, double budget = 600.0) {
  SessionParams params;
  params.budget_s = budget;
  return run_session(scene, haptic::MappingConfig::indoor(), CameraModel{}, controller, params);
}

Scene bundled(const std::string& name) {
  return read_scene_file(gen::source_dir() / "scenes" / (name + ".json"));
}

TEST(Render, EmptySceneIsNoData) {
  const auto frame = render_depth(open_scene(), AgentState{}, CameraModel{});
  EXPECT_EQ(frame.width, 160);
  EXPECT_EQ(frame.height, 90);
  for (auto d : frame.depths) ASSERT_EQ(d, 0);
}

TEST(Render, FlatWallMatchesTrigonometry) {
  const CameraModel cam;
  const auto frame = render_depth(wall_ahead(2.0, HeightClass::Full), AgentState{}, cam);
  for (int j = 0; j < cam.width; ++j) {
    const double want = 1000.0 * oracle::distance_to_vertical_wall(0.0, column_angle(cam, j), 2.0);
    for (int i = 0; i < cam.height; ++i) ASSERT_NEAR(px(frame, i, j), want, 1.0) << i << "," << j;
  }
  EXPECT_NEAR(px(frame, 45, 0), 2000.0 / std::cos(deg(32.5)), 1.0);
  EXPECT_NEAR(px(frame, 45, 79), 2000.0, 1.0);
}

TEST(Render, HeadingRotatesTheView) {
  // Same wall seen after turning a quarter to the right: it now lies at +y.
  Scene s = open_scene();
  s.walls.push_back({{-50.0, 3.0}, {50.0, 3.0}, HeightClass::Full});
  const auto frame = render_depth(s, AgentState{0.0, 0.0, kPi / 2, false}, CameraModel{});
  EXPECT_NEAR(px(frame, 45, 79), 3000.0, 1.0);
  // Image column 0 looks left of the heading, i.e. toward +x here.
  const auto left = render_depth(wall_ahead(2.0, HeightClass::Full),
                                 AgentState{0.0, 0.0, deg(60.0), false}, CameraModel{});
  EXPECT_GT(px(left, 45, 0), 0);
  EXPECT_EQ(px(left, 45, 159), 0);
}

void expect_band(HeightClass cls, double z_min, double z_max) {
  const CameraModel cam;
  const auto frame = render_depth(wall_ahead(2.0, cls), AgentState{}, cam);
  int lit = 0;
  for (int j = 0; j < cam.width; j += 7) {
    const double d = 2.0 / std::cos(column_angle(cam, j));
    for (int i = 0; i < cam.height; ++i) {
      const double z = cam.mount_height_m + d * std::tan(row_elevation(cam, i));
      const bool inside = z >= z_min && z <= z_max;
      // Skip rows that graze the band edge; rounding decides them.
      if (std::abs(z - z_min) < 1e-6 || std::abs(z - z_max) < 1e-6) continue;
      ASSERT_EQ(px(frame, i, j) != 0, inside) << "row " << i << " col " << j << " z " << z;
      lit += inside ? 1 : 0;
    }
  }
  EXPECT_GT(lit, 0);
}

TEST(Render, WaistHeightObstacleOnlyInLowerRows) {
  expect_band(HeightClass::Waist, 0.0, 1.0);
  const auto frame = render_depth(wall_ahead(2.0, HeightClass::Waist), AgentState{}, CameraModel{});
  EXPECT_EQ(px(frame, 0, 80), 0);
  EXPECT_GT(px(frame, 89, 80), 0);
}

TEST(Render, OverheadObstacleOnlyInUpperBand) { expect_band(HeightClass::Overhead, 1.4, 2.2); }

TEST(Render, NearerWallOccludesFarther) {
  Scene s = wall_ahead(4.0, HeightClass::Full);
  s.walls.push_back({{2.0, -50.0}, {2.0, 50.0}, HeightClass::Waist});
  const CameraModel cam;
  const auto frame = render_depth(s, AgentState{}, cam);
  // The bottom row meets the low wall; row 30 looks over it.
  EXPECT_NEAR(px(frame, 89, 79), 2000.0 / std::cos(column_angle(cam, 79)), 1.0);
  EXPECT_NEAR(px(frame, 30, 79), 4000.0 / std::cos(column_angle(cam, 79)), 1.0);
}

TEST(Render, RangeLimits) {
  const auto close = render_depth(wall_ahead(0.29, HeightClass::Full), AgentState{}, CameraModel{});
  EXPECT_EQ(px(close, 45, 79), 0);
  EXPECT_GT(px(close, 45, 0), 300);
  const auto far = render_depth(wall_ahead(10.5, HeightClass::Full), AgentState{}, CameraModel{});
  for (auto d : far.depths) ASSERT_EQ(d, 0);
}

TEST(Render, AgentOutsideBoundsThrows) {
  EXPECT_THROW(render_depth(open_scene(5.0), AgentState{6.0, 0.0, 0.0, false}, CameraModel{}), OutOfBounds);
}

TEST(Render, NoTunnelingAgainstMarchingOracle) {
  gen::Rng rng(0x5eed0401);
  const CameraModel cam;
  constexpr double step = 0.002;
  for (int scene_no = 0; scene_no < 25; ++scene_no) {
    Scene s = open_scene(15.0);
    const int n = gen::uniform_int(rng, 1, 8);
    for (int k = 0; k < n; ++k) {
      Vec2 a{gen::uniform_real(rng, -8, 8), gen::uniform_real(rng, -8, 8)};
      Vec2 b{gen::uniform_real(rng, -8, 8), gen::uniform_real(rng, -8, 8)};
      s.walls.push_back({a, b, HeightClass::Full});
    }
    const AgentState agent{gen::uniform_real(rng, -2, 2), gen::uniform_real(rng, -2, 2),
                           gen::uniform_real(rng, 0, 2 * kPi), false};
    const auto frame = render_depth(s, agent, cam);
    for (int j = 0; j < cam.width; j += 3) {
      const double angle = agent.heading + column_angle(cam, j);
      const auto hit = oracle::march(s, {agent.x, agent.y}, angle, 10.0, step);
      const auto got = px(frame, 45, j);
      if (!hit || *hit > 9.99) {
        if (!hit) {
          ASSERT_EQ(got, 0) << "scene " << scene_no << " col " << j;
        }
        continue;
      }
      if (*hit < 0.31) continue;
      ASSERT_NE(got, 0) << "ray tunnelled through a wall, scene " << scene_no << " col " << j;
      ASSERT_LE(got, *hit * 1000.0 + 1.0);
      ASSERT_GE(got, (*hit - step) * 1000.0 - 1.0);
    }
  }
}

TEST(Step, IdleCommandKeepsPose) {
  const Scene s = open_scene();
  const AgentState a{1.0, 2.0, 0.5, true};
  const auto b = step_agent(s, a, Command{}, 1.0 / 6.0);
  EXPECT_EQ(b, (AgentState{1.0, 2.0, 0.5, false}));
}

TEST(Step, ForwardAndTurnRates) {
  const Scene s = open_scene();
  const auto moved = step_agent(s, AgentState{}, Command{1, 0}, 1.0);
  EXPECT_NEAR(moved.x, 1.0, 1e-12);
  EXPECT_NEAR(moved.y, 0.0, 1e-12);
  const auto back = step_agent(s, AgentState{}, Command{-1, 0}, 0.5);
  EXPECT_NEAR(back.x, -0.5, 1e-12);
  const auto right = step_agent(s, AgentState{}, Command{0, 1}, 1.0);
  EXPECT_NEAR(right.heading, kPi / 2, 1e-12);
  const auto left = step_agent(s, AgentState{}, Command{0, -1}, 1.0);
  EXPECT_NEAR(left.heading, 3 * kPi / 2, 1e-12);
  // Turning right from +x moves toward +y (downward on the plan).
  const auto arc = step_agent(s, AgentState{}, Command{1, 1}, 1.0 / 6.0);
  EXPECT_GT(arc.y, 0.0);
  EXPECT_THROW(step_agent(s, AgentState{}, Command{1, 0}, 0.0), std::invalid_argument);
}

TEST(Step, StopsAtBodyRadius) {
  const Scene s = wall_ahead(1.0, HeightClass::Full);
  const auto next = step_agent(s, AgentState{}, Command{1, 0}, 1.0);
  EXPECT_NEAR(next.x, 0.75, 1e-6);
  EXPECT_LE(next.x, 0.75);
  EXPECT_TRUE(next.collided);
  // Already touching: pushing on does not move, backing away does.
  const auto again = step_agent(s, next, Command{1, 0}, 1.0 / 6.0);
  EXPECT_NEAR(again.x, next.x, 1e-9);
  EXPECT_TRUE(again.collided);
  const auto away = step_agent(s, next, Command{-1, 0}, 1.0 / 6.0);
  EXPECT_FALSE(away.collided);
  EXPECT_LT(away.x, next.x);
}

TEST(Step, NeverPenetratesObstacles) {
  gen::Rng rng(0x5eed0402);
  const Kinematics kin;
  int collisions = 0;
  for (int i = 0; i < 3000; ++i) {
    Scene s = open_scene(10.0);
    for (int k = 0; k < 4; ++k) {
      s.walls.push_back({{gen::uniform_real(rng, -3, 3), gen::uniform_real(rng, -3, 3)},
                         {gen::uniform_real(rng, -3, 3), gen::uniform_real(rng, -3, 3)},
                         static_cast<HeightClass>(gen::uniform_int(rng, 0, 2))});
    }
    AgentState a{gen::uniform_real(rng, -3, 3), gen::uniform_real(rng, -3, 3),
                 gen::uniform_real(rng, 0, 2 * kPi), false};
    if (clearance(s, a.x, a.y, kin) < kin.radius_m) continue;
    for (int t = 0; t < 20; ++t) {
      const Command cmd{gen::uniform_int(rng, -1, 1), gen::uniform_int(rng, -1, 1)};
      const double dt = gen::uniform_real(rng, 0.01, 1.0);
      a = step_agent(s, a, cmd, dt, kin);
      collisions += a.collided ? 1 : 0;
      ASSERT_GE(clearance(s, a.x, a.y, kin), kin.radius_m - 1e-9) << "case " << i;
    }
  }
  EXPECT_GT(collisions, 0);
}

TEST(Greedy, Examples) {
  EXPECT_EQ(greedy_policy(MotorGrid{}), (Command{1, 0}));
  MotorGrid blocked_left;
  for (int r = 0; r < 5; ++r) {
    blocked_left.set(motor_index(r, 0), 4095);
    blocked_left.set(motor_index(r, 2), 1755);
  }
  EXPECT_EQ(greedy_policy(blocked_left), (Command{0, 1}));
  MotorGrid blocked_right;
  for (int r = 0; r < 5; ++r) {
    blocked_right.set(motor_index(r, 4), 4095);
    blocked_right.set(motor_index(r, 2), 1755);
  }
  EXPECT_EQ(greedy_policy(blocked_right), (Command{0, -1}));
  EXPECT_EQ(greedy_policy(MotorGrid::uniform(585)), (Command{0, -1}));
  EXPECT_EQ(greedy_policy(MotorGrid::uniform(585), GreedyPolicy{5000}), (Command{1, 0}));
}

TEST(Controllers, ScriptedReplaysThenStops) {
  ScriptedController c({{Command{1, 0}, 2}, {Command{0, 1}, 1}, {Command{0, -1}, 0}});
  const MotorGrid g;
  const Observation obs{0, 0, g};
  EXPECT_EQ(c.decide(obs), (Command{1, 0}));
  EXPECT_EQ(c.decide(obs), (Command{1, 0}));
  EXPECT_EQ(c.decide(obs), (Command{0, 1}));
  EXPECT_EQ(c.decide(obs), (Command{}));
  EXPECT_EQ(c.decide(obs), (Command{}));
}

TEST(Controllers, LiveLatestCommandWins) {
  LiveController c;
  const MotorGrid g;
  const Observation obs{0, 0, g};
  EXPECT_EQ(c.decide(obs), (Command{}));
  c.submit({1, 0});
  c.submit({0, 1});
  EXPECT_TRUE(c.has_pending());
  EXPECT_EQ(c.decide(obs), (Command{0, 1}));
  EXPECT_FALSE(c.has_pending());
  EXPECT_EQ(c.decide(obs), (Command{0, 1}));
}

TEST(Session, TickCountFollowsBudget) {
  ScriptedController idle({});
  for (const auto& [budget, hz] : std::vector<std::pair<double, double>>{{10, 6}, {2.5, 4}, {0, 6}, {1, 30}}) {
    SessionParams params;
    params.budget_s = budget;
    params.tick_hz = hz;
    const auto log = run_session(open_scene(), haptic::MappingConfig::indoor(), CameraModel{}, idle, params);
    EXPECT_EQ(log.ticks.size(), static_cast<std::size_t>(std::floor(budget * hz)) + 1);
    EXPECT_FALSE(log.finished());
    for (std::size_t k = 0; k < log.ticks.size(); ++k) {
      EXPECT_EQ(log.ticks[k].t_ms, std::llround(k * 1000.0 / hz));
    }
  }
}

TEST(Session, StartInsideGoalFinishesAtZero) {
  Scene s = open_scene();
  s.goal = {-1, -1, 1, 1};
  ScriptedController idle({});
  const auto log = run_scene(s, idle);
  ASSERT_TRUE(log.finished());
  EXPECT_EQ(*log.completion_time_s, 0.0);
  EXPECT_EQ(log.ticks.size(), 1U);
}

TEST(Session, ObserverSeesEveryFrame) {
  ScriptedController idle({});
  SessionParams params;
  params.budget_s = 1.0;
  int frames = 0;
  params.frame_observer = [&frames](int tick, const haptic::DepthFrame&) { EXPECT_EQ(tick, frames++); };
  run_session(open_scene(), haptic::MappingConfig::indoor(), CameraModel{}, idle, params);
  EXPECT_EQ(frames, 7);
}

TEST(Session, CorridorForwardScript) {
  const Scene s = bundled("corridor");
  ScriptedController forward({{Command{1, 0}, 1000}});
  const auto log = run_scene(s, forward, 30.0);
  ASSERT_TRUE(log.finished());
  EXPECT_GE(*log.completion_time_s, 10.0 - 1e-9);
  EXPECT_LE(*log.completion_time_s, 10.0 + 1.0 / 6.0 + 1e-9);
  EXPECT_EQ(log.collision_count, 0);
  // Walls on both sides, open ahead.
  const auto& g = log.ticks.front().grid;
  for (int r = 0; r < 5; ++r) {
    EXPECT_GT(g.at(r, 0), 0);
    EXPECT_EQ(g.at(r, 2), 0);
    EXPECT_GT(g.at(r, 4), 0);
  }
}

TEST(Session, CollisionsCountTicksInContact) {
  const Scene s = wall_ahead(1.0, HeightClass::Full);
  ScriptedController forward({{Command{1, 0}, 100}});
  SessionParams params;
  params.budget_s = 2.0;
  const auto log = run_session(s, haptic::MappingConfig::indoor(), CameraModel{}, forward, params);
  int contact = 0;
  for (const auto& t : log.ticks) contact += t.state.collided ? 1 : 0;
  EXPECT_EQ(log.collision_count, contact);
  EXPECT_GT(contact, 0);
}

TEST(Session, RouteGreedyIsCollisionFreeAndDeterministic) {
  const Scene s = bundled("route");
  PolicyController greedy1([](const MotorGrid& g) { return greedy_policy(g); });
  PolicyController greedy2([](const MotorGrid& g) { return greedy_policy(g); });
  const auto a = run_scene(s, greedy1);
  const auto b = run_scene(s, greedy2);
  ASSERT_TRUE(a.finished());
  EXPECT_EQ(a.collision_count, 0);
  ASSERT_EQ(a.ticks.size(), b.ticks.size());
  for (std::size_t k = 0; k < a.ticks.size(); ++k) {
    ASSERT_EQ(a.ticks[k].state, b.ticks[k].state);
    ASSERT_EQ(a.ticks[k].grid, b.ticks[k].grid);
  }
  EXPECT_EQ(a.completion_time_s, b.completion_time_s);
}

TEST(Session, RouteToleratesSmallStartPerturbations) {
  Scene s = bundled("route");
  gen::Rng rng(0x5eed0403);
  for (int i = 0; i < 5; ++i) {
    Scene p = s;
    p.start.y += gen::uniform_real(rng, -0.5, 0.5);
    p.start.heading += deg(gen::uniform_real(rng, -8, 8));
    PolicyController greedy([](const MotorGrid& g) { return greedy_policy(g); });
    const auto log = run_scene(p, greedy);
    EXPECT_TRUE(log.finished()) << i;
    EXPECT_EQ(log.collision_count, 0) << i;
  }
}

TEST(Scene, Validation) {
  Scene s = wall_ahead(0.2, HeightClass::Full);
  EXPECT_THROW(validate_scene(s), SceneError);
  s = open_scene();
  s.goal = {1, 1, 1, 2};
  EXPECT_THROW(validate_scene(s), SceneError);
  s = open_scene(5.0);
  s.start.x = 9;
  EXPECT_THROW(validate_scene(s), SceneError);
  // An overhead beam above a walker still counts against the body.
  s = wall_ahead(0.2, HeightClass::Overhead);
  EXPECT_THROW(validate_scene(s), SceneError);
  EXPECT_NO_THROW(validate_scene(open_scene()));
  EXPECT_NO_THROW(validate_scene(bundled("route")));
  EXPECT_NO_THROW(validate_scene(bundled("corridor")));
}

TEST(Scene, NormalizeHeading) {
  EXPECT_NEAR(normalize_heading(-kPi / 2), 3 * kPi / 2, 1e-12);
  EXPECT_NEAR(normalize_heading(5 * kPi), kPi, 1e-12);
  EXPECT_GE(normalize_heading(-1e-18), 0.0);
  EXPECT_LT(normalize_heading(-1e-18), 2 * kPi);
}

}  // namespace
