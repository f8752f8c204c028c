#include "tactile/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace tactile::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

bool blocks_body(const Wall& wall, const Kinematics& kin) {
  const HeightBand band = band_for(wall.height_class);
  return band.z_min < kin.body_height_m && band.z_max > 0.0;
}

// Distance along the unit ray (origin, dir) to segment ab, if it is hit.
std::optional<double> ray_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  const Vec2 edge{b.x - a.x, b.y - a.y};
  const double denom = cross(dir, edge);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const Vec2 to_a{a.x - origin.x, a.y - origin.y};
  const double t = cross(to_a, edge) / denom;
  const double u = cross(to_a, dir) / denom;
  if (t <= 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

}  // namespace

HeightBand band_for(HeightClass height_class) {
  switch (height_class) {
    case HeightClass::Full:
      return {0.0, 3.0};
    case HeightClass::Waist:
      return {0.0, 1.0};
    case HeightClass::Overhead:
      return {1.4, 2.2};
  }
  return {0.0, 3.0};
}

double normalize_heading(double radians) {
  double h = std::fmod(radians, kTwoPi);
  if (h < 0.0) h += kTwoPi;
  if (h >= kTwoPi) h = 0.0;
  return h;
}

AgentState initial_state(const Scene& scene) {
  return AgentState{scene.start.x, scene.start.y, normalize_heading(scene.start.heading), false};
}

void CameraModel::validate() const {
  if (!(h_fov_deg > 0.0 && h_fov_deg < 180.0) || !(v_fov_deg > 0.0 && v_fov_deg < 180.0)) {
    throw std::invalid_argument("camera field of view must be in (0, 180) degrees");
  }
  if (width < kGridSide || height < kGridSide) {
    throw std::invalid_argument("camera resolution must be at least 5x5");
  }
  if (min_range_mm >= max_range_mm) {
    throw std::invalid_argument("camera min range must be below max range");
  }
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab{b.x - a.x, b.y - a.y};
  const Vec2 ap{p.x - a.x, p.y - a.y};
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0.0 ? (ap.x * ab.x + ap.y * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * ab.x);
  const double dy = p.y - (a.y + t * ab.y);
  return std::hypot(dx, dy);
}

double clearance(const Scene& scene, double x, double y, const Kinematics& kin) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& wall : scene.walls) {
    if (!blocks_body(wall, kin)) continue;
    best = std::min(best, point_segment_distance({x, y}, wall.a, wall.b));
  }
  return best;
}

Rect derive_bounds(const Scene& scene) {
  Rect r{scene.start.x, scene.start.y, scene.start.x, scene.start.y};
  auto grow = [&r](double x, double y) {
    r.x0 = std::min(r.x0, x);
    r.y0 = std::min(r.y0, y);
    r.x1 = std::max(r.x1, x);
    r.y1 = std::max(r.y1, y);
  };
  for (const auto& w : scene.walls) {
    grow(w.a.x, w.a.y);
    grow(w.b.x, w.b.y);
  }
  grow(scene.goal.x0, scene.goal.y0);
  grow(scene.goal.x1, scene.goal.y1);
  return Rect{r.x0 - 1.0, r.y0 - 1.0, r.x1 + 1.0, r.y1 + 1.0};
}

void validate_scene(const Scene& scene, const Kinematics& kin) {
  if (scene.goal.empty()) throw SceneError("scene '" + scene.name + "': goal region is empty");
  if (scene.bounds.empty() || !scene.bounds.contains(scene.start.x, scene.start.y)) {
    throw SceneError("scene '" + scene.name + "': start lies outside the scene bounds");
  }
  if (clearance(scene, scene.start.x, scene.start.y, kin) < kin.radius_m) {
    throw SceneError("scene '" + scene.name + "': start pose overlaps an obstacle");
  }
}

haptic::DepthFrame render_depth(const Scene& scene, const AgentState& agent,
                                 const CameraModel& cam) {
  cam.validate();
  if (!scene.bounds.contains(agent.x, agent.y)) {
    throw OutOfBounds("agent at (" + std::to_string(agent.x) + ", " + std::to_string(agent.y) +
                      ") is outside scene '" + scene.name + "'");
  }

  haptic::DepthFrame frame;
  frame.width = cam.width;
  frame.height = cam.height;
  frame.depths.assign(static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height),
                      haptic::kNoData);

  std::vector<double> row_slope(static_cast<std::size_t>(cam.height));
  for (int i = 0; i < cam.height; ++i) {
    const double elevation = cam.v_fov_deg * (0.5 - static_cast<double>(i) / (cam.height - 1));
    row_slope[static_cast<std::size_t>(i)] = std::tan(deg_to_rad(elevation));
  }

  struct Hit {
    double distance;
    HeightBand band;
  };
  std::vector<Hit> hits;
  const Vec2 origin{agent.x, agent.y};
  const double max_range_m = cam.max_range_mm / 1000.0;

  for (int j = 0; j < cam.width; ++j) {
    const double offset = cam.h_fov_deg * (static_cast<double>(j) / (cam.width - 1) - 0.5);
    const double angle = agent.heading + deg_to_rad(offset);
    const Vec2 dir{std::cos(angle), std::sin(angle)};

    hits.clear();
    for (const auto& wall : scene.walls) {
      if (auto t = ray_hit(origin, dir, wall.a, wall.b); t && *t <= max_range_m) {
        hits.push_back({*t, band_for(wall.height_class)});
      }
    }
    std::sort(hits.begin(), hits.end(),
              [](const Hit& a, const Hit& b) { return a.distance < b.distance; });

    for (int i = 0; i < cam.height; ++i) {
      for (const auto& hit : hits) {
        const double z = cam.mount_height_m + hit.distance * row_slope[static_cast<std::size_t>(i)];
        if (z < hit.band.z_min || z > hit.band.z_max) continue;
        const double mm = std::round(hit.distance * 1000.0);
        if (mm >= cam.min_range_mm) {
          frame.depths[static_cast<std::size_t>(i) * static_cast<std::size_t>(cam.width) +
                       static_cast<std::size_t>(j)] = static_cast<std::uint16_t>(mm);
        }
        break;
      }
    }
  }
  return frame;
}

namespace {

// Largest t in [0, 1] such that the disc moving from p0 to p1 keeps at least
// `radius` from segment ab on [0, t]. dist(p(t), ab) is convex in t.
double allowed_fraction(Vec2 p0, Vec2 p1, Vec2 a, Vec2 b, double radius) {
  const double move = std::hypot(p1.x - p0.x, p1.y - p0.y);
  auto f = [&](double t) {
    return point_segment_distance({p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y)}, a, b);
  };
  const double f0 = f(0.0);
  if (f0 - move >= radius) return 1.0;

  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const double t_min = 0.5 * (lo + hi);
  if (f(t_min) >= radius) return 1.0;
  if (f0 < radius) {
    // Already touching: only motion that does not close in is allowed.
    return f(1e-9) >= f0 ? 1.0 : 0.0;
  }

  lo = 0.0;  // f(lo) >= radius
  hi = t_min;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) >= radius) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

AgentState step_agent(const Scene& scene, const AgentState& state, Command cmd, double dt_s,
                      const Kinematics& kin) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("step_agent: dt must be positive");
  const int forward = std::clamp(cmd.forward, -1, 1);
  const int turn = std::clamp(cmd.turn, -1, 1);

  AgentState next = state;
  next.collided = false;
  next.heading = normalize_heading(state.heading + turn * deg_to_rad(kin.turn_rate_deg_s) * dt_s);
  if (forward == 0) return next;

  const double distance = forward * kin.speed_mps * dt_s;
  const Vec2 p0{state.x, state.y};
  const Vec2 p1{state.x + distance * std::cos(next.heading),
                state.y + distance * std::sin(next.heading)};

  double t = 1.0;
  for (const auto& wall : scene.walls) {
    if (!blocks_body(wall, kin)) continue;
    t = std::min(t, allowed_fraction(p0, p1, wall.a, wall.b, kin.radius_m));
  }
  next.x = p0.x + t * (p1.x - p0.x);
  next.y = p0.y + t * (p1.y - p0.y);
  next.collided = t < 1.0;
  return next;
}

Command greedy_policy(const MotorGrid& grid, const GreedyPolicy& policy) {
  int left = 0;
  int center = 0;
  int right = 0;
  for (int r = 0; r < kGridSide; ++r) {
    left += grid.at(r, 0) + grid.at(r, 1);
    center += grid.at(r, 2);
    right += grid.at(r, 3) + grid.at(r, 4);
  }
  if (center < policy.center_threshold) return Command{1, 0};
  return Command{0, right < left ? 1 : -1};
}

ScriptedController::ScriptedController(std::vector<Segment> script) : script_(std::move(script)) {}

Command ScriptedController::decide(const Observation&) {
  while (segment_ < script_.size() && used_ >= script_[segment_].ticks) {
    ++segment_;
    used_ = 0;
  }
  if (segment_ >= script_.size()) return Command{};
  ++used_;
  return script_[segment_].command;
}

PolicyController::PolicyController(std::function<Command(const MotorGrid&)> policy)
    : policy_(std::move(policy)) {}

Command PolicyController::decide(const Observation& obs) { return policy_(obs.grid); }

void LiveController::submit(Command cmd) {
  std::lock_guard lock(mutex_);
  pending_ = cmd;
}

Command LiveController::decide(const Observation&) {
  std::lock_guard lock(mutex_);
  if (pending_) {
    current_ = *pending_;
    pending_.reset();
  }
  return current_;
}

bool LiveController::has_pending() const {
  std::lock_guard lock(mutex_);
  return pending_.has_value();
}

int tick_time_ms(int tick, double tick_hz) {
  return static_cast<int>(std::llround(tick * 1000.0 / tick_hz));
}

NavigationRun::NavigationRun(const Scene& scene, haptic::MappingConfig config, CameraModel cam,
                             SessionParams params)
    : scene_(scene),
      config_(std::move(config)),
      cam_(cam),
      params_(std::move(params)),
      state_(initial_state(scene)) {
  config_.validate();
  cam_.validate();
  if (!(params_.tick_hz > 0.0 && params_.tick_hz <= 1000.0)) {
    throw std::invalid_argument("tick rate must be in (0, 1000] Hz");
  }
  if (!(params_.budget_s >= 0.0)) throw std::invalid_argument("budget must be non-negative");
  max_ticks_ = static_cast<int>(std::floor(params_.budget_s * params_.tick_hz + 1e-9)) + 1;
  log_.scene_name = scene.name;
}

const TickRecord& NavigationRun::advance(Controller& controller) {
  if (done_) throw std::logic_error("navigation run already finished");
  const int tick = tick_count();
  haptic::DepthFrame frame = render_depth(scene_, state_, cam_);
  frame.timestamp_ms = static_cast<std::uint64_t>(tick_time_ms(tick, params_.tick_hz));
  if (params_.frame_observer) params_.frame_observer(tick, frame);

  log_.ticks.push_back(
      TickRecord{tick_time_ms(tick, params_.tick_hz), state_, haptic::process_frame(frame, config_)});
  const TickRecord& record = log_.ticks.back();
  if (state_.collided) ++log_.collision_count;

  if (scene_.goal.contains(state_.x, state_.y)) {
    log_.completion_time_s = tick / params_.tick_hz;
    done_ = true;
  } else if (tick + 1 >= max_ticks_) {
    done_ = true;
  } else {
    const Command cmd = controller.decide(Observation{tick, record.t_ms, record.grid});
    state_ = step_agent(scene_, state_, cmd, 1.0 / params_.tick_hz, params_.kinematics);
  }
  return record;
}

SessionLog run_session(const Scene& scene, const haptic::MappingConfig& config,
                       const CameraModel& cam, Controller& controller,
                       const SessionParams& params) {
  NavigationRun run(scene, config, cam, params);
  while (!run.done()) run.advance(controller);
  return run.log();
}

}  // namespace tactile::sim
