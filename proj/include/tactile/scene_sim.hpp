#pragma once

// 2.5D navigation simulator standing in for the camera and the testing route.
//
// World frame: meters, x to the right and y downward as drawn on a floor
// plan; heading is measured from +x toward +y, so a positive turn is a turn to
// the right and image column 0 looks to the agent's left.

#include <cstdint>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tactile/grid.hpp"
#include "tactile/haptic_map.hpp"

namespace tactile::sim {

enum class HeightClass { Full, Waist, Overhead };

// Vertical extent of an obstacle above the floor, meters.
struct HeightBand {
  double z_min = 0.0;
  double z_max = 0.0;
};
HeightBand band_for(HeightClass height_class);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Wall {
  Vec2 a;
  Vec2 b;
  HeightClass height_class = HeightClass::Full;
};

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool empty() const { return !(x1 > x0 && y1 > y0); }
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians
};

struct Scene {
  std::string name;
  std::vector<Wall> walls;
  Pose start;
  Rect goal;
  Rect bounds;
};

class SceneError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutOfBounds : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // [0, 2*pi)
  bool collided = false;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

AgentState initial_state(const Scene& scene);
double normalize_heading(double radians);

struct CameraModel {
  double h_fov_deg = 65.0;
  double v_fov_deg = 40.0;
  int width = 160;
  int height = 90;
  std::uint16_t min_range_mm = 300;
  std::uint16_t max_range_mm = 10000;
  double mount_height_m = 1.6;

  void validate() const;
};

struct Kinematics {
  double speed_mps = 1.0;
  double turn_rate_deg_s = 90.0;
  double radius_m = 0.25;
  double body_height_m = 1.8;
};

// forward, turn in {-1, 0, +1}; turn +1 is to the right.
struct Command {
  int forward = 0;
  int turn = 0;
  friend bool operator==(const Command&, const Command&) = default;
};

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

// Nearest distance from the agent centre to any obstacle footprint that can
// touch the agent's body.
double clearance(const Scene& scene, double x, double y, const Kinematics& kin = {});

// Throws SceneError if the goal is empty, the start lies outside the bounds or
// the agent disc at the start overlaps an obstacle.
void validate_scene(const Scene& scene, const Kinematics& kin = {});

// Bounding box of walls, start and goal, padded by one meter.
Rect derive_bounds(const Scene& scene);

haptic::DepthFrame render_depth(const Scene& scene, const AgentState& agent,
                                 const CameraModel& cam);

AgentState step_agent(const Scene& scene, const AgentState& state, Command cmd, double dt_s,
                      const Kinematics& kin = {});

struct GreedyPolicy {
  // Sum of the five center-column duties at or above which the way ahead
  // counts as blocked.
  int center_threshold = 1000;
};

Command greedy_policy(const MotorGrid& grid, const GreedyPolicy& policy = {});

struct Observation {
  int tick = 0;
  int t_ms = 0;
  const MotorGrid& grid;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual Command decide(const Observation& obs) = 0;
};

// Replays (command, tick count) pairs, then stands still.
class ScriptedController : public Controller {
 public:
  struct Segment {
    Command command;
    int ticks = 0;
  };
  explicit ScriptedController(std::vector<Segment> script);
  Command decide(const Observation& obs) override;

 private:
  std::vector<Segment> script_;
  std::size_t segment_ = 0;
  int used_ = 0;
};

class PolicyController : public Controller {
 public:
  explicit PolicyController(std::function<Command(const MotorGrid&)> policy);
  Command decide(const Observation& obs) override;

 private:
  std::function<Command(const MotorGrid&)> policy_;
};

// Command handoff from an external stream. Newer commands replace unconsumed
// older ones; a tick with no new command repeats the previous one.
class LiveController : public Controller {
 public:
  void submit(Command cmd);
  Command decide(const Observation& obs) override;
  bool has_pending() const;

 private:
  mutable std::mutex mutex_;
  std::optional<Command> pending_;
  Command current_;
};

struct TickRecord {
  int t_ms = 0;
  AgentState state;
  MotorGrid grid;
};

struct SessionLog {
  std::string scene_name;
  std::vector<TickRecord> ticks;
  std::optional<double> completion_time_s;  // empty: did not finish
  int collision_count = 0;

  bool finished() const { return completion_time_s.has_value(); }
};

struct SessionParams {
  double tick_hz = 6.0;
  double budget_s = 600.0;
  Kinematics kinematics;
  // Called with every rendered frame, before mapping.
  std::function<void(int tick, const haptic::DepthFrame&)> frame_observer;
};

// Tick-by-tick session: render, map, record, check goal/budget, ask the
// controller, step. Used headlessly by run_session and in real time by the
// service.
class NavigationRun {
 public:
  NavigationRun(const Scene& scene, haptic::MappingConfig config, CameraModel cam,
                SessionParams params);

  // Runs one tick. Returns the recorded tick; afterwards done() may be true.
  const TickRecord& advance(Controller& controller);

  bool done() const { return done_; }
  int tick_count() const { return static_cast<int>(log_.ticks.size()); }
  int max_ticks() const { return max_ticks_; }
  const SessionLog& log() const { return log_; }
  const AgentState& state() const { return state_; }

 private:
  const Scene& scene_;
  haptic::MappingConfig config_;
  CameraModel cam_;
  SessionParams params_;
  AgentState state_;
  SessionLog log_;
  int max_ticks_ = 1;
  bool done_ = false;
};

SessionLog run_session(const Scene& scene, const haptic::MappingConfig& config,
                       const CameraModel& cam, Controller& controller,
                       const SessionParams& params = {});

int tick_time_ms(int tick, double tick_hz);

}  // namespace tactile::sim
