#pragma once

// Per-connection session state machine for the processing service.
//
// The engine is transport-agnostic and clock-agnostic: the owner feeds it
// client lines and timer firings (in session milliseconds) and sends whatever
// messages it returns. One engine serves one connection and runs at most one
// session (navigation or pattern test) at a time.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tactile/haptic_map.hpp"
#include "tactile/pattern_lab.hpp"
#include "tactile/scene_sim.hpp"

namespace tactile::service {

// Immutable catalogs shared by all sessions.
struct Catalogs {
  std::map<std::string, sim::Scene> scenes;
  std::vector<patterns::Pattern> patterns;
};

std::shared_ptr<const Catalogs> load_catalogs(const std::filesystem::path& scene_dir,
                                              std::vector<patterns::Pattern> patterns);

// Append-only JSONL store; appends from all sessions are serialized and each
// line is flushed whole, so a crash leaves a parseable prefix.
class LogStore {
 public:
  explicit LogStore(std::filesystem::path dir);
  void append(const nlohmann::json& record);
  const std::filesystem::path& file() const { return file_; }

 private:
  std::mutex mutex_;
  std::filesystem::path file_;
  std::ofstream out_;
};

// Directory from TACTILE_DATA_DIR, default ./data.
std::filesystem::path default_data_dir();

// Receives every live grid, e.g. to forward it as wire frames.
class GridSink {
 public:
  virtual ~GridSink() = default;
  virtual void emit(const MotorGrid& grid) = 0;
};

struct EngineOptions {
  bool debug_pose = false;
  double default_tick_hz = 6.0;
  double default_budget_s = 600.0;
  haptic::MappingConfig mapping = haptic::MappingConfig::indoor();
  sim::CameraModel camera;
};

class SessionEngine {
 public:
  SessionEngine(std::shared_ptr<const Catalogs> catalogs, EngineOptions options,
                LogStore* store, GridSink* sink, std::string connection_id);

  // One client line. Malformed input yields an error message; the engine
  // state is left as it was.
  std::vector<nlohmann::json> handle_line(std::string_view line, double now_ms);

  // Session time at which on_timer() wants to run next, if anything is due.
  std::optional<double> next_deadline_ms() const;
  std::vector<nlohmann::json> on_timer(double now_ms);

  // Connection closed: an active session is ended and logged.
  void abort(double now_ms);

  bool session_active() const { return mode_ != Mode::Idle; }
  const std::string& session_id() const { return session_id_; }

 private:
  enum class Mode { Idle, Navigate, Pattern };

  std::vector<nlohmann::json> handle_start(const nlohmann::json& msg, double now_ms);
  std::vector<nlohmann::json> handle_cmd(const nlohmann::json& msg);
  std::vector<nlohmann::json> handle_answer(const nlohmann::json& msg, double now_ms);
  std::vector<nlohmann::json> handle_end(double now_ms);

  void begin_pattern(std::size_t index, double now_ms);
  nlohmann::json finish_navigation(bool aborted);
  nlohmann::json finish_patterns(bool aborted);
  void log(nlohmann::json record);

  std::shared_ptr<const Catalogs> catalogs_;
  EngineOptions options_;
  LogStore* store_;
  GridSink* sink_;
  std::string connection_id_;
  int session_counter_ = 0;

  Mode mode_ = Mode::Idle;
  std::string session_id_;
  std::optional<std::string> person_;
  std::optional<int> run_;
  double session_start_ms_ = 0.0;

  // Navigation
  std::unique_ptr<sim::NavigationRun> nav_;
  std::unique_ptr<sim::LiveController> live_;
  double tick_hz_ = 6.0;

  // Pattern test
  std::size_t pattern_index_ = 0;
  std::vector<patterns::ScheduledGrid> playback_;
  std::size_t playback_pos_ = 0;
  double playback_start_ms_ = 0.0;
  std::vector<std::pair<patterns::Pattern, patterns::TrialRecord>> trials_;
};

}  // namespace tactile::service
