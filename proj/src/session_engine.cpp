#include "tactile/session_engine.hpp"

#include <algorithm>
#include <cstdlib>

#include "tactile/pattern_io.hpp"
#include "tactile/scene_io.hpp"

namespace tactile::service {

using nlohmann::json;

namespace {

json error_message(const std::string& text) { return json{{"type", "error"}, {"message", text}}; }

int unit_field(const json& msg, const char* key) {
  if (!msg.contains(key)) return 0;
  const json& v = msg.at(key);
  if (!v.is_number_integer() || v.get<int>() < -1 || v.get<int>() > 1) {
    throw std::invalid_argument(std::string("'") + key + "' must be -1, 0 or 1");
  }
  return v.get<int>();
}

std::optional<std::string> string_field(const json& msg, const char* key) {
  if (!msg.contains(key) || msg.at(key).is_null()) return std::nullopt;
  if (!msg.at(key).is_string()) throw std::invalid_argument(std::string("'") + key + "' must be a string");
  return msg.at(key).get<std::string>();
}

}  // namespace

std::shared_ptr<const Catalogs> load_catalogs(const std::filesystem::path& scene_dir,
                                              std::vector<patterns::Pattern> pattern_catalog) {
  auto catalogs = std::make_shared<Catalogs>();
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(scene_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    sim::Scene scene = sim::read_scene_file(file);
    const std::string name = scene.name;
    if (!catalogs->scenes.emplace(name, std::move(scene)).second) {
      throw sim::SceneError("duplicate scene name '" + name + "' in " + file.string());
    }
  }
  if (catalogs->scenes.empty()) {
    throw sim::SceneError("no scene files found in " + scene_dir.string());
  }
  catalogs->patterns = std::move(pattern_catalog);
  return catalogs;
}

LogStore::LogStore(std::filesystem::path dir) {
  std::filesystem::create_directories(dir);
  file_ = dir / "sessions.jsonl";
  out_.open(file_, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open log store " + file_.string());
}

void LogStore::append(const json& record) {
  const std::string line = record.dump() + '\n';
  std::lock_guard lock(mutex_);
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
}

std::filesystem::path default_data_dir() {
  if (const char* dir = std::getenv("TACTILE_DATA_DIR"); dir != nullptr && *dir != '\0') {
    return dir;
  }
  return "data";
}

SessionEngine::SessionEngine(std::shared_ptr<const Catalogs> catalogs, EngineOptions options,
                             LogStore* store, GridSink* sink, std::string connection_id)
    : catalogs_(std::move(catalogs)),
      options_(std::move(options)),
      store_(store),
      sink_(sink),
      connection_id_(std::move(connection_id)) {}

void SessionEngine::log(json record) {
  if (store_ == nullptr) return;
  record["session"] = session_id_;
  store_->append(record);
}

std::vector<json> SessionEngine::handle_line(std::string_view line, double now_ms) {
  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::exception&) {
    return {error_message("malformed JSON")};
  }
  if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string()) {
    return {error_message("message needs a string 'type'")};
  }
  const std::string type = msg.at("type").get<std::string>();
  try {
    if (type == "start") return handle_start(msg, now_ms);
    if (type == "cmd") return handle_cmd(msg);
    if (type == "answer") return handle_answer(msg, now_ms);
    if (type == "end") return handle_end(now_ms);
  } catch (const std::invalid_argument& e) {
    return {error_message(e.what())};
  } catch (const json::exception& e) {
    return {error_message(e.what())};
  }
  return {error_message("unknown message type '" + type + "'")};
}

std::vector<json> SessionEngine::handle_start(const json& msg, double now_ms) {
  if (mode_ != Mode::Idle) return {error_message("a session is already active")};
  const auto mode = string_field(msg, "mode").value_or("");
  auto person = string_field(msg, "person");
  std::optional<int> run;
  if (msg.contains("run") && !msg.at("run").is_null()) {
    if (!msg.at("run").is_number_integer()) throw std::invalid_argument("'run' must be an integer");
    run = msg.at("run").get<int>();
  }

  if (mode == "navigate") {
    const auto scene_name = string_field(msg, "scene").value_or("");
    const auto it = catalogs_->scenes.find(scene_name);
    if (it == catalogs_->scenes.end()) return {error_message("unknown scene '" + scene_name + "'")};
    sim::SessionParams params;
    params.tick_hz = msg.value("tick_hz", options_.default_tick_hz);
    params.budget_s = msg.value("budget_s", options_.default_budget_s);
    if (!(params.tick_hz > 0.0 && params.tick_hz <= 1000.0)) {
      throw std::invalid_argument("'tick_hz' must be in (0, 1000]");
    }
    if (!(params.budget_s >= 0.0)) throw std::invalid_argument("'budget_s' must be non-negative");

    nav_ = std::make_unique<sim::NavigationRun>(it->second, options_.mapping, options_.camera, params);
    live_ = std::make_unique<sim::LiveController>();
    tick_hz_ = params.tick_hz;
    mode_ = Mode::Navigate;
    session_id_ = connection_id_ + "-s" + std::to_string(++session_counter_);
    person_ = std::move(person);
    run_ = run;
    session_start_ms_ = now_ms;

    json ack{{"type", "start"},   {"session", session_id_}, {"mode", "navigate"},
             {"scene", scene_name}, {"tick_hz", params.tick_hz}, {"budget_s", params.budget_s}};
    json record = ack;
    record.erase("type");
    record["kind"] = "start";
    if (person_) record["person"] = *person_;
    if (run_) record["run"] = *run_;
    log(record);
    return {ack};
  }

  if (mode == "pattern") {
    if (catalogs_->patterns.empty()) return {error_message("pattern catalog is empty")};
    mode_ = Mode::Pattern;
    session_id_ = connection_id_ + "-s" + std::to_string(++session_counter_);
    person_ = std::move(person);
    run_ = run;
    session_start_ms_ = now_ms;
    trials_.clear();
    begin_pattern(0, now_ms);

    json ack{{"type", "start"},
             {"session", session_id_},
             {"mode", "pattern"},
             {"total", catalogs_->patterns.size()}};
    json record = ack;
    record.erase("type");
    record["kind"] = "start";
    if (person_) record["person"] = *person_;
    log(record);
    return {ack};
  }

  return {error_message("'mode' must be 'navigate' or 'pattern'")};
}

std::vector<json> SessionEngine::handle_cmd(const json& msg) {
  if (mode_ != Mode::Navigate) return {error_message("no navigation session is active")};
  sim::Command cmd;
  cmd.forward = unit_field(msg, "forward");
  cmd.turn = unit_field(msg, "turn");
  live_->submit(cmd);
  return {};
}

std::vector<json> SessionEngine::handle_answer(const json& msg, double now_ms) {
  if (mode_ != Mode::Pattern) return {error_message("no pattern session is active")};
  const patterns::Pattern& current = catalogs_->patterns[pattern_index_];
  const auto pattern_id = string_field(msg, "pattern_id").value_or("");
  if (pattern_id != current.id) {
    return {error_message("answer is for '" + pattern_id + "' but the current pattern is '" +
                          current.id + "'")};
  }

  patterns::TrialRecord record;
  record.pattern_id = pattern_id;
  const auto direction =
      string_field(msg, "direction").value_or(string_field(msg, "answer_direction").value_or("Unknown"));
  record.answer_direction = patterns::parse_direction(direction);
  auto simultaneity = string_field(msg, "simultaneity");
  if (!simultaneity) simultaneity = string_field(msg, "answer_simultaneity");
  if (simultaneity && *simultaneity != "Unknown") {
    record.answer_simultaneity = patterns::parse_simultaneity(*simultaneity);
  }
  record.timestamp = patterns::iso8601_now();

  const patterns::TrialResult result = patterns::score_trial(current, record);
  json logged = patterns::to_json(record);
  logged["kind"] = "trial";
  logged["verdict"] = patterns::to_string(result.verdict);
  log(logged);
  trials_.emplace_back(current, record);

  std::vector<json> out{json{{"type", "answer"},
                             {"session", session_id_},
                             {"pattern_id", pattern_id},
                             {"index", pattern_index_},
                             {"accepted", true}}};
  if (pattern_index_ + 1 < catalogs_->patterns.size()) {
    begin_pattern(pattern_index_ + 1, now_ms);
  } else {
    out.push_back(finish_patterns(false));
  }
  return out;
}

std::vector<json> SessionEngine::handle_end(double) {
  if (mode_ == Mode::Navigate) return {finish_navigation(true)};
  if (mode_ == Mode::Pattern) return {finish_patterns(true)};
  return {error_message("no session is active")};
}

void SessionEngine::begin_pattern(std::size_t index, double now_ms) {
  pattern_index_ = index;
  playback_ = patterns::schedule(catalogs_->patterns[index]);
  playback_pos_ = 0;
  playback_start_ms_ = now_ms;
}

std::optional<double> SessionEngine::next_deadline_ms() const {
  if (mode_ == Mode::Navigate && nav_ && !nav_->done()) {
    return session_start_ms_ + sim::tick_time_ms(nav_->tick_count(), tick_hz_);
  }
  if (mode_ == Mode::Pattern && playback_pos_ < playback_.size()) {
    return playback_start_ms_ + playback_[playback_pos_].t_ms;
  }
  return std::nullopt;
}

std::vector<json> SessionEngine::on_timer(double now_ms) {
  std::vector<json> out;
  if (mode_ == Mode::Navigate) {
    while (!nav_->done() && *next_deadline_ms() <= now_ms) {
      const sim::TickRecord& tick = nav_->advance(*live_);
      json msg{{"type", "tick"}, {"session", session_id_}, {"t_ms", tick.t_ms}, {"grid", tick.grid.values()}};
      if (options_.debug_pose) {
        msg["pose"] = {{"x", tick.state.x}, {"y", tick.state.y}, {"heading", tick.state.heading}};
        msg["collided"] = tick.state.collided;
      }
      if (sink_ != nullptr) sink_->emit(tick.grid);
      log(sim::tick_to_json(tick));
      out.push_back(std::move(msg));
    }
    if (nav_->done()) out.push_back(finish_navigation(false));
  } else if (mode_ == Mode::Pattern) {
    const patterns::Pattern& current = catalogs_->patterns[pattern_index_];
    while (playback_pos_ < playback_.size() && *next_deadline_ms() <= now_ms) {
      const auto& entry = playback_[playback_pos_++];
      if (sink_ != nullptr) sink_->emit(entry.grid);
      out.push_back(json{{"type", "tick"},
                         {"session", session_id_},
                         {"t_ms", entry.t_ms},
                         {"grid", entry.grid.values()},
                         {"pattern_id", current.id},
                         {"index", pattern_index_},
                         {"total", catalogs_->patterns.size()},
                         {"final", playback_pos_ == playback_.size()}});
    }
  }
  return out;
}

json SessionEngine::finish_navigation(bool aborted) {
  sim::RunLabels labels{person_, run_};
  json summary = sim::summary_to_json(nav_->log(), labels);
  summary["aborted"] = aborted;
  log(summary);

  json msg = summary;
  msg.erase("kind");
  msg["type"] = "summary";
  msg["session"] = session_id_;
  mode_ = Mode::Idle;
  nav_.reset();
  live_.reset();
  return msg;
}

json SessionEngine::finish_patterns(bool aborted) {
  const patterns::AccuracyTable table = patterns::aggregate_trials(trials_);
  json trials = json::array();
  for (const auto& [pattern, record] : trials_) {
    json t = patterns::to_json(record);
    t["verdict"] = patterns::to_string(patterns::score_trial(pattern, record).verdict);
    trials.push_back(std::move(t));
  }
  json summary{{"kind", "summary"},
               {"mode", "pattern"},
               {"answered", trials_.size()},
               {"total", catalogs_->patterns.size()},
               {"aborted", aborted},
               {"trials", std::move(trials)},
               {"accuracy", patterns::to_json(table)}};
  if (person_) summary["person"] = *person_;
  log(summary);

  json msg = summary;
  msg.erase("kind");
  msg["type"] = "summary";
  msg["session"] = session_id_;
  mode_ = Mode::Idle;
  playback_.clear();
  trials_.clear();
  return msg;
}

void SessionEngine::abort(double) {
  if (mode_ == Mode::Navigate) {
    finish_navigation(true);
  } else if (mode_ == Mode::Pattern) {
    finish_patterns(true);
  }
}

}  // namespace tactile::service
