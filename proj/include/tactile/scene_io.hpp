#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactile/scene_sim.hpp"

namespace tactile::sim {

// Scene document:
//   {"name": "...",
//    "walls": [{"x0":0,"y0":0,"x1":1,"y1":0,"height_class":"full|waist|overhead"}, ...],
//    "start": {"x":..,"y":..,"heading_deg":..} (or "heading" in radians),
//    "goal":  {"x0":..,"y0":..,"x1":..,"y1":..},
//    "bounds": {...}  optional, derived from the content when absent}
Scene scene_from_json(const nlohmann::json& doc);  // throws SceneError
nlohmann::json to_json(const Scene& scene);
Scene read_scene_file(const std::filesystem::path& path);

std::string to_string(HeightClass height_class);
HeightClass parse_height_class(const std::string& text);

// Optional labels carried into the summary line so logs can be scored.
struct RunLabels {
  std::optional<std::string> person;
  std::optional<int> run;
};

nlohmann::json tick_to_json(const TickRecord& tick);
nlohmann::json summary_to_json(const SessionLog& log, const RunLabels& labels = {});

// One tick per line, then the summary line.
void write_session_log(std::ostream& out, const SessionLog& log, const RunLabels& labels = {});

// Script document: {"commands": [{"forward": 1, "turn": 0, "ticks": 60}, ...]}
std::vector<ScriptedController::Segment> script_from_json(const nlohmann::json& doc);
std::vector<ScriptedController::Segment> read_script_file(const std::filesystem::path& path);

}  // namespace tactile::sim
