#include "tactile/scene_io.hpp"

#include <fstream>
#include <numbers>
#include <ostream>

namespace tactile::sim {

using nlohmann::json;

namespace {

Rect rect_from_json(const json& doc) {
  return Rect{doc.at("x0").get<double>(), doc.at("y0").get<double>(), doc.at("x1").get<double>(),
              doc.at("y1").get<double>()};
}

json to_json(const Rect& r) { return json{{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}}; }

int unit_command(const json& doc, const char* key) {
  const int v = doc.value(key, 0);
  if (v < -1 || v > 1) throw SceneError(std::string("script: '") + key + "' must be -1, 0 or 1");
  return v;
}

}  // namespace

std::string to_string(HeightClass height_class) {
  switch (height_class) {
    case HeightClass::Full:
      return "full";
    case HeightClass::Waist:
      return "waist";
    case HeightClass::Overhead:
      return "overhead";
  }
  return "full";
}

HeightClass parse_height_class(const std::string& text) {
  if (text == "full") return HeightClass::Full;
  if (text == "waist") return HeightClass::Waist;
  if (text == "overhead") return HeightClass::Overhead;
  throw SceneError("unknown height_class '" + text + "'");
}

Scene scene_from_json(const json& doc) {
  Scene scene;
  try {
    scene.name = doc.at("name").get<std::string>();
    for (const auto& w : doc.at("walls")) {
      scene.walls.push_back(Wall{{w.at("x0").get<double>(), w.at("y0").get<double>()},
                                 {w.at("x1").get<double>(), w.at("y1").get<double>()},
                                 parse_height_class(w.value("height_class", "full"))});
    }
    const json& start = doc.at("start");
    scene.start.x = start.at("x").get<double>();
    scene.start.y = start.at("y").get<double>();
    if (start.contains("heading_deg")) {
      scene.start.heading = start.at("heading_deg").get<double>() * std::numbers::pi / 180.0;
    } else {
      scene.start.heading = start.value("heading", 0.0);
    }
    scene.goal = rect_from_json(doc.at("goal"));
    scene.bounds = doc.contains("bounds") ? rect_from_json(doc.at("bounds")) : derive_bounds(scene);
  } catch (const json::exception& e) {
    throw SceneError(std::string("malformed scene document: ") + e.what());
  }
  validate_scene(scene);
  return scene;
}

json to_json(const Scene& scene) {
  json walls = json::array();
  for (const auto& w : scene.walls) {
    walls.push_back(json{{"x0", w.a.x},
                         {"y0", w.a.y},
                         {"x1", w.b.x},
                         {"y1", w.b.y},
                         {"height_class", to_string(w.height_class)}});
  }
  return json{{"name", scene.name},
              {"walls", std::move(walls)},
              {"start", {{"x", scene.start.x}, {"y", scene.start.y}, {"heading", scene.start.heading}}},
              {"goal", to_json(scene.goal)},
              {"bounds", to_json(scene.bounds)}};
}

Scene read_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open scene file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw SceneError(path.string() + ": " + e.what());
  }
  return scene_from_json(doc);
}

json tick_to_json(const TickRecord& tick) {
  return json{{"kind", "tick"},
              {"t_ms", tick.t_ms},
              {"pose", {{"x", tick.state.x}, {"y", tick.state.y}, {"heading", tick.state.heading}}},
              {"collided", tick.state.collided},
              {"grid", tick.grid.values()}};
}

json summary_to_json(const SessionLog& log, const RunLabels& labels) {
  json doc{{"kind", "summary"},
           {"mode", "navigate"},
           {"scene", log.scene_name},
           {"ticks", log.ticks.size()},
           {"did_not_finish", !log.finished()},
           {"completion_time_s", nullptr},
           {"collision_count", log.collision_count}};
  if (log.completion_time_s) doc["completion_time_s"] = *log.completion_time_s;
  if (labels.person) doc["person"] = *labels.person;
  if (labels.run) doc["run"] = *labels.run;
  return doc;
}

void write_session_log(std::ostream& out, const SessionLog& log, const RunLabels& labels) {
  for (const auto& tick : log.ticks) out << tick_to_json(tick).dump() << '\n';
  out << summary_to_json(log, labels).dump() << '\n';
}

std::vector<ScriptedController::Segment> script_from_json(const json& doc) {
  std::vector<ScriptedController::Segment> script;
  try {
    for (const auto& entry : doc.at("commands")) {
      ScriptedController::Segment seg;
      seg.command.forward = unit_command(entry, "forward");
      seg.command.turn = unit_command(entry, "turn");
      seg.ticks = entry.at("ticks").get<int>();
      if (seg.ticks < 0) throw SceneError("script: 'ticks' must be non-negative");
      script.push_back(seg);
    }
  } catch (const json::exception& e) {
    throw SceneError(std::string("malformed script document: ") + e.what());
  }
  return script;
}

std::vector<ScriptedController::Segment> read_script_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open script file " + path.string());
  try {
    return script_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw SceneError(path.string() + ": " + e.what());
  }
}

}  // namespace tactile::sim
