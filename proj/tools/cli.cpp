#include "cli.hpp"

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <pthread.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "tactile/depth_io.hpp"
#include "tactile/haptic_map.hpp"
#include "tactile/log_scoring.hpp"
#include "tactile/pattern_io.hpp"
#include "tactile/pattern_lab.hpp"
#include "tactile/run_summary.hpp"
#include "tactile/scene_io.hpp"
#include "tactile/scene_sim.hpp"
#include "tactile/server.hpp"
#include "tactile/session_engine.hpp"
#include "tactile/sleeve_wire.hpp"

namespace tactile::cli {

using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  bool json = false;
};

haptic::MappingConfig load_mapping(const Globals& g) {
  if (g.config_path.empty()) return haptic::MappingConfig::indoor();
  return haptic::read_config_file(g.config_path);
}

json grid_rows(const MotorGrid& grid) {
  json rows = json::array();
  for (int r = 0; r < kGridSide; ++r) {
    json row = json::array();
    for (int c = 0; c < kGridSide; ++c) row.push_back(grid.at(r, c));
    rows.push_back(row);
  }
  return rows;
}

void print_grid(std::ostream& out, const MotorGrid& grid) {
  for (int r = 0; r < kGridSide; ++r) {
    for (int c = 0; c < kGridSide; ++c) {
      if (c > 0) out << ' ';
      out << std::setw(4) << grid.at(r, c);
    }
    out << '\n';
  }
}

std::string motor_set(const patterns::Step& step) {
  std::string text = "{";
  for (std::size_t i = 0; i < step.size(); ++i) {
    if (i > 0) text += ",";
    text += std::to_string(step[i].motor);
  }
  return text + "}";
}

// map ------------------------------------------------------------------------

struct MapArgs {
  std::string input;
  bool wire_hex = false;
  int seq = 0;
};

int cmd_map(const Globals& g, const MapArgs& a, std::ostream& out, std::ostream& err) {
  haptic::MappingConfig config;
  try {
    config = load_mapping(g);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  haptic::DepthFrame frame;
  try {
    frame = haptic::read_pgm_file(a.input);
  } catch (const haptic::IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const haptic::PgmFormatError& e) {
    err << "error: malformed PGM: " << e.what() << '\n';
    return kExitMalformedPgm;
  }
  MotorGrid grid;
  try {
    grid = haptic::process_frame(frame, config);
  } catch (const haptic::FrameTooSmall& e) {
    err << "error: " << e.what() << '\n';
    return kExitFrameTooSmall;
  }
  const auto frame_octets = wire::encode_wireframe(grid, static_cast<std::uint8_t>(a.seq));
  if (g.json) {
    json doc{{"grid", grid_rows(grid)}};
    if (a.wire_hex) doc["wire"] = wire::to_hex(frame_octets);
    out << doc.dump() << '\n';
  } else {
    print_grid(out, grid);
    if (a.wire_hex) out << wire::to_hex(frame_octets) << '\n';
  }
  return kExitOk;
}

// pattern --------------------------------------------------------------------

int cmd_pattern_list(const Globals& g, std::ostream& out) {
  const auto& catalog = patterns::builtin_patterns();
  if (g.json) {
    json doc = json::array();
    for (const auto& p : catalog) {
      const auto cls = patterns::classify(p);
      doc.push_back({{"id", p.id},
                     {"name", p.name},
                     {"simultaneity", patterns::to_string(cls.simultaneity)},
                     {"axis", patterns::to_string(cls.axis)},
                     {"direction", patterns::to_string(p.direction)},
                     {"steps", p.steps.size()}});
    }
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  for (const auto& p : catalog) {
    const auto cls = patterns::classify(p);
    out << std::left << std::setw(5) << p.id << std::setw(16)
        << patterns::to_string(cls.simultaneity) << std::setw(12) << patterns::to_string(cls.axis)
        << p.name << '\n';
  }
  out << std::right;
  return kExitOk;
}

const patterns::Pattern* lookup(const std::string& id, std::ostream& err) {
  const auto* p = patterns::find_pattern(patterns::builtin_patterns(), id);
  if (p == nullptr) err << "error: unknown pattern '" << id << "'\n";
  return p;
}

int cmd_pattern_show(const Globals& g, const std::string& id, std::ostream& out,
                     std::ostream& err) {
  const auto* p = lookup(id, err);
  if (p == nullptr) return kExitUsage;
  const auto cls = patterns::classify(*p);
  if (g.json) {
    json doc = patterns::to_json(*p);
    doc["simultaneity"] = patterns::to_string(cls.simultaneity);
    doc["axis"] = patterns::to_string(cls.axis);
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  out << p->id << ' ' << p->name << '\n'
      << "class " << patterns::to_string(cls.simultaneity) << ' ' << patterns::to_string(cls.axis)
      << ", direction " << patterns::to_string(p->direction) << ", " << p->steps.size()
      << " steps of " << p->step_ms << " ms\n";
  for (std::size_t i = 0; i < p->steps.size(); ++i) {
    out << std::setw(3) << i + 1 << "  " << motor_set(p->steps[i]) << '\n';
  }
  return kExitOk;
}

int cmd_pattern_export(const std::string& id, const std::string& out_path, std::ostream& out,
                       std::ostream& err) {
  const auto* p = lookup(id, err);
  if (p == nullptr) return kExitUsage;
  const std::string text = patterns::to_json(*p).dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
    return kExitOk;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!(file << text)) {
    err << "error: cannot write " << out_path << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_pattern_import(const Globals& g, const std::string& path, std::ostream& out,
                       std::ostream& err) {
  patterns::Pattern p;
  try {
    p = patterns::read_pattern_file(path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const auto cls = patterns::classify(p);
  const auto* builtin = patterns::find_pattern(patterns::builtin_patterns(), p.id);
  const bool identical = builtin != nullptr && patterns::normalized(*builtin) == patterns::normalized(p);
  if (g.json) {
    out << json{{"id", p.id},
                {"steps", p.steps.size()},
                {"simultaneity", patterns::to_string(cls.simultaneity)},
                {"axis", patterns::to_string(cls.axis)},
                {"matches_builtin", identical}}
               .dump()
        << '\n';
  } else {
    out << p.id << ": " << p.steps.size() << " steps, " << patterns::to_string(cls.simultaneity)
        << ' ' << patterns::to_string(cls.axis)
        << (identical ? ", identical to the built-in pattern" : "") << '\n';
  }
  return kExitOk;
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  std::string scene;
  std::string controller = "greedy";
  std::string script;
  std::string out_path;
  double tick_hz = 6.0;
  double budget_s = 600.0;
  int threshold = sim::GreedyPolicy{}.center_threshold;
  std::optional<int> dump_tick;
  std::string dump_pgm;
  std::optional<std::string> person;
  std::optional<int> run;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  sim::Scene scene;
  haptic::MappingConfig config;
  std::unique_ptr<sim::Controller> controller;
  try {
    config = load_mapping(g);
    scene = sim::read_scene_file(a.scene);
    if (!a.script.empty() || a.controller == "script") {
      if (a.script.empty()) throw std::invalid_argument("--controller script needs --script PATH");
      controller = std::make_unique<sim::ScriptedController>(sim::read_script_file(a.script));
    } else if (a.controller == "greedy") {
      const sim::GreedyPolicy policy{a.threshold};
      controller = std::make_unique<sim::PolicyController>(
          [policy](const MotorGrid& grid) { return sim::greedy_policy(grid, policy); });
    } else {
      throw std::invalid_argument("unknown controller '" + a.controller + "'");
    }
    if (!(a.tick_hz > 0.0) || !(a.budget_s > 0.0)) {
      throw std::invalid_argument("--tick-hz and --budget-s must be positive");
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  sim::SessionParams params;
  params.tick_hz = a.tick_hz;
  params.budget_s = a.budget_s;
  std::optional<haptic::DepthFrame> dumped;
  if (a.dump_tick) {
    params.frame_observer = [&dumped, want = *a.dump_tick](int tick, const haptic::DepthFrame& f) {
      if (tick == want) dumped = f;
    };
  }
  const sim::SessionLog log = sim::run_session(scene, config, sim::CameraModel{}, *controller, params);

  if (a.dump_tick) {
    if (!dumped) {
      err << "warning: session ended before tick " << *a.dump_tick << ", nothing dumped\n";
    } else if (!a.dump_pgm.empty()) {
      try {
        haptic::write_pgm_file(a.dump_pgm, *dumped);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
      }
    }
  }

  const sim::RunLabels labels{a.person, a.run};
  if (a.out_path.empty()) {
    sim::write_session_log(out, log, labels);
  } else {
    std::ofstream file(a.out_path, std::ios::binary);
    sim::write_session_log(file, log, labels);
    if (!file) {
      err << "error: cannot write " << a.out_path << '\n';
      return kExitUsage;
    }
  }
  if (log.finished()) {
    err << scene.name << ": finished in " << *log.completion_time_s << " s, "
        << log.collision_count << " collisions\n";
    return kExitOk;
  }
  err << scene.name << ": did not finish within " << a.budget_s << " s\n";
  return kExitDidNotFinish;
}

// score ----------------------------------------------------------------------

json run_summary_json(const service::RunSummary& s) {
  json persons = json::array();
  for (const auto& p : s.persons) persons.push_back({{"person", p.person}, {"seconds", p.seconds}});
  return json{{"persons", persons},
              {"mean_s", s.mean_s},
              {"mean_rounded_s", s.mean_rounded_s},
              {"percent_of_first", s.percent_of_first}};
}

int cmd_score(const Globals& g, const std::string& dir, std::ostream& out, std::ostream& err) {
  if (!std::filesystem::is_directory(dir)) {
    err << "error: " << dir << " is not a directory\n";
    return kExitUsage;
  }
  service::ScoreReport report;
  try {
    report = service::score_logs(dir, patterns::builtin_patterns());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  if (g.json) {
    out << json{{"runs", report.runs ? run_summary_json(*report.runs) : json(nullptr)},
                {"trials", report.trial_count},
                {"accuracy", patterns::to_json(report.accuracy)}}
               .dump(2)
        << '\n';
    return kExitOk;
  }
  out << "completion times\n";
  if (report.runs) {
    out << service::format_run_summary(*report.runs);
  } else {
    out << "(no labelled navigation runs)\n";
  }
  out << "\npattern trials: " << report.trial_count << '\n';
  if (!report.accuracy.empty()) out << service::format_accuracy(report.accuracy);
  return kExitOk;
}

// serve ----------------------------------------------------------------------

struct ServeArgs {
  int port = 8765;
  std::string bind = "0.0.0.0";
  std::string scenes = "scenes";
  bool debug_pose = false;
  std::string wire_sink;
  double speed = 1.0;
  double tick_hz = 6.0;
  double budget_s = 600.0;
  int threads = 2;
};

int cmd_serve(const Globals& g, const ServeArgs& a, std::ostream& out, std::ostream& err) {
  // Signals are taken synchronously by this thread; block them before the
  // worker threads start so that they inherit the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    service::ServerOptions options;
    options.bind_address = a.bind;
    options.port = static_cast<std::uint16_t>(a.port);
    options.speed = a.speed;
    options.threads = a.threads;
    options.engine.debug_pose = a.debug_pose;
    options.engine.default_tick_hz = a.tick_hz;
    options.engine.default_budget_s = a.budget_s;
    options.engine.mapping = load_mapping(g);

    auto catalogs = service::load_catalogs(a.scenes, patterns::builtin_patterns());
    service::LogStore store(service::default_data_dir());
    std::unique_ptr<service::WireSink> sink;
    if (!a.wire_sink.empty()) sink = std::make_unique<service::WireSink>(a.wire_sink);

    service::Server server(options, catalogs, store, sink.get());
    server.start();
    out << "listening on port " << server.port() << " (" << catalogs->scenes.size()
        << " scenes, log " << store.file().string() << ")" << std::endl;

    int received = 0;
    sigwait(&signals, &received);
    out << "shutting down" << std::endl;
    server.stop();
    server.wait();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth-to-vibration sleeve toolkit", "tactile"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Mapping config file (key = value)");
  app.add_flag("--json", g.json, "Machine-readable output");

  MapArgs map_args;
  auto* map = app.add_subcommand("map", "Map a 16-bit PGM depth frame to a motor grid");
  map->add_option("input", map_args.input, "Depth frame (binary PGM, millimeters)")->required();
  map->add_flag("--wire-hex,--hex", map_args.wire_hex, "Also print the encoded wire frame");
  map->add_option("--seq", map_args.seq, "Wire frame sequence number")->check(CLI::Range(0, 255));

  auto* pattern = app.add_subcommand("pattern", "Inspect the vibration pattern catalog");
  pattern->require_subcommand(1);
  auto* list = pattern->add_subcommand("list", "List pattern ids with their class");
  std::string pattern_id;
  std::string export_out;
  std::string import_path;
  auto* show = pattern->add_subcommand("show", "Print a pattern's steps");
  show->add_option("id", pattern_id)->required();
  auto* exp = pattern->add_subcommand("export", "Write a pattern as JSON");
  exp->add_option("id", pattern_id)->required();
  exp->add_option("--out,-o", export_out, "Output file instead of stdout");
  auto* imp = pattern->add_subcommand("import", "Validate and classify a pattern JSON file");
  imp->add_option("path", import_path)->required();

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Run a headless navigation session");
  simulate->add_option("scene", sim_args.scene, "Scene JSON")->required();
  simulate->add_option("--controller", sim_args.controller, "greedy or script");
  simulate->add_option("--script", sim_args.script, "Command script JSON");
  simulate->add_option("--out,-o", sim_args.out_path, "Write the session log here");
  simulate->add_option("--tick-hz", sim_args.tick_hz);
  simulate->add_option("--budget-s", sim_args.budget_s);
  simulate->add_option("--threshold", sim_args.threshold, "Greedy center-column threshold");
  simulate->add_option("--dump-tick", sim_args.dump_tick, "Capture the depth frame of this tick");
  simulate->add_option("--dump-pgm", sim_args.dump_pgm, "PGM path for --dump-tick");
  simulate->add_option("--person", sim_args.person, "Label the summary with a person");
  simulate->add_option("--run", sim_args.run, "Label the summary with a run number");

  std::string score_dir;
  auto* score = app.add_subcommand("score", "Summarize a directory of JSONL logs");
  score->add_option("dir", score_dir)->required();

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the session service");
  serve->add_option("--port", serve_args.port)->check(CLI::Range(0, 65535));
  serve->add_option("--bind", serve_args.bind);
  serve->add_option("--scenes", serve_args.scenes, "Directory of scene JSON files");
  serve->add_flag("--debug-pose", serve_args.debug_pose, "Include the agent pose in ticks");
  serve->add_option("--wire-sink", serve_args.wire_sink, "host:port receiving wire frames");
  serve->add_option("--speed", serve_args.speed, "Session clock speed-up factor");
  serve->add_option("--tick-hz", serve_args.tick_hz);
  serve->add_option("--budget-s", serve_args.budget_s);
  serve->add_option("--threads", serve_args.threads)->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << '\n';
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << "run 'tactile --help' for usage\n";
    return kExitUsage;
  }

  if (*map) return cmd_map(g, map_args, out, err);
  if (*pattern) {
    if (*list) return cmd_pattern_list(g, out);
    if (*show) return cmd_pattern_show(g, pattern_id, out, err);
    if (*exp) return cmd_pattern_export(pattern_id, export_out, out, err);
    if (*imp) return cmd_pattern_import(g, import_path, out, err);
  }
  if (*simulate) return cmd_simulate(g, sim_args, out, err);
  if (*score) return cmd_score(g, score_dir, out, err);
  if (*serve) return cmd_serve(g, serve_args, out, err);
  return kExitUsage;
}

}  // namespace tactile::cli
