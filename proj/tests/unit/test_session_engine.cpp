#include <gtest/gtest.h>

#include <unistd.h>

#include <fstream>

#include "generators.hpp"
#include "tactile/pattern_io.hpp"
#include "tactile/session_engine.hpp"

namespace {

using namespace tactile;
using namespace tactile::service;
using nlohmann::json;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tactile_engine_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::shared_ptr<const Catalogs> catalogs() {
  static const auto c = load_catalogs(gen::source_dir() / "scenes", patterns::builtin_patterns());
  return c;
}

struct RecordingSink : GridSink {
  std::vector<MotorGrid> grids;
  void emit(const MotorGrid& grid) override { grids.push_back(grid); }
};

std::vector<json> read_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(json::parse(line));
  return out;
}

// Fires every due deadline until `until_ms` or until the engine goes idle.
std::vector<json> run_clock(SessionEngine& engine, double until_ms) {
  std::vector<json> out;
  while (auto deadline = engine.next_deadline_ms()) {
    if (*deadline > until_ms) break;
    for (auto& m : engine.on_timer(*deadline)) out.push_back(std::move(m));
  }
  return out;
}

std::vector<json> of_type(const std::vector<json>& messages, const std::string& type) {
  std::vector<json> out;
  for (const auto& m : messages) {
    if (m.at("type") == type) out.push_back(m);
  }
  return out;
}

TEST(Catalogs, LoadsBundledScenes) {
  const auto c = catalogs();
  EXPECT_EQ(c->scenes.count("corridor"), 1U);
  EXPECT_EQ(c->scenes.count("route"), 1U);
  EXPECT_EQ(c->patterns.size(), 11U);
  EXPECT_THROW(load_catalogs(gen::fixture("five_person_runs"), {}), sim::SceneError);
}

TEST(Engine, NavigationSessionReachesGoal) {
  TempDir dir;
  LogStore store(dir.path());
  RecordingSink sink;
  EngineOptions options;
  options.debug_pose = true;
  SessionEngine engine(catalogs(), options, &store, &sink, "c1");

  auto ack = engine.handle_line(R"({"type":"start","mode":"navigate","scene":"corridor","person":"p1","run":2})", 0);
  ASSERT_EQ(ack.size(), 1U);
  EXPECT_EQ(ack[0]["type"], "start");
  EXPECT_EQ(ack[0]["session"], "c1-s1");
  EXPECT_EQ(ack[0]["tick_hz"], 6.0);
  EXPECT_TRUE(engine.session_active());
  EXPECT_EQ(engine.next_deadline_ms(), 0.0);
  EXPECT_TRUE(engine.handle_line(R"({"type":"cmd","forward":1,"turn":0})", 0).empty());

  auto first = engine.on_timer(0);
  ASSERT_EQ(first.size(), 1U);
  EXPECT_EQ(first[0]["type"], "tick");
  EXPECT_EQ(first[0]["grid"].size(), 25U);
  EXPECT_EQ(first[0]["pose"]["x"], 0.0);

  const auto rest = run_clock(engine, 60000);
  const auto summaries = of_type(rest, "summary");
  ASSERT_EQ(summaries.size(), 1U);
  const auto& s = summaries[0];
  EXPECT_EQ(s["did_not_finish"], false);
  EXPECT_GE(s["completion_time_s"].get<double>(), 10.0);
  EXPECT_LE(s["completion_time_s"].get<double>(), 10.0 + 1.0 / 6.0 + 1e-9);
  EXPECT_EQ(s["collision_count"], 0);
  EXPECT_EQ(s["aborted"], false);
  EXPECT_EQ(s["person"], "p1");
  EXPECT_FALSE(engine.session_active());
  EXPECT_EQ(sink.grids.size(), of_type(rest, "tick").size() + 1);

  const auto records = read_jsonl(store.file());
  ASSERT_GE(records.size(), 3U);
  EXPECT_EQ(records.front()["kind"], "start");
  EXPECT_EQ(records.front()["person"], "p1");
  EXPECT_EQ(records.back()["kind"], "summary");
  EXPECT_EQ(records.back()["run"], 2);
  for (const auto& r : records) EXPECT_EQ(r["session"], "c1-s1");
}

TEST(Engine, InactivityEndsAsDidNotFinish) {
  SessionEngine engine(catalogs(), EngineOptions{}, nullptr, nullptr, "c1");
  engine.handle_line(R"({"type":"start","mode":"navigate","scene":"route","budget_s":2,"tick_hz":6})", 0);
  const auto out = run_clock(engine, 1e9);
  EXPECT_EQ(of_type(out, "tick").size(), 13U);
  const auto summary = of_type(out, "summary");
  ASSERT_EQ(summary.size(), 1U);
  EXPECT_EQ(summary[0]["did_not_finish"], true);
  EXPECT_TRUE(summary[0]["completion_time_s"].is_null());
  EXPECT_FALSE(engine.next_deadline_ms().has_value());
}

TEST(Engine, LateTimerCatchesUpInOrder) {
  SessionEngine engine(catalogs(), EngineOptions{}, nullptr, nullptr, "c1");
  engine.handle_line(R"({"type":"start","mode":"navigate","scene":"route","budget_s":10})", 0);
  const auto out = engine.on_timer(1000);
  ASSERT_EQ(out.size(), 7U);
  for (std::size_t k = 0; k < out.size(); ++k) EXPECT_EQ(out[k]["t_ms"], std::llround(k * 1000.0 / 6.0));
}

TEST(Engine, PatternSessionWithElevenAnswers) {
  TempDir dir;
  LogStore store(dir.path());
  SessionEngine engine(catalogs(), EngineOptions{}, &store, nullptr, "c9");
  const auto ack = engine.handle_line(R"({"type":"start","mode":"pattern","person":"p3"})", 0);
  EXPECT_EQ(ack[0]["total"], 11);

  double now = 0;
  std::vector<json> last;
  for (const auto& p : patterns::builtin_patterns()) {
    const auto ticks = run_clock(engine, now + 60000);
    ASSERT_EQ(ticks.size(), patterns::schedule(p).size()) << p.id;
    EXPECT_EQ(ticks.front()["pattern_id"], p.id);
    EXPECT_EQ(ticks.back()["final"], true);
    EXPECT_EQ(ticks.back()["grid"], json(MotorGrid{}.values()));
    now += 30000;
    json answer{{"type", "answer"},
                {"pattern_id", p.id},
                {"direction", patterns::to_string(p.direction)},
                {"simultaneity", patterns::to_string(patterns::classify(p).simultaneity)}};
    last = engine.handle_line(answer.dump(), now);
    ASSERT_GE(last.size(), 1U);
    EXPECT_EQ(last[0]["type"], "answer");
    EXPECT_EQ(last[0]["accepted"], true);
  }
  ASSERT_EQ(last.size(), 2U);
  const auto& summary = last[1];
  EXPECT_EQ(summary["type"], "summary");
  EXPECT_EQ(summary["answered"], 11);
  EXPECT_EQ(summary["aborted"], false);
  for (const auto& [cls, shares] : summary["accuracy"]["by_simultaneity"].items()) {
    EXPECT_EQ(shares["correct_pct"], 100.0) << cls;
  }
  EXPECT_FALSE(engine.session_active());

  int trials = 0;
  for (const auto& r : read_jsonl(store.file())) {
    if (r["kind"] == "trial") {
      ++trials;
      EXPECT_EQ(r["verdict"], "Correct");
      EXPECT_TRUE(patterns::is_iso8601(r["timestamp"].get<std::string>()));
    }
  }
  EXPECT_EQ(trials, 11);
}

TEST(Engine, AnswerWithoutCountIsPartial) {
  SessionEngine engine(catalogs(), EngineOptions{}, nullptr, nullptr, "c1");
  engine.handle_line(R"({"type":"start","mode":"pattern"})", 0);
  auto out = engine.handle_line(R"({"type":"answer","pattern_id":"P1","direction":"RowSweep","simultaneity":null})", 5);
  ASSERT_EQ(out.size(), 1U);
  out = engine.handle_line(R"({"type":"end"})", 6);
  ASSERT_EQ(out.size(), 1U);
  EXPECT_EQ(out[0]["aborted"], true);
  EXPECT_EQ(out[0]["trials"][0]["verdict"], "PartiallyCorrect");
  EXPECT_TRUE(out[0]["trials"][0]["answer_simultaneity"].is_null());
}

TEST(Engine, ErrorsLeaveSessionIntact) {
  SessionEngine engine(catalogs(), EngineOptions{}, nullptr, nullptr, "c1");
  auto expect_error = [&engine](const std::string& line) {
    const auto out = engine.handle_line(line, 0);
    ASSERT_EQ(out.size(), 1U) << line;
    EXPECT_EQ(out[0]["type"], "error") << line;
  };
  expect_error("{not json");
  expect_error("[1,2]");
  expect_error(R"({"mode":"navigate"})");
  expect_error(R"({"type":"dance"})");
  expect_error(R"({"type":"cmd","forward":1})");
  expect_error(R"({"type":"end"})");
  expect_error(R"({"type":"start","mode":"navigate","scene":"moon"})");
  expect_error(R"({"type":"start","mode":"swim"})");
  expect_error(R"({"type":"start","mode":"navigate","scene":"route","tick_hz":0})");
  EXPECT_FALSE(engine.session_active());

  engine.handle_line(R"({"type":"start","mode":"navigate","scene":"route"})", 0);
  expect_error(R"({"type":"start","mode":"navigate","scene":"route"})");
  expect_error(R"({"type":"cmd","forward":2})");
  expect_error(R"({"type":"cmd","turn":"left"})");
  expect_error(R"({"type":"answer","pattern_id":"P1","direction":"RowSweep"})");
  EXPECT_TRUE(engine.session_active());
  EXPECT_EQ(engine.on_timer(0).size(), 1U);
}

TEST(Engine, FuzzedLinesNeverBreakTheSession) {
  gen::Rng rng(0x5eed0601);
  SessionEngine engine(catalogs(), EngineOptions{}, nullptr, nullptr, "c1");
  engine.handle_line(R"({"type":"start","mode":"navigate","scene":"route","budget_s":5})", 0);
  const std::vector<std::string> pieces = {"{", "}", "\"type\"", ":", "\"cmd\"", ",", "\"forward\"", "1", "-1",
                                           "2", "null", "[", "]", "\"answer\"", "\"end\"", "\xff", "\"start\""};
  double now = 0;
  std::size_t ticks = 0;
  for (int i = 0; i < 3000; ++i) {
    std::string line;
    const int n = gen::uniform_int(rng, 0, 12);
    for (int k = 0; k < n; ++k) line += pieces[static_cast<std::size_t>(gen::uniform_int(rng, 0, static_cast<int>(pieces.size()) - 1))];
    if (line.find("end") != std::string::npos) continue;
    ASSERT_NO_THROW(engine.handle_line(line, now));
    ASSERT_TRUE(engine.session_active());
    now += 1.0;
    ticks += of_type(engine.on_timer(now), "tick").size();
  }
  std::size_t due = 0;
  while (sim::tick_time_ms(static_cast<int>(due), 6.0) <= now) ++due;
  EXPECT_EQ(ticks, due);
  EXPECT_GT(due, 5U);
}

TEST(Engine, EnginesAreIsolated) {
  SessionEngine a(catalogs(), EngineOptions{}, nullptr, nullptr, "c1");
  SessionEngine b(catalogs(), EngineOptions{}, nullptr, nullptr, "c2");
  a.handle_line(R"({"type":"start","mode":"navigate","scene":"corridor"})", 0);
  EXPECT_FALSE(b.session_active());
  EXPECT_EQ(b.handle_line(R"({"type":"cmd","forward":1})", 0)[0]["type"], "error");
  b.handle_line(R"({"type":"start","mode":"pattern"})", 0);
  EXPECT_EQ(a.session_id(), "c1-s1");
  EXPECT_EQ(b.session_id(), "c2-s1");
  EXPECT_EQ(a.on_timer(0)[0].count("pattern_id"), 0U);
  EXPECT_EQ(b.on_timer(0)[0]["pattern_id"], "P1");
}

TEST(Engine, AbortLogsSummary) {
  TempDir dir;
  LogStore store(dir.path());
  {
    SessionEngine engine(catalogs(), EngineOptions{}, &store, nullptr, "c1");
    engine.handle_line(R"({"type":"start","mode":"navigate","scene":"route"})", 0);
    engine.on_timer(500);
    engine.abort(600);
    EXPECT_FALSE(engine.session_active());
  }
  const auto records = read_jsonl(store.file());
  ASSERT_FALSE(records.empty());
  EXPECT_EQ(records.back()["kind"], "summary");
  EXPECT_EQ(records.back()["aborted"], true);
  EXPECT_EQ(records.back()["did_not_finish"], true);
}

TEST(Engine, SequentialSessionsGetNewIds) {
  SessionEngine engine(catalogs(), EngineOptions{}, nullptr, nullptr, "c4");
  engine.handle_line(R"({"type":"start","mode":"navigate","scene":"route"})", 0);
  engine.handle_line(R"({"type":"end"})", 1);
  const auto ack = engine.handle_line(R"({"type":"start","mode":"pattern"})", 2);
  EXPECT_EQ(ack[0]["session"], "c4-s2");
}

}  // namespace
