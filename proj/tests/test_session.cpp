#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "archevo/errors.hpp"
#include "archevo/session_log.hpp"
#include "fixtures.hpp"

using namespace archevo;
using namespace fixture;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("archevo_session_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

PolicySpec nc4() { return policy_from_json(Json::parse(R"({"policy":"fixed_nc","n":4,"likert":5})")); }

PolicySpec busy() {
  return policy_from_json(Json::parse(
      R"({"policy":"target_architecture","reference":[["Catalog","Book","Author","Publisher"],["Member","Account","Address"],
                       ["Loan","LoanPolicy","Fine"],["Notifier","EmailNotifier","Message","Template"]],
          "likert":3,"actions":{"archive_first":true,"remove_last":true,"freeze_first_component":true}})"));
}

std::vector<std::string> lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& ls) {
  std::ofstream out(p);
  for (const auto& l : ls) out << l << '\n';
}

}  // namespace

TEST_CASE("event log appends in order with monotone times") {
  const auto dir = scratch("log");
  EventLog log(dir / "x.jsonl");
  for (int i = 0; i < 5; ++i) CHECK(log.append("gen_stats", OrderedJson{{"i", i}}) == static_cast<std::size_t>(i));
  const auto all = log.since(0);
  REQUIRE(all.size() == 5);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i].time_ms >= all[i - 1].time_ms);
  CHECK(log.since(3).size() == 2);
  CHECK(log.since(9).empty());
  const auto file = read_event_file(dir / "x.jsonl");
  REQUIRE(file.size() == 5);
  CHECK(file[4]["payload"]["i"] == 4);
  CHECK(file[2]["seq"] == 2);
}

TEST_CASE("recorded sessions replay to identical archives") {
  const auto dir = scratch("replay");
  for (const auto& [name, policy] : {std::pair{"nc4", nc4()}, std::pair{"busy", busy()}}) {
    for (std::uint64_t seed : {1u, 2u}) {
      const auto path = dir / (std::string(name) + std::to_string(seed) + ".jsonl");
      EngineConfig cfg = quick_config(seed, 1500, 40);
      std::string archive;
      {
        EventLog log(path);
        archive = record_scripted_session(minilib(), cfg, policy, log, 10).archive;
      }
      const auto records = read_event_file(path);
      const auto session = parse_session_log(records);
      CHECK(session.bundles.size() == 3);
      CHECK(session.finish_reason == std::optional<std::string>{"completed"});
      CHECK(replay_archive(session) == archive);
      CHECK(replay_archive(session, seed) == archive);
      CHECK_THROWS_AS(replay_archive(session, seed + 100), ReplayError);

      std::map<std::string, int> kinds;
      for (const auto& r : records) ++kinds[r["kind"].get<std::string>()];
      CHECK(kinds["session"] == 1);
      CHECK(kinds["interaction_start"] == 3);
      CHECK(kinds["interaction_end"] == 3);
      CHECK(kinds["finished"] == 1);
      CHECK(kinds["gen_stats"] > 0);
      CHECK(kinds["preference"] == (std::string(name) == "busy" ? 9 : 3));
      if (std::string(name) == "busy") CHECK(kinds["action"] == 9);

      // No evaluations happen while a stop is open.
      std::optional<std::size_t> open;
      for (const auto& r : records) {
        if (r["kind"] == "interaction_start") open = r["payload"]["evaluations"].get<std::size_t>();
        if (r["kind"] == "interaction_end") {
          REQUIRE(open);
          CHECK(r["payload"]["evaluations"].get<std::size_t>() == *open);
        }
      }
    }
  }
}

TEST_CASE("stop_search sessions replay") {
  const auto dir = scratch("stop");
  PolicySpec p = nc4();
  p.actions.stop_at = 1;
  EngineConfig cfg = quick_config(3, 1500, 40);
  EventLog log(dir / "s.jsonl");
  const auto run = record_scripted_session(minilib(), cfg, p, log);
  CHECK(run.finish_reason == "stop_search");
  const auto session = parse_session_log(read_event_file(dir / "s.jsonl"));
  CHECK(session.bundles.size() == 2);
  CHECK(replay_archive(session) == run.archive);
}

TEST_CASE("truncated and malformed logs") {
  const auto dir = scratch("trunc");
  EngineConfig cfg = quick_config(4, 1500, 40);
  {
    EventLog log(dir / "full.jsonl");
    record_scripted_session(minilib(), cfg, nc4(), log);
  }
  const auto all = lines(dir / "full.jsonl");
  std::vector<std::string> cut;
  int ends = 0;
  for (const auto& l : all) {
    if (l.find("\"interaction_end\"") != std::string::npos && ++ends == 2) break;
    cut.push_back(l);
  }
  write_lines(dir / "cut.jsonl", cut);
  const auto session = parse_session_log(read_event_file(dir / "cut.jsonl"));
  try {
    replay_archive(session);
    FAIL("expected a replay error");
  } catch (const ReplayError& e) {
    CHECK(std::string(e.what()).find("stop 1") != std::string::npos);
  }

  auto broken = all;
  broken[3] = broken[3].substr(0, broken[3].size() / 2);
  write_lines(dir / "broken.jsonl", broken);
  CHECK_THROWS_AS(read_event_file(dir / "broken.jsonl"), ReplayError);

  std::vector<std::string> headless(all.begin() + 1, all.end());
  write_lines(dir / "headless.jsonl", headless);
  CHECK_THROWS_AS(parse_session_log(read_event_file(dir / "headless.jsonl")), ReplayError);
  CHECK_THROWS_AS(read_event_file(dir / "missing.jsonl"), ReplayError);
}

TEST_CASE("tampered feedback is rejected") {
  const auto dir = scratch("tamper");
  EngineConfig cfg = quick_config(6, 1500, 40);
  {
    EventLog log(dir / "t.jsonl");
    record_scripted_session(minilib(), cfg, nc4(), log);
  }
  auto session = parse_session_log(read_event_file(dir / "t.jsonl"));
  session.bundles[0]["feedback"][0]["solution"] = 987654321;
  CHECK_THROWS_AS(replay_archive(session), ReplayError);
}
