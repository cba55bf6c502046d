#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "archevo/io.hpp"
#include "fixtures.hpp"

using namespace archevo;
using namespace fixture;

namespace {

namespace fs = std::filesystem;

const fs::path kBinary = ARCHEVO_CLI_PATH;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("archevo_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Result {
  int code;
  std::string output;
};

Result run(const std::string& args, const fs::path& dir) {
  const auto out = dir / "console.txt";
  const std::string cmd = kBinary.string() + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), read_file(out)};
}

std::string model_arg() { return (data_dir() / "minilib.json").string(); }

}  // namespace

TEST_CASE("run writes archive, statistics and summary") {
  const auto dir = scratch("run");
  const auto r = run("run --model " + model_arg() + " --seed 42 --evaluations 1500 --out " + (dir / "out").string(), dir);
  CHECK(r.code == 0);
  for (const char* f : {"archive.json", "stats.jsonl", "summary.json"}) CHECK(fs::exists(dir / "out" / f));
  const Json summary = Json::parse(read_file(dir / "out" / "summary.json"));
  CHECK(summary["seed"] == 42);
  const Json archive = Json::parse(read_file(dir / "out" / "archive.json"));
  CHECK(archive["size"].get<std::size_t>() == archive["members"].size());
}

TEST_CASE("scripted runs are deterministic and replayable") {
  const auto dir = scratch("scripted");
  write_file(dir / "nc4.json", R"({"policy":"fixed_nc","n":4,"likert":5})");
  const std::string base = "scripted --model " + model_arg() + " --policy " + (dir / "nc4.json").string() +
                           " --seed 7 --evaluations 1500 --out ";
  REQUIRE(run(base + (dir / "a").string(), dir).code == 0);
  REQUIRE(run(base + (dir / "b").string(), dir).code == 0);
  const auto a = read_file(dir / "a" / "archive.json");
  CHECK(a == read_file(dir / "b" / "archive.json"));
  CHECK(fs::exists(dir / "a" / "events.jsonl"));

  const auto replay = run("replay --log " + (dir / "a" / "events.jsonl").string() + " --seed 7 --out " +
                              (dir / "replayed.json").string(),
                          dir);
  CHECK(replay.code == 0);
  CHECK(read_file(dir / "replayed.json") == a);
  const auto mismatch = run("replay --log " + (dir / "a" / "events.jsonl").string() + " --seed 8", dir);
  CHECK(mismatch.code == 2);
}

TEST_CASE("validate reports problems with exit code 2") {
  const auto dir = scratch("validate");
  const auto ok = run("validate " + model_arg() + " --reference " + (data_dir() / "minilib_reference.json").string(), dir);
  CHECK(ok.code == 0);
  CHECK(ok.output.find("14 classes") != std::string::npos);

  Json m = Json::parse(read_file(data_dir() / "minilib.json"));
  m["relationships"][0]["target"] = "Ghost";
  const std::string rid = m["relationships"][0]["id"];
  write_file(dir / "dangling.json", m.dump());
  const auto bad = run("validate " + (dir / "dangling.json").string(), dir);
  CHECK(bad.code == 2);
  CHECK(bad.output.find(rid) != std::string::npos);

  write_file(dir / "broken.json", "{\"classes\": [");
  CHECK(run("validate " + (dir / "broken.json").string(), dir).code == 2);
}

TEST_CASE("usage errors exit with 1") {
  const auto dir = scratch("usage");
  CHECK(run("frobnicate", dir).code == 1);
  CHECK(run("run --model " + model_arg() + " --out x --bogus", dir).code == 1);
  CHECK(run("run --out x", dir).code == 1);
  CHECK(run("--help", dir).code == 0);
}

TEST_CASE("generate echoes its settings") {
  const auto dir = scratch("generate");
  const auto r = run("generate --classes 4 --as 3 --navigable 1 --seed 7 --out " + (dir / "g.json").string(), dir);
  REQUIRE(r.code == 0);
  const auto m = parse_model(read_file(dir / "g.json"));
  CHECK(m.class_count() == 4);
  CHECK(m.relationships().size() == 3);
  run("generate --classes 4 --as 3 --navigable 1 --seed 7 --out " + (dir / "h.json").string(), dir);
  CHECK(read_file(dir / "g.json") == read_file(dir / "h.json"));
  CHECK(run("generate --classes 1", dir).code == 2);
}

TEST_CASE("experiment subcommand") {
  const auto dir = scratch("experiment");
  write_file(dir / "spec.json", R"({"instances": [{"name": "mini", "model": ")" + model_arg() +
                                    R"("}], "algorithms": ["bmoea"], "seeds": [1, 2],
                                    "config": {"population_size": 30, "max_evaluations": 600}})");
  const auto r = run("experiment --spec " + (dir / "spec.json").string() + " --out " + (dir / "out").string(), dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "report.json"));
  CHECK(fs::exists(dir / "out" / "report.csv"));
}
