#include <chrono>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "archevo/service.hpp"
#include "fixtures.hpp"

using namespace archevo;
using namespace fixture;
using namespace std::chrono_literals;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("archevo_service_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

EngineConfig small_config(std::uint64_t seed) {
  EngineConfig cfg = quick_config(seed, 1500, 40);
  return cfg;
}

/// Live server on an ephemeral port for the duration of a test case.
struct LiveServer {
  explicit LiveServer(ServiceOptions o) : service(std::move(o)) {
    port = service.bind_any("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { service.listen_after_bind(); });
    for (int i = 0; i < 200 && !service.running(); ++i) std::this_thread::sleep_for(5ms);
  }
  ~LiveServer() {
    service.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(30, 0);
    return c;
  }

  Service service;
  int port = 0;
  std::thread thread;
};

Json body_of(const httplib::Result& r) {
  REQUIRE(r);
  return Json::parse(r->body);
}

std::string create_body(std::uint64_t seed) {
  Json b;
  b["model"] = Json::parse(read_file(data_dir() / "minilib.json"));
  b["config"] = Json::parse(config_to_json(small_config(seed)).dump());
  return b.dump();
}

Json wait_state(httplib::Client& c, const std::string& id, const std::string& state) {
  for (int i = 0; i < 2000; ++i) {
    const Json s = body_of(c.Get("/api/sessions/" + id));
    if (s["state"] == state) return s;
    std::this_thread::sleep_for(5ms);
  }
  FAIL("session never reached " << state);
  return {};
}

Json empty_feedback(const Json& cands) {
  Json fb;
  fb["stop"] = cands["stop"];
  fb["feedback"] = Json::array();
  for (const auto& c : cands["candidates"]) fb["feedback"].push_back({{"solution", c["uid"]}});
  return fb;
}

}  // namespace

TEST_CASE("HTTP protocol walk") {
  ServiceOptions o;
  o.data_dir = scratch("walk");
  o.stats_every = 5;
  LiveServer srv(o);
  auto c = srv.client();

  const auto created = c.Post("/api/sessions", create_body(3), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(created->get_header_value("Access-Control-Allow-Origin") == "*");
  const Json st = Json::parse(created->body);
  const std::string id = st["id"];
  CHECK(st["seed"] == 3);

  const Json listed = body_of(c.Get("/api/sessions"));
  CHECK(listed["sessions"].size() == 1);

  wait_state(c, id, "awaiting_feedback");
  const auto cand_res = c.Get("/api/sessions/" + id + "/candidates");
  CHECK(cand_res->status == 200);
  const Json cands = Json::parse(cand_res->body);
  REQUIRE(cands["candidates"].size() == 3);
  CHECK(cands["stop"] == 0);
  for (const auto& cand : cands["candidates"]) {
    CHECK(cand.contains("phenotype"));
    CHECK(cand.contains("metrics"));
    CHECK(cand.contains("objectives"));
  }

  // unshown solution
  Json bad = empty_feedback(cands);
  bad["feedback"][0]["solution"] = 987654321;
  CHECK(c.Post("/api/sessions/" + id + "/feedback", bad.dump(), "application/json")->status == 422);
  // malformed bodies
  CHECK(c.Post("/api/sessions/" + id + "/feedback", "{not json", "application/json")->status == 400);
  CHECK(c.Post("/api/sessions/" + id + "/feedback", "", "application/json")->status == 400);
  CHECK(c.Post("/api/sessions/" + id + "/feedback", R"({"stop":0})", "application/json")->status == 400);
  // invalid preference payload
  Json badpref = empty_feedback(cands);
  badpref["feedback"][0]["preference"] = {{"kind", "number_of_components"}, {"payload", {{"n", 40}}}, {"confidence", 3}};
  CHECK(c.Post("/api/sessions/" + id + "/feedback", badpref.dump(), "application/json")->status == 422);
  // unknown session
  CHECK(c.Get("/api/sessions/ffffffffffffffff")->status == 404);
  CHECK(c.Post("/api/sessions/ffffffffffffffff/stop", "", "application/json")->status == 404);
  CHECK(c.Post("/api/sessions", R"({"model": 3})", "application/json")->status == 400);

  const auto ev_before = body_of(c.Get("/api/sessions/" + id + "/events?since=0"));
  const Json good = empty_feedback(cands);
  Json with_pref = good;
  with_pref["feedback"][0]["preference"] = {{"kind", "number_of_components"}, {"payload", {{"n", 4}}}, {"confidence", 5}};
  const auto ok = c.Post("/api/sessions/" + id + "/feedback", with_pref.dump(), "application/json");
  CHECK(ok->status == 200);
  // replaying the same bundle is either a conflict or a stale stop
  const auto again = c.Post("/api/sessions/" + id + "/feedback", with_pref.dump(), "application/json");
  CHECK((again->status == 409 || again->status == 422));

  const Json second = wait_state(c, id, "awaiting_feedback");
  CHECK(second["stops_done"] == 1);
  const Json st2 = body_of(c.Get("/api/sessions/" + id));
  CHECK(st2["evaluations"] == second["evaluations"]);

  const auto stopped = c.Post("/api/sessions/" + id + "/stop", "", "application/json");
  CHECK(stopped->status == 200);
  CHECK(Json::parse(stopped->body)["state"] == "finished");
  CHECK(c.Get("/api/sessions/" + id + "/candidates")->status == 409);
  CHECK(c.Post("/api/sessions/" + id + "/feedback", good.dump(), "application/json")->status == 409);

  const Json archive = body_of(c.Get("/api/sessions/" + id + "/archive"));
  CHECK(archive["size"].get<std::size_t>() == archive["members"].size());
  CHECK(archive["size"].get<std::size_t>() > 0);

  const Json events = body_of(c.Get("/api/sessions/" + id + "/events?since=0"));
  CHECK(events["next"].get<std::size_t>() == events["events"].size());
  CHECK(events["events"].size() > ev_before["events"].size());
  std::set<std::string> kinds;
  for (const auto& e : events["events"]) kinds.insert(e["kind"].get<std::string>());
  for (const char* k : {"session", "gen_stats", "interaction_start", "preference", "interaction_end", "finished"}) {
    CHECK(kinds.count(k) == 1);
  }
  const Json tail = body_of(c.Get("/api/sessions/" + id + "/events?since=3"));
  CHECK(tail["events"][0]["seq"] == 3);
  CHECK(c.Get("/api/sessions/" + id + "/events?since=abc")->status == 400);

  const auto opt = c.Options("/api/sessions");
  CHECK(opt->status == 204);
  CHECK(std::filesystem::exists(o.data_dir / "sessions" / (id + ".jsonl")));
}

TEST_CASE("session capacity") {
  ServiceOptions o;
  o.data_dir = scratch("cap");
  o.max_sessions = 1;
  LiveServer srv(o);
  auto c = srv.client();
  const auto first = c.Post("/api/sessions", create_body(1), "application/json");
  REQUIRE(first->status == 201);
  CHECK(c.Post("/api/sessions", create_body(2), "application/json")->status == 429);
  const std::string id = Json::parse(first->body)["id"];
  c.Post("/api/sessions/" + id + "/stop", "", "application/json");
  CHECK(c.Post("/api/sessions", create_body(2), "application/json")->status == 201);
}

TEST_CASE("idle timeout submits empty feedback") {
  ServiceOptions o;
  o.data_dir = scratch("idle");
  o.idle_timeout = 20ms;
  SessionManager mgr(o);
  auto s = mgr.create(minilib(), small_config(4));
  CHECK(s->wait_for([](SessionState st) { return st == SessionState::finished; }, 60s));
  const auto st = s->status();
  CHECK(st["stops_done"] == 3);
  CHECK(st["finish_reason"] == "completed");
}

TEST_CASE("stop_search via feedback finishes the session") {
  ServiceOptions o;
  o.data_dir = scratch("stopsearch");
  SessionManager mgr(o);
  auto s = mgr.create(minilib(), small_config(5));
  REQUIRE(s->wait_for([](SessionState st) { return st == SessionState::awaiting_feedback; }, 60s));
  Json fb = empty_feedback(Json::parse(s->candidates().dump()));
  fb["feedback"][0]["actions"] = {{"stop_search", true}};
  s->submit(fb);
  REQUIRE(s->wait_for([](SessionState st) { return st == SessionState::finished; }, 60s));
  CHECK(s->status()["finish_reason"] == "stop_search");
}

TEST_CASE("sessions are recovered from their logs") {
  ServiceOptions o;
  o.data_dir = scratch("recover");
  std::string id;
  std::string archive_before;
  std::size_t evaluations = 0;
  {
    SessionManager mgr(o);
    auto s = mgr.create(minilib(), small_config(6));
    id = s->id();
    REQUIRE(s->wait_for([](SessionState st) { return st == SessionState::awaiting_feedback; }, 60s));
    s->submit(empty_feedback(Json::parse(s->candidates().dump())));
    REQUIRE(s->wait_for([&](SessionState st) { return st == SessionState::awaiting_feedback; }, 60s));
    while (s->status()["stops_done"] != 1) std::this_thread::sleep_for(1ms);
    evaluations = s->status()["evaluations"];
    archive_before = dump(s->archive());
  }
  SessionManager again(o);
  CHECK(again.recover() == 1);
  auto s = again.get(id);
  REQUIRE(s->wait_for([](SessionState st) { return st == SessionState::awaiting_feedback; }, 60s));
  const auto st = s->status();
  CHECK(st["stops_done"] == 1);
  CHECK(st["evaluations"] == evaluations);
  CHECK(dump(s->archive()) == archive_before);
  CHECK_THROWS_AS(again.get("nope"), SessionNotFound);
}
