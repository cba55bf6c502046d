#include <algorithm>

#include "doctest.h"
#include "archevo/errors.hpp"
#include "archevo/interaction.hpp"
#include "fixtures.hpp"

using namespace archevo;
using namespace fixture;

namespace {

Individual point(std::uint64_t uid, ObjectiveVector v, double f_sub) {
  Individual ind;
  ind.uid = uid;
  ind.objectives = v;
  ind.fitness.f_sub = f_sub;
  ind.fitness.f_obj = 0.5;
  return ind;
}

FeedbackBundle empty_bundle(const CandidateSet& s) {
  FeedbackBundle b;
  b.stop_index = s.stop_index;
  for (const auto& c : s.candidates) b.items.emplace_back().solution = c.uid;
  return b;
}

}  // namespace

TEST_CASE("schedule arithmetic") {
  CHECK(build_schedule(12, 3).stops == std::vector<std::size_t>{4, 7, 10});
  const auto big = build_schedule(11925, 3);
  CHECK(big.stops.front() == 3975);
  CHECK(big.stops.back() == 9937);
  CHECK(build_schedule(30, 1).stops == std::vector<std::size_t>{10});
  CHECK_THROWS_AS(build_schedule(5, 2), ConfigError);
  CHECK_THROWS_AS(build_schedule(12, 0), ConfigError);
  CHECK_THROWS_AS(build_schedule(12, 9), ConfigError);
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const std::size_t g = 6 + rng.index(20000);
    const std::size_t h = 1 + rng.index(5);
    const auto s = build_schedule(g, h);
    REQUIRE(s.stops.size() == h);
    CHECK(s.stops.front() == g / 3);
    if (h > 1) CHECK(s.stops.back() == 5 * g / 6);
    for (std::size_t k = 1; k < h; ++k) CHECK(s.stops[k] > s.stops[k - 1]);
  }
}

TEST_CASE("candidates come from each blob plus the preferred outlier") {
  std::vector<Individual> pop;
  Rng noise(1);
  for (std::uint64_t i = 0; i < 10; ++i) {
    pop.push_back(point(i + 1, {0.1 + 0.01 * noise.uniform(), 0.8, 0.5}, 0.9));
    pop.push_back(point(i + 101, {0.8 + 0.01 * noise.uniform(), 0.1, 0.5}, 0.9));
  }
  pop.push_back(point(500, {0.45, 0.45, 0.5}, 0.0));
  Rng rng(7);
  const auto c = select_candidates(pop, 3, rng);
  REQUIRE(c.size() == 3);
  CHECK(c.back().uid == 500);
  std::vector<std::uint64_t> ids{c[0].uid, c[1].uid};
  std::sort(ids.begin(), ids.end());
  CHECK(ids[0] <= 10);
  CHECK(ids[1] >= 101);
  CHECK(ids[1] <= 110);

  Rng again(7);
  const auto d = select_candidates(pop, 3, again);
  for (std::size_t i = 0; i < 3; ++i) CHECK(c[i].uid == d[i].uid);
}

TEST_CASE("candidate selection edge cases") {
  std::vector<Individual> pop{point(1, {0.1, 0.2, 0.3}, 0.5), point(2, {0.3, 0.2, 0.1}, 0.4),
                              point(3, {0.2, 0.2, 0.2}, 0.1)};
  Rng rng(3);
  const auto all = select_candidates(pop, 3, rng);
  CHECK(all.size() == 3);

  std::vector<Individual> dup(8, point(0, {0.3, 0.3, 0.3}, 0.5));
  for (std::uint64_t i = 0; i < dup.size(); ++i) dup[i].uid = i + 1;
  dup[2].marked_for_removal = true;
  dup[5].fitness.feasible = false;
  const auto c = select_candidates(dup, 3, rng);
  REQUIRE(c.size() == 3);
  std::vector<std::uint64_t> ids;
  for (const auto& x : c) {
    ids.push_back(x.uid);
    CHECK(x.uid != 3);
    CHECK(x.uid != 6);
  }
  std::sort(ids.begin(), ids.end());
  CHECK(std::unique(ids.begin(), ids.end()) == ids.end());
}

TEST_CASE("feedback protocol") {
  EngineConfig cfg = quick_config(5, 1500, 40);
  Engine e(problem(minilib(), cfg), cfg);
  InteractionController ctl(e, build_schedule(e.total_generations(), 3));
  CHECK_THROWS_AS(ctl.submit(FeedbackBundle{}), ProtocolError);

  auto shown = ctl.advance();
  REQUIRE(shown);
  CHECK(shown->candidates.size() == 3);
  CHECK(shown->generation == ctl.schedule().stops[0]);
  const auto evals = e.evaluations_used();

  FeedbackBundle wrong_stop = empty_bundle(*shown);
  wrong_stop.stop_index = 1;
  CHECK_THROWS_AS(ctl.submit(wrong_stop), ProtocolError);
  FeedbackBundle unshown = empty_bundle(*shown);
  unshown.items[0].solution = 987654321;
  CHECK_THROWS_AS(ctl.submit(unshown), ProtocolError);
  FeedbackBundle twice = empty_bundle(*shown);
  twice.items[1].solution = twice.items[0].solution;
  CHECK_THROWS_AS(ctl.submit(twice), ProtocolError);
  FeedbackBundle conflict = empty_bundle(*shown);
  conflict.items[0].add_to_archive = conflict.items[0].remove_from_population = true;
  CHECK_THROWS_AS(ctl.submit(conflict), ProtocolError);
  FeedbackBundle bad_freeze = empty_bundle(*shown);
  bad_freeze.items[0].freeze = {shown->candidates[0].architecture.size()};
  CHECK_THROWS_AS(ctl.submit(bad_freeze), ProtocolError);
  FeedbackBundle bad_pref = empty_bundle(*shown);
  Preference p;
  p.kind = PreferenceKind::number_of_components;
  p.payload = ComponentCount{42};
  bad_pref.items[0].preference = p;
  CHECK_THROWS_AS(ctl.submit(bad_pref), ValidationError);
  CHECK(e.evaluations_used() == evals);
  CHECK(e.preferences().empty());
  REQUIRE(ctl.pending());

  // Nothing is applied by a rejected bundle; an all-empty bundle is accepted.
  const FeedbackBundle ok = empty_bundle(*shown);
  ctl.submit(ok);
  CHECK(e.preferences().empty());
  CHECK_FALSE(ctl.pending());
  CHECK_THROWS_AS(ctl.submit(ok), ProtocolError);
  CHECK(ctl.stops_done() == 1);

  auto second = ctl.advance();
  REQUIRE(second);
  FeedbackBundle acts = empty_bundle(*second);
  const auto archived_id = second->candidates[0].uid;
  acts.items[0].add_to_archive = true;
  acts.items[1].remove_from_population = true;
  acts.items[2].freeze = {0};
  acts.items[2].preference = Preference{PreferenceKind::number_of_components, ComponentCount{4}, 5, 1};
  ctl.submit(acts);
  CHECK(e.archive().contains(archived_id));
  CHECK(e.find(second->candidates[1].uid)->marked_for_removal);
  CHECK(e.find(second->candidates[2].uid)->architecture.components()[0].frozen);
  CHECK(e.preferences().size() == 1);

  while (auto s = ctl.advance()) ctl.submit(empty_bundle(*s));
  CHECK(ctl.stops_done() == 3);
  CHECK(e.generation() == e.total_generations());
  CHECK(e.archive().contains(archived_id));
}

TEST_CASE("stop_search ends the run after the stop") {
  EngineConfig cfg = quick_config(8, 1500, 40);
  Engine e(problem(minilib(), cfg), cfg);
  InteractionController ctl(e, build_schedule(e.total_generations(), 3));
  auto s = ctl.advance();
  REQUIRE(s);
  auto b = empty_bundle(*s);
  b.items[1].stop_search = true;
  ctl.submit(b);
  CHECK(e.finished());
  CHECK_FALSE(ctl.advance().has_value());
}

TEST_CASE("fixed component count policy stores one preference per stop") {
  EngineConfig cfg = quick_config(3, 1500, 40);
  Engine e(problem(minilib(), cfg), cfg);
  auto dm = make_policy(policy_from_json(Json::parse(R"({"policy":"fixed_nc","n":4,"likert":5})")), *minilib());
  std::size_t stops = 0;
  RunHooks hooks;
  hooks.on_stop = [&](const CandidateSet&) { ++stops; };
  run_interactive(e, build_schedule(e.total_generations(), 3), *dm, hooks);
  CHECK(stops == 3);
  REQUIRE(e.preferences().size() == 3);
  for (const auto& entry : e.preferences().entries()) {
    CHECK(entry.weight == 1.0);
    CHECK(entry.preference.kind == PreferenceKind::number_of_components);
    CHECK(std::get<ComponentCount>(entry.preference.payload).preferred == 4);
  }
}

TEST_CASE("noop policy leaves the store empty") {
  EngineConfig cfg = quick_config(3, 1200, 30);
  Engine e(problem(minilib(), cfg), cfg);
  auto dm = make_policy(policy_from_json(Json::parse(R"({"policy":"noop"})")), *minilib());
  run_interactive(e, build_schedule(e.total_generations(), 3), *dm);
  CHECK(e.preferences().empty());
  CHECK(e.generation() == e.total_generations());
}

TEST_CASE("feedback wire form round trip") {
  const auto m = minilib();
  const char* doc = R"({"stop": 1, "feedback": [
    {"solution": 12, "preference": {"kind": "best_component", "payload": {"classes": ["Book", "Catalog"]}, "confidence": 4},
     "actions": {"add_to_archive": true, "freeze": [0, 2]}},
    {"solution": 13, "preference": null},
    {"solution": 14, "actions": {"stop_search": true}}]})";
  const auto b = feedback_from_json(Json::parse(doc), *m);
  CHECK(b.stop_index == 1);
  REQUIRE(b.items.size() == 3);
  CHECK(b.items[0].add_to_archive);
  CHECK(b.items[0].freeze == std::vector<std::size_t>{0, 2});
  CHECK(b.items[0].preference->confidence == 4);
  CHECK_FALSE(b.items[1].preference.has_value());
  CHECK(b.items[2].stop_search);
  const auto again = feedback_from_json(Json::parse(feedback_to_json(b, *m).dump()), *m);
  CHECK(again == b);

  CHECK_THROWS_AS(feedback_from_json(Json::parse(R"({"stop": 0})"), *m), ParseError);
  CHECK_THROWS_AS(feedback_from_json(Json::parse(R"({"stop": 0, "feedback": [{"solution": "x"}]})"), *m),
                  ParseError);
  CHECK_THROWS(feedback_from_json(
      Json::parse(R"({"stop": 0, "feedback": [{"solution": 1, "actions": {"explode": true}}]})"), *m));
}

TEST_CASE("policy specs") {
  const auto p = policy_from_json(Json::parse(
      R"({"policy":"target_architecture","reference":[["Book","Catalog"]],"likert":4,"actions":{"archive_first":true,"stop_at":1}})"));
  CHECK(p.kind == PolicySpec::Kind::target_architecture);
  CHECK(p.actions.archive_first);
  CHECK(p.actions.stop_at == std::optional<std::size_t>{1});
  const auto back = policy_from_json(Json::parse(policy_to_json(p).dump()));
  CHECK(back.reference == p.reference);
  CHECK(back.actions == p.actions);
  CHECK_THROWS(policy_from_json(Json::parse(R"({"policy":"magic"})")));
}
