#include <cmath>

#include "doctest.h"
#include "archevo/fitness.hpp"
#include "fixtures.hpp"

using namespace archevo;
using namespace fixture;

namespace {

std::vector<ObjectiveVector> to_vectors(const std::vector<oracle::Vec3>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("maximin hand example") {
  const std::vector<ObjectiveVector> z{{0.4, 0.4, 0.4}, {0.1, 0.9, 0.9}};
  const ObjectiveVector s{0.2, 0.8, 0.5};
  CHECK(maximin_raw(s, z, kernels::npos) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(maximin(s, z) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("maximin sign cases") {
  const std::vector<ObjectiveVector> z{{0.5, 0.5, 0.5}, {0.6, 0.7, 0.9}};
  CHECK(maximin({0.1, 0.1, 0.1}, z) < 0.5);
  CHECK(maximin({0.5, 0.5, 0.5}, z) == 0.5);
  CHECK(maximin({0.9, 0.9, 0.95}, z) > 0.5);
}

TEST_CASE("self exclusion is by index") {
  const std::vector<ObjectiveVector> z{{0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}};
  CHECK(maximin(z[0], z, 0) == 0.5);
  const std::vector<ObjectiveVector> alone{{0.3, 0.3, 0.3}};
  CHECK(maximin(alone[0], alone, 0) == 0.0);
  CHECK(maximin_raw(alone[0], alone, 0) == -1.0);
}

TEST_CASE("sign of maximin matches the dominance oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(29);
    const bool grid = trial % 2 == 0;
    std::vector<oracle::Vec3> pop(n);
    for (auto& v : pop) {
      for (auto& x : v) x = grid ? static_cast<double>(rng.index(4)) / 4.0 : rng.uniform();
    }
    const auto vecs = to_vectors(pop);
    for (std::size_t i = 0; i < n; ++i) {
      const double raw = maximin_raw(vecs[i], vecs, i);
      const int sign = std::fabs(raw) <= 1e-12 ? 0 : (raw < 0 ? -1 : 1);
      CHECK(sign == oracle::dominance_class(i, pop));
    }
  }
}

TEST_CASE("records and ordering") {
  const FitnessConfig cfg;
  const FeasibilityReport ok;
  FeasibilityReport bad;
  bad.feasible = false;
  bad.interfaceless_component = 1;

  const auto plain = make_record(0.3, std::nullopt, ok, false, cfg);
  CHECK(plain.combined == 0.3);
  const auto mixed = make_record(0.3, 0.5, ok, false, cfg);
  CHECK(mixed.combined == doctest::Approx(0.4));
  CHECK(make_record(0.1, 0.0, bad, false, cfg).combined == 1.0);
  CHECK(make_record(0.1, 0.0, ok, true, cfg).combined == 1.0);

  auto a = make_record(0.3, std::nullopt, ok, false, cfg);
  auto b = make_record(0.4, std::nullopt, ok, false, cfg);
  CHECK(better(a, 1, b, 0));
  FeasibilityReport v1 = bad, v3 = bad;
  v3.mutual_provision_pair = 2;
  const auto i1 = make_record(0.2, std::nullopt, v1, false, cfg);
  const auto i3 = make_record(0.1, std::nullopt, v3, false, cfg);
  CHECK(i1.violation_count == 1);
  CHECK(i3.violation_count == 3);
  CHECK(better(i1, 5, i3, 0));
  CHECK(better(a, 0, a, 1));
  CHECK_FALSE(better(a, 1, a, 0));
  CHECK(compare(make_record(1.0, std::nullopt, ok, true, cfg), i1) < 0);
}

TEST_CASE("population evaluation") {
  const auto m = minilib();
  const Problem prob = problem(m);
  Rng rng(8);
  std::vector<Architecture> pop;
  while (pop.size() < 20) {
    auto a = random_architecture(*m, 2, 6, rng);
    if (check_feasibility(a, *m).feasible) pop.push_back(std::move(a));
  }
  const FitnessConfig cfg;
  PreferenceStore empty;
  const auto recs = evaluate_population(pop, empty, prob, cfg, Execution::serial);
  std::vector<oracle::Vec3> vecs;
  for (const auto& a : pop) {
    const auto e = evaluate_architecture(a, prob);
    vecs.push_back(e.objectives);
  }
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(recs[i].combined == recs[i].f_obj);
    CHECK_FALSE(recs[i].f_sub.has_value());
    bool dominated = false;
    for (std::size_t j = 0; j < pop.size(); ++j) {
      if (j != i && oracle::dominates(vecs[j], vecs[i])) dominated = true;
    }
    CHECK((recs[i].f_obj < 0.5) == !dominated);
  }

  PreferenceStore store;
  Preference p;
  p.kind = PreferenceKind::number_of_components;
  p.payload = ComponentCount{4};
  store.add_interaction(0, {p});
  for (;;) {
    auto a = random_architecture(*m, 2, 6, rng);
    if (!check_feasibility(a, *m).feasible) {
      pop.push_back(std::move(a));
      break;
    }
  }
  REQUIRE_FALSE(check_feasibility(pop.back(), *m).feasible);
  const auto withpref = evaluate_population(pop, store, prob, cfg, Execution::serial);
  CHECK(withpref.back().combined == 1.0);
  CHECK_FALSE(withpref.back().feasible);
  for (std::size_t i = 0; i + 1 < pop.size(); ++i) {
    REQUIRE(withpref[i].f_sub.has_value());
    CHECK(withpref[i].combined == doctest::Approx(0.5 * withpref[i].f_obj + 0.5 * *withpref[i].f_sub));
    CHECK(withpref[i].combined >= 0.0);
    CHECK(withpref[i].combined <= 1.0);
  }
}
