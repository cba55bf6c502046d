#include <cmath>

#include "doctest.h"
#include "archevo/errors.hpp"
#include "archevo/preferences.hpp"
#include "fixtures.hpp"

using namespace archevo;
using namespace fixture;

namespace {

const ComponentBounds kBounds{2, 6};
const ObjectiveVector kZero{0.0, 0.0, 0.0};

Preference make(PreferenceKind kind, PreferencePayload payload, int confidence = 3) {
  Preference p;
  p.kind = kind;
  p.payload = std::move(payload);
  p.confidence = confidence;
  return p;
}

ComponentTarget target(const AnalysisModel& m, std::vector<std::string> ids) {
  ComponentTarget t;
  for (const auto& id : ids) t.classes.push_back(*m.class_index(id));
  std::sort(t.classes.begin(), t.classes.end());
  return t;
}

Architecture arch_with_count(const AnalysisModel& m, std::size_t n) {
  std::vector<Component> comps(n);
  for (ClassIndex c = 0; c < m.class_count(); ++c) comps[c % n].classes.push_back(c);
  return Architecture(comps, m.class_count());
}

double nc(std::size_t n, std::size_t preferred) {
  const auto m = minilib();
  return achievement(make(PreferenceKind::number_of_components, ComponentCount{preferred}),
                     arch_with_count(*m, n), *m, kZero, kBounds);
}

double in_range(double value, double lo, double hi) {
  const auto m = minilib();
  const auto a = arch_with_count(*m, 3);
  return achievement(make(PreferenceKind::metric_in_range, MetricRange{MetricId::erp, lo, hi}), a, *m,
                     {0.5, value, 0.5}, kBounds);
}

}  // namespace

TEST_CASE("jaccard") {
  const std::vector<int> a{1, 2, 3}, b{2, 3, 4}, c{7, 8}, e{};
  CHECK(jaccard(a, a) == 1.0);
  CHECK(jaccard(a, c) == 0.0);
  CHECK(jaccard(a, b) == 0.5);
  CHECK(jaccard(e, e) == 1.0);
  CHECK(jaccard(a, e) == 0.0);
}

TEST_CASE("best and worst component") {
  const auto m = minilib();
  const auto arch = architecture_from_ids(*m, minilib_reference());
  const auto exact = target(*m, minilib_reference()[1]);
  CHECK(achievement(make(PreferenceKind::best_component, exact), arch, *m, kZero, kBounds) == 1.0);
  CHECK(achievement(make(PreferenceKind::worst_component, exact), arch, *m, kZero, kBounds) == 0.0);

  // A target sharing no class with any component cannot exist in a partition,
  // so use a model with a class outside the compared components.
  const AnalysisModel small({cls("A"), cls("B"), cls("C"), cls("D")}, {rel("1", as, "A", "B", true)});
  const auto sa = architecture_from_ids(small, {{"A", "B"}, {"C", "D"}});
  const Architecture half({{{0, 1}}, {{2}}, {{3}}}, 4);
  ComponentTarget cd;
  cd.classes = {2, 3};
  CHECK(achievement(make(PreferenceKind::worst_component, cd), sa, small, kZero, kBounds) == 0.0);
  CHECK(achievement(make(PreferenceKind::best_component, cd), half, small, kZero, kBounds) == 0.5);
  CHECK(achievement(make(PreferenceKind::worst_component, cd), half, small, kZero, kBounds) == 0.5);
  ComponentTarget ab;
  ab.classes = {0, 1};
  const Architecture split({{{0, 2}}, {{1, 3}}}, 4);
  CHECK(achievement(make(PreferenceKind::best_component, ab), split, small, kZero, kBounds) ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("worst component with no shared class scores one") {
  const AnalysisModel m({cls("A"), cls("B"), cls("C")}, {rel("1", as, "A", "B", true)});
  // Every class belongs to some component, so an empty target is the only
  // reference disjoint from all of them.
  ComponentTarget none;
  const auto a = architecture_from_ids(m, {{"A"}, {"B", "C"}});
  CHECK(achievement(make(PreferenceKind::worst_component, none), a, m, kZero, kBounds) == 1.0);
}

TEST_CASE("best and worst interface") {
  const AnalysisModel m({cls("A", {"m1", "m2"}), cls("B")}, {rel("1", as, "B", "A", true)});
  const auto a = architecture_from_ids(m, {{"A"}, {"B"}});
  InterfaceTarget full{{{0, "m1"}, {0, "m2"}}};
  InterfaceTarget part{{{0, "m1"}}};
  CHECK(achievement(make(PreferenceKind::best_interface, full), a, m, kZero, kBounds) == 1.0);
  CHECK(achievement(make(PreferenceKind::best_interface, part), a, m, kZero, kBounds) == 0.5);
  CHECK(achievement(make(PreferenceKind::worst_interface, part), a, m, kZero, kBounds) == 0.5);

  const auto merged = architecture_from_ids(m, {{"A", "B"}});
  CHECK(achievement(make(PreferenceKind::best_interface, full), merged, m, kZero, kBounds) == 0.0);
  CHECK(achievement(make(PreferenceKind::worst_interface, full), merged, m, kZero, kBounds) == 1.0);
}

TEST_CASE("number of components") {
  CHECK(nc(4, 4) == 1.0);
  CHECK(nc(2, 4) == 0.0);
  CHECK(nc(3, 4) == 0.5);
  CHECK(nc(5, 4) == 0.0);
  CHECK(nc(5, 3) == doctest::Approx(0.0));
  CHECK(nc(4, 3) == 0.5);
  // n = n_max: 1 only at the preferred count.
  CHECK(nc(6, 6) == 1.0);
  CHECK(nc(6, 4) == 0.0);
  // n_min = preferred: first branch unreachable.
  CHECK(nc(2, 2) == 1.0);
  CHECK(nc(3, 2) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("metric in range") {
  CHECK(in_range(0.5, 0.2, 0.8) == 1.0);
  CHECK(in_range(0.2, 0.2, 0.8) == doctest::Approx(0.0));
  CHECK(in_range(0.8, 0.2, 0.8) == doctest::Approx(0.0));
  CHECK(in_range(0.1, 0.2, 0.8) == 0.0);
  CHECK(in_range(0.35, 0.2, 0.8) == doctest::Approx(0.5));
}

TEST_CASE("aspiration levels") {
  const auto m = minilib();
  const auto a = arch_with_count(*m, 3);
  const AspirationLevels z{{0.5, 0.5, 0.5}, {1.0, 1.0, 1.0}};
  const auto p = make(PreferenceKind::aspiration_levels, z);
  CHECK(achievement(p, a, *m, {0.4, 0.1, 0.2}, kBounds) == 1.0);
  CHECK(achievement(p, a, *m, {0.5, 0.5, 0.5}, kBounds) == 1.0);
  CHECK(achievement(p, a, *m, {0.7, 0.1, 0.6}, kBounds) == doctest::Approx(0.8));
  const AspirationLevels far{{0.0, 0.0, 0.0}, {3.0, 3.0, 3.0}};
  CHECK(achievement(make(PreferenceKind::aspiration_levels, far), a, *m, {0.9, 0.9, 0.9}, kBounds) == 0.0);
}

TEST_CASE("confidence normalization") {
  CHECK(normalize_confidences(std::vector<int>{2}) == std::vector<double>{1.0});
  const auto three = normalize_confidences(std::vector<int>{5, 5, 5});
  for (double w : three) CHECK(w == doctest::Approx(1.0 / 3.0));
  const auto two = normalize_confidences(std::vector<int>{4, 1});
  CHECK(two[0] == doctest::Approx(0.8));
  CHECK(two[1] == doctest::Approx(0.2));
}

TEST_CASE("subjective fitness") {
  const auto m = minilib();
  const auto arch = arch_with_count(*m, 4);
  PreferenceStore empty;
  CHECK_FALSE(subjective_fitness(empty, arch, *m, kZero, kBounds).has_value());

  PreferenceStore one;
  one.add_interaction(0, {make(PreferenceKind::number_of_components, ComponentCount{4}, 2)});
  CHECK(*subjective_fitness(one, arch, *m, kZero, kBounds) == 0.0);

  PreferenceStore two;
  two.add_interaction(0, {make(PreferenceKind::number_of_components, ComponentCount{4}, 4),
                          make(PreferenceKind::number_of_components, ComponentCount{2}, 1)});
  CHECK(*subjective_fitness(two, arch, *m, kZero, kBounds) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("store ignores none and rejects repeated interactions") {
  PreferenceStore s;
  s.add_interaction(0, {Preference{}, Preference{}});
  CHECK(s.empty());
  s.add_interaction(1, {make(PreferenceKind::number_of_components, ComponentCount{3}, 5)});
  CHECK(s.size() == 1);
  CHECK(s.entries()[0].weight == 1.0);
  CHECK_THROWS_AS(s.add_interaction(1, {make(PreferenceKind::number_of_components, ComponentCount{3})}),
                  ProtocolError);
}

TEST_CASE("validation") {
  const auto m = minilib();
  CHECK_THROWS_AS(validate_preference(make(PreferenceKind::metric_in_range, MetricRange{MetricId::icd, 0.6, 0.4}),
                                      *m, kBounds),
                  ValidationError);
  CHECK_THROWS_AS(validate_preference(make(PreferenceKind::number_of_components, ComponentCount{9}), *m, kBounds),
                  ValidationError);
  CHECK_THROWS_AS(validate_preference(make(PreferenceKind::best_component, ComponentCount{3}), *m, kBounds),
                  ValidationError);
  CHECK_THROWS_AS(validate_preference(make(PreferenceKind::number_of_components, ComponentCount{3}, 6), *m,
                                      kBounds),
                  ValidationError);
  CHECK_THROWS_AS(metric_id_from_string("loc"), ConfigError);
}

TEST_CASE("achievement stays in range and best plus worst is one") {
  const auto m = minilib();
  Rng rng(99);
  const auto random_set = [&]() {
    ComponentTarget t;
    for (ClassIndex c = 0; c < m->class_count(); ++c) {
      if (rng.bernoulli(0.3)) t.classes.push_back(c);
    }
    if (t.classes.empty()) t.classes.push_back(static_cast<ClassIndex>(rng.index(m->class_count())));
    return t;
  };
  for (int i = 0; i < 10000; ++i) {
    const auto arch = random_architecture(*m, 2, 6, rng);
    const ObjectiveVector v{rng.uniform(), rng.uniform(), rng.uniform()};
    const auto ifs = derive_interfaces(arch, *m);
    Preference p;
    switch (i % 7) {
      case 0: p = make(PreferenceKind::best_component, random_set()); break;
      case 1: p = make(PreferenceKind::worst_component, random_set()); break;
      case 2:
      case 3: {
        InterfaceTarget t;
        for (ClassIndex c = 0; c < m->class_count(); ++c) {
          for (const auto& name : m->public_methods(c)) {
            if (rng.bernoulli(0.2)) t.operations.push_back({c, name});
          }
        }
        p = make(i % 7 == 2 ? PreferenceKind::best_interface : PreferenceKind::worst_interface, t);
        break;
      }
      case 4: p = make(PreferenceKind::number_of_components, ComponentCount{rng.between(2, 6)}); break;
      case 5: {
        const double lo = rng.uniform() * 0.9;
        p = make(PreferenceKind::metric_in_range,
                 MetricRange{static_cast<MetricId>(rng.index(3)), lo, lo + 0.01 + rng.uniform() * (0.99 - lo)});
        break;
      }
      default:
        p = make(PreferenceKind::aspiration_levels,
                 AspirationLevels{{rng.uniform(), rng.uniform(), rng.uniform()},
                                  {rng.uniform() * 3, rng.uniform() * 3, rng.uniform() * 3}});
    }
    const double a = achievement(p, arch, ifs, v, kBounds);
    REQUIRE(a >= 0.0);
    REQUIRE(a <= 1.0);
    if (p.kind == PreferenceKind::best_component || p.kind == PreferenceKind::worst_component) {
      Preference other = p;
      other.kind = p.kind == PreferenceKind::best_component ? PreferenceKind::worst_component
                                                            : PreferenceKind::best_component;
      CHECK(a + achievement(other, arch, ifs, v, kBounds) == 1.0);
    }
  }
}
