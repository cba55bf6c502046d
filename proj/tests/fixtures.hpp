#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "archevo/architecture.hpp"
#include "archevo/engine.hpp"
#include "archevo/model.hpp"
#include "oracles.hpp"

namespace fixture {

inline std::filesystem::path data_dir() { return ARCHEVO_TEST_DATA_DIR; }

inline archevo::ClassDef cls(std::string id, std::vector<std::string> pub = {"op"},
                             std::vector<std::string> priv = {}) {
  archevo::ClassDef c{id, id, {}};
  for (auto& m : pub) c.methods.push_back({std::move(m), archevo::Visibility::public_});
  for (auto& m : priv) c.methods.push_back({std::move(m), archevo::Visibility::nonpublic});
  return c;
}

inline archevo::Relationship rel(std::string id, archevo::RelationKind kind, std::string s, std::string t,
                                 bool nav) {
  return {std::move(id), kind, std::move(s), std::move(t), nav};
}

constexpr auto as = archevo::RelationKind::association;
constexpr auto ag = archevo::RelationKind::aggregation;
constexpr auto co = archevo::RelationKind::composition;
constexpr auto ge = archevo::RelationKind::generalization;
constexpr auto de = archevo::RelationKind::dependency;

inline std::shared_ptr<const archevo::AnalysisModel> minilib() {
  static const auto m =
      std::make_shared<const archevo::AnalysisModel>(archevo::load_model(data_dir() / "minilib.json"));
  return m;
}

inline std::vector<std::vector<std::string>> minilib_reference() {
  return {{"Catalog", "Book", "Author", "Publisher"},
          {"Member", "Account", "Address"},
          {"Loan", "LoanPolicy", "Fine"},
          {"Notifier", "EmailNotifier", "Message", "Template"}};
}

inline archevo::GeneratorSpec small_spec(std::size_t n, std::uint64_t seed) {
  archevo::GeneratorSpec g;
  g.n_classes = n;
  g.counts = {n, n / 3 + 1, n / 4 + 1, n / 5, n / 3 + 1};
  g.navigable_probability = 0.5;
  g.seed = seed;
  return g;
}

inline archevo::GeneratorSpec synthetic_spec(std::size_t n, std::array<std::size_t, 5> counts,
                                              std::uint64_t seed) {
  archevo::GeneratorSpec g;
  g.n_classes = n;
  g.counts = counts;
  g.navigable_probability = 0.5;
  g.seed = seed;
  return g;
}

/// Generated instances with a feasible region large enough for full runs.
inline archevo::GeneratorSpec syn40() { return synthetic_spec(40, {14, 6, 6, 10, 8}, 5); }
inline archevo::GeneratorSpec syn60() { return synthetic_spec(60, {20, 10, 10, 14, 12}, 7); }

inline oracle::Groups groups(const archevo::Architecture& a, const archevo::AnalysisModel& m) {
  oracle::Groups g;
  for (const auto& c : a.components()) {
    auto& s = g.emplace_back();
    for (auto idx : c.classes) s.insert(m.class_id(idx));
  }
  return g;
}

inline archevo::Problem problem(std::shared_ptr<const archevo::AnalysisModel> m,
                                const archevo::EngineConfig& cfg = {}) {
  return archevo::Problem(std::move(m), cfg.erp, cfg.bounds());
}

inline archevo::EngineConfig quick_config(std::uint64_t seed, std::size_t evaluations = 1200,
                                          std::size_t pop = 40) {
  archevo::EngineConfig cfg;
  cfg.seed = seed;
  cfg.population_size = pop;
  cfg.max_evaluations = evaluations;
  cfg.execution = archevo::Execution::serial;
  return cfg;
}

}  // namespace fixture
