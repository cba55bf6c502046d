#pragma once

// Batch evaluation kernels. Every kernel has a serial reference version and
// an OpenMP version with identical per-element arithmetic, so both produce
// bit-identical results. The serial versions are kept for tests and for the
// benchmark target.

#include <optional>
#include <span>

#include "archevo/architecture.hpp"
#include "archevo/metrics.hpp"
#include "archevo/preferences.hpp"
#include "archevo/problem.hpp"

namespace archevo {

enum class Execution { serial, parallel };

struct Evaluation {
  MetricVector raw;
  ObjectiveVector objectives{};
  FeasibilityReport feasibility;
};

Evaluation evaluate_architecture(const Architecture& arch, const Problem& problem);

/// Raw maximin value of `s` against `reference`, skipping the entry at
/// `self` (pass npos when `s` is not part of the reference set). Returns
/// -1 when nothing is left to compare against.
double maximin_raw(const ObjectiveVector& s, std::span<const ObjectiveVector> reference,
                   std::size_t self);

namespace kernels {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

void evaluate_serial(const Problem& problem, std::span<const Architecture* const> archs,
                     std::span<Evaluation> out);
void evaluate_parallel(const Problem& problem, std::span<const Architecture* const> archs,
                       std::span<Evaluation> out);

/// out[i] = maximin_raw(queries[i], reference, self[i]).
void maximin_serial(std::span<const ObjectiveVector> reference,
                    std::span<const ObjectiveVector> queries, std::span<const std::size_t> self,
                    std::span<double> out);
void maximin_parallel(std::span<const ObjectiveVector> reference,
                      std::span<const ObjectiveVector> queries, std::span<const std::size_t> self,
                      std::span<double> out);

void subjective_serial(const PreferenceStore& store, const Problem& problem,
                       std::span<const Architecture* const> archs,
                       std::span<const ObjectiveVector> objectives,
                       std::span<std::optional<double>> out);
void subjective_parallel(const PreferenceStore& store, const Problem& problem,
                         std::span<const Architecture* const> archs,
                         std::span<const ObjectiveVector> objectives,
                         std::span<std::optional<double>> out);

inline void evaluate(Execution ex, const Problem& problem, std::span<const Architecture* const> archs,
                     std::span<Evaluation> out) {
  ex == Execution::parallel ? evaluate_parallel(problem, archs, out)
                            : evaluate_serial(problem, archs, out);
}

inline void maximin(Execution ex, std::span<const ObjectiveVector> reference,
                    std::span<const ObjectiveVector> queries, std::span<const std::size_t> self,
                    std::span<double> out) {
  ex == Execution::parallel ? maximin_parallel(reference, queries, self, out)
                            : maximin_serial(reference, queries, self, out);
}

inline void subjective(Execution ex, const PreferenceStore& store, const Problem& problem,
                       std::span<const Architecture* const> archs,
                       std::span<const ObjectiveVector> objectives,
                       std::span<std::optional<double>> out) {
  ex == Execution::parallel ? subjective_parallel(store, problem, archs, objectives, out)
                            : subjective_serial(store, problem, archs, objectives, out);
}

}  // namespace kernels
}  // namespace archevo
