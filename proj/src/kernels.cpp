#include "archevo/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

#ifdef ARCHEVO_HAVE_OPENMP
#include <omp.h>
#endif

namespace archevo {

Evaluation evaluate_architecture(const Architecture& arch, const Problem& problem) {
  Evaluation ev;
  ev.raw = compute_metrics(arch, problem.model(), problem.erp());
  ev.objectives = normalize(ev.raw, problem.normalization());
  ev.feasibility = check_feasibility(arch, problem.model());
  return ev;
}

double maximin_raw(const ObjectiveVector& s, std::span<const ObjectiveVector> reference,
                   std::size_t self) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < reference.size(); ++j) {
    if (j == self) continue;
    const ObjectiveVector& z = reference[j];
    double worst = s[0] - z[0];
    for (std::size_t k = 1; k < kObjectiveCount; ++k) worst = std::min(worst, s[k] - z[k]);
    best = std::max(best, worst);
  }
  return best == -std::numeric_limits<double>::infinity() ? -1.0 : best;
}

namespace kernels {

void evaluate_serial(const Problem& problem, std::span<const Architecture* const> archs,
                     std::span<Evaluation> out) {
  for (std::size_t i = 0; i < archs.size(); ++i) out[i] = evaluate_architecture(*archs[i], problem);
}

void evaluate_parallel(const Problem& problem, std::span<const Architecture* const> archs,
                       std::span<Evaluation> out) {
  const auto n = static_cast<std::int64_t>(archs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) out[i] = evaluate_architecture(*archs[i], problem);
}

void maximin_serial(std::span<const ObjectiveVector> reference,
                    std::span<const ObjectiveVector> queries, std::span<const std::size_t> self,
                    std::span<double> out) {
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = maximin_raw(queries[i], reference, self[i]);
}

void maximin_parallel(std::span<const ObjectiveVector> reference,
                      std::span<const ObjectiveVector> queries, std::span<const std::size_t> self,
                      std::span<double> out) {
  const auto n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = maximin_raw(queries[i], reference, self[i]);
}

void subjective_serial(const PreferenceStore& store, const Problem& problem,
                       std::span<const Architecture* const> archs,
                       std::span<const ObjectiveVector> objectives,
                       std::span<std::optional<double>> out) {
  for (std::size_t i = 0; i < archs.size(); ++i) {
    out[i] = subjective_fitness(store, *archs[i], problem.model(), objectives[i], problem.bounds());
  }
}

void subjective_parallel(const PreferenceStore& store, const Problem& problem,
                         std::span<const Architecture* const> archs,
                         std::span<const ObjectiveVector> objectives,
                         std::span<std::optional<double>> out) {
  if (store.empty()) {
    std::fill(out.begin(), out.end(), std::nullopt);
    return;
  }
  const auto n = static_cast<std::int64_t>(archs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = subjective_fitness(store, *archs[i], problem.model(), objectives[i], problem.bounds());
  }
}

}  // namespace kernels
}  // namespace archevo
