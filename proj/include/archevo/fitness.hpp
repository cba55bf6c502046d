#pragma once

#include <optional>
#include <span>
#include <vector>

#include "archevo/kernels.hpp"
#include "archevo/preferences.hpp"
#include "archevo/problem.hpp"

namespace archevo {

struct FitnessConfig {
  double w_obj = 0.5;
  double w_sub = 0.5;

  void validate() const;
};

struct FitnessRecord {
  double f_obj = 0.0;
  std::optional<double> f_sub;
  double combined = 0.0;
  bool feasible = true;
  std::size_t violation_count = 0;
  bool removal_penalized = false;
};

/// Maximin score scaled to [0, 1]: (1 + raw) / 2. Below 0.5 means
/// non-dominated with respect to the reference set. A reference set that is
/// empty after self-exclusion yields 0.
double maximin(const ObjectiveVector& s, std::span<const ObjectiveVector> reference,
               std::size_t self = kernels::npos);

/// Applies the weighted sum, or f_obj alone when f_sub is undefined.
/// Infeasible or removal-penalized solutions get the worst value, 1.
FitnessRecord make_record(double f_obj, std::optional<double> f_sub,
                          const FeasibilityReport& feasibility, bool removal_penalized,
                          const FitnessConfig& cfg);

/// Three-way comparison without the index tie-break: negative when `a` is
/// better. Order: combined, feasibility, violation count, f_obj.
int compare(const FitnessRecord& a, const FitnessRecord& b);

/// Strict total order used by tournaments and replacement; equal records
/// fall back to the lower index.
inline bool better(const FitnessRecord& a, std::size_t ia, const FitnessRecord& b, std::size_t ib) {
  const int c = compare(a, b);
  return c != 0 ? c < 0 : ia < ib;
}

/// Scores a whole population against itself (Z = population).
std::vector<FitnessRecord> evaluate_population(std::span<const Architecture> population,
                                               const PreferenceStore& store, const Problem& problem,
                                               const FitnessConfig& cfg,
                                               Execution ex = Execution::parallel);

}  // namespace archevo
