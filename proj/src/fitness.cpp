#include "archevo/fitness.hpp"

#include <cmath>

#include "archevo/errors.hpp"

namespace archevo {

void FitnessConfig::validate() const {
  if (w_obj < 0 || w_sub < 0) throw ConfigError("fitness weights must be non-negative");
  if (std::abs(w_obj + w_sub - 1.0) > 1e-9) throw ConfigError("fitness weights must sum to 1");
}

double maximin(const ObjectiveVector& s, std::span<const ObjectiveVector> reference, std::size_t self) {
  const bool alone = reference.empty() || (reference.size() == 1 && self == 0);
  if (alone) return 0.0;
  return (1.0 + maximin_raw(s, reference, self)) / 2.0;
}

FitnessRecord make_record(double f_obj, std::optional<double> f_sub,
                          const FeasibilityReport& feasibility, bool removal_penalized,
                          const FitnessConfig& cfg) {
  FitnessRecord r;
  r.f_obj = f_obj;
  r.f_sub = f_sub;
  r.feasible = feasibility.feasible;
  r.violation_count = feasibility.violation_count();
  r.removal_penalized = removal_penalized;
  if (!r.feasible || removal_penalized) {
    r.combined = 1.0;
  } else if (f_sub) {
    r.combined = cfg.w_obj * f_obj + cfg.w_sub * *f_sub;
  } else {
    r.combined = f_obj;
  }
  return r;
}

int compare(const FitnessRecord& a, const FitnessRecord& b) {
  if (a.combined != b.combined) return a.combined < b.combined ? -1 : 1;
  if (a.feasible != b.feasible) return a.feasible ? -1 : 1;
  if (a.violation_count != b.violation_count) return a.violation_count < b.violation_count ? -1 : 1;
  if (a.f_obj != b.f_obj) return a.f_obj < b.f_obj ? -1 : 1;
  return 0;
}

std::vector<FitnessRecord> evaluate_population(std::span<const Architecture> population,
                                               const PreferenceStore& store, const Problem& problem,
                                               const FitnessConfig& cfg, Execution ex) {
  const std::size_t n = population.size();
  std::vector<const Architecture*> archs(n);
  for (std::size_t i = 0; i < n; ++i) archs[i] = &population[i];

  std::vector<Evaluation> evals(n);
  kernels::evaluate(ex, problem, archs, evals);

  std::vector<ObjectiveVector> objectives(n);
  std::vector<std::size_t> self(n);
  for (std::size_t i = 0; i < n; ++i) {
    objectives[i] = evals[i].objectives;
    self[i] = i;
  }
  std::vector<double> raw(n);
  kernels::maximin(ex, objectives, objectives, self, raw);

  std::vector<std::optional<double>> sub(n);
  kernels::subjective(ex, store, problem, archs, objectives, sub);

  std::vector<FitnessRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f_obj = n == 1 ? 0.0 : (1.0 + raw[i]) / 2.0;
    out.push_back(make_record(f_obj, sub[i], evals[i].feasibility, false, cfg));
  }
  return out;
}

}  // namespace archevo
