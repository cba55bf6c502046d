#pragma once

#include <array>

#include "archevo/architecture.hpp"
#include "archevo/model.hpp"

namespace archevo {

inline constexpr std::size_t kObjectiveCount = 3;

/// Normalized minimization objectives: (1 - ICD, ERP / ERP_max, (GCR - 1) / (GCR_max - 1)).
using ObjectiveVector = std::array<double, kObjectiveCount>;

struct ErpWeights {
  double as = 1.0;
  double ag = 2.0;
  double co = 3.0;
  double ge = 5.0;

  double of(RelationKind kind) const;
  void validate() const;
};

/// Raw metric values as shown to the user.
struct MetricVector {
  double icd = 0.0;  // maximize, [0, 1]
  double erp = 0.0;  // minimize, >= 0
  double gcr = 1.0;  // minimize, >= 1
};

double compute_icd(const Architecture& arch, const AnalysisModel& model);
double compute_erp(const Architecture& arch, const AnalysisModel& model, const ErpWeights& weights);
double compute_gcr(const Architecture& arch, const AnalysisModel& model);

/// All three metrics in a single pass over the relationships.
MetricVector compute_metrics(const Architecture& arch, const AnalysisModel& model,
                             const ErpWeights& weights);

/// Model constants used to scale ERP and GCR into [0, 1].
struct NormalizationBounds {
  double erp_max = 0.0;
  double gcr_max = 1.0;

  static NormalizationBounds for_model(const AnalysisModel& model, const ErpWeights& weights,
                                       std::size_t n_min);
};

ObjectiveVector normalize(const MetricVector& metrics, const NormalizationBounds& bounds);

}  // namespace archevo
