#pragma once

#include <cstdint>

#include "archevo/architecture.hpp"
#include "archevo/fitness.hpp"
#include "archevo/metrics.hpp"

namespace archevo {

struct Individual {
  std::uint64_t uid = 0;  // unique per created solution; copies keep it
  Architecture architecture;
  MetricVector raw;
  ObjectiveVector objectives{};
  FeasibilityReport feasibility;
  FitnessRecord fitness;
  bool marked_for_removal = false;
  bool preserved = false;  // user-selected; never evicted
};

/// Pareto dominance on minimized objectives.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  bool strictly = false;
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    if (a[k] > b[k]) return false;
    strictly = strictly || a[k] < b[k];
  }
  return strictly;
}

inline double rectilinear(const ObjectiveVector& a, const ObjectiveVector& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < kObjectiveCount; ++k) d += a[k] > b[k] ? a[k] - b[k] : b[k] - a[k];
  return d;
}

}  // namespace archevo
