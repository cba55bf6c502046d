#include "archevo/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "archevo/errors.hpp"

namespace archevo {

double ErpWeights::of(RelationKind kind) const {
  switch (kind) {
    case RelationKind::association: return as;
    case RelationKind::aggregation: return ag;
    case RelationKind::composition: return co;
    case RelationKind::generalization: return ge;
    case RelationKind::dependency: return 0.0;
  }
  return 0.0;
}

void ErpWeights::validate() const {
  if (as < 0 || ag < 0 || co < 0 || ge < 0) throw ConfigError("ERP weights must be non-negative");
  if (as + ag + co + ge <= 0) throw ConfigError("ERP weights must not all be zero");
}

namespace {

// Penalty a relationship contributes when it crosses a component boundary.
// Navigable relationships become interfaces and cost nothing.
double crossing_penalty(const Edge& e, const ErpWeights& w) {
  if (e.kind == RelationKind::generalization) return w.ge;
  if (e.navigable) return 0.0;
  return w.of(e.kind);
}

std::size_t total_groups(const Architecture& arch, const AnalysisModel& model) {
  const auto& owner = arch.owners();
  std::vector<std::uint32_t> parent(owner.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto root = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t groups = owner.size();
  for (const Edge& e : model.edges()) {
    if (owner[e.source] != owner[e.target]) continue;
    const auto a = root(e.source);
    const auto b = root(e.target);
    if (a != b) {
      parent[a] = b;
      --groups;
    }
  }
  return groups;
}

}  // namespace

MetricVector compute_metrics(const Architecture& arch, const AnalysisModel& model,
                             const ErpWeights& weights) {
  const std::size_t n = arch.size();
  const auto& owner = arch.owners();
  std::vector<std::size_t> ci_in(n, 0), ci_out(n, 0);
  double erp = 0.0;
  for (const Edge& e : model.edges()) {
    const auto a = owner[e.source];
    const auto b = owner[e.target];
    if (a == b) {
      ++ci_in[a];
    } else {
      ++ci_out[a];
      ++ci_out[b];
      erp += crossing_penalty(e, weights);
    }
  }
  const double total = static_cast<double>(model.class_count());
  double icd_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t rel = ci_in[i] + ci_out[i];
    if (rel == 0) continue;
    const double size_term = (total - static_cast<double>(arch.components()[i].classes.size())) / total;
    icd_sum += size_term * (static_cast<double>(ci_in[i]) / static_cast<double>(rel));
  }
  MetricVector mv;
  mv.icd = icd_sum / static_cast<double>(n);
  mv.erp = erp;
  mv.gcr = static_cast<double>(total_groups(arch, model)) / static_cast<double>(n);
  return mv;
}

double compute_icd(const Architecture& arch, const AnalysisModel& model) {
  return compute_metrics(arch, model, ErpWeights{}).icd;
}

double compute_erp(const Architecture& arch, const AnalysisModel& model, const ErpWeights& weights) {
  return compute_metrics(arch, model, weights).erp;
}

double compute_gcr(const Architecture& arch, const AnalysisModel& model) {
  return static_cast<double>(total_groups(arch, model)) / static_cast<double>(arch.size());
}

NormalizationBounds NormalizationBounds::for_model(const AnalysisModel& model,
                                                   const ErpWeights& weights, std::size_t n_min) {
  NormalizationBounds b;
  for (const Edge& e : model.edges()) b.erp_max += crossing_penalty(e, weights);
  b.gcr_max = static_cast<double>(model.class_count()) / static_cast<double>(std::max<std::size_t>(n_min, 1));
  return b;
}

ObjectiveVector normalize(const MetricVector& m, const NormalizationBounds& b) {
  ObjectiveVector f;
  f[0] = 1.0 - m.icd;
  f[1] = b.erp_max > 0.0 ? m.erp / b.erp_max : 0.0;
  f[2] = b.gcr_max > 1.0 ? (m.gcr - 1.0) / (b.gcr_max - 1.0) : 0.0;
  for (double& v : f) v = std::clamp(v, 0.0, 1.0);
  return f;
}

}  // namespace archevo
