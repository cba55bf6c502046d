#include "archevo/preferences.hpp"

#include <cmath>
#include <numeric>

#include "archevo/errors.hpp"

namespace archevo {

namespace {

constexpr std::array<std::string_view, 8> kKindTokens = {
    "none",           "best_component",       "worst_component", "best_interface",
    "worst_interface", "number_of_components", "metric_in_range", "aspiration_levels"};

constexpr std::array<std::string_view, 3> kMetricTokens = {"icd", "erp", "gcr"};

double max_component_similarity(const Architecture& arch, const ComponentTarget& target) {
  double best = 0.0;
  for (const Component& c : arch.components()) best = std::max(best, jaccard(c.classes, target.classes));
  return best;
}

double max_interface_similarity(std::span<const ProvidedInterface> interfaces,
                                const InterfaceTarget& target) {
  double best = 0.0;
  for (const auto& itf : interfaces) best = std::max(best, jaccard(itf.operations, target.operations));
  return best;
}

double component_count_achievement(std::size_t n, std::size_t preferred, ComponentBounds b) {
  if (n < preferred) {
    if (n <= b.n_min) return 0.0;
    return static_cast<double>(n - b.n_min) / static_cast<double>(preferred - b.n_min);
  }
  if (n >= b.n_max) return n == preferred ? 1.0 : 0.0;
  const double v = 1.0 - static_cast<double>(n - preferred) / static_cast<double>(b.n_max - n);
  return std::clamp(v, 0.0, 1.0);
}

double range_achievement(double m, const MetricRange& r) {
  if (m < r.min || m > r.max) return 0.0;
  const double mid = 0.5 * (r.min + r.max);
  const double half = 0.5 * (r.max - r.min);
  return std::clamp(1.0 - std::abs(m - mid) / half, 0.0, 1.0);
}

double aspiration_achievement(const ObjectiveVector& f, const AspirationLevels& a) {
  double asf = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    asf = std::max(asf, a.weights[k] * (f[k] - a.reference[k]));
  }
  if (asf <= 0.0) return 1.0;
  return std::clamp(1.0 - asf, 0.0, 1.0);
}

bool kind_needs_interfaces(PreferenceKind k) {
  return k == PreferenceKind::best_interface || k == PreferenceKind::worst_interface;
}

}  // namespace

std::string_view to_string(PreferenceKind kind) { return kKindTokens[static_cast<std::size_t>(kind)]; }

std::optional<PreferenceKind> preference_kind_from_string(std::string_view token) {
  for (std::size_t i = 0; i < kKindTokens.size(); ++i) {
    if (kKindTokens[i] == token) return static_cast<PreferenceKind>(i);
  }
  return std::nullopt;
}

MetricId metric_id_from_string(std::string_view token) {
  for (std::size_t i = 0; i < kMetricTokens.size(); ++i) {
    if (kMetricTokens[i] == token) return static_cast<MetricId>(i);
  }
  throw ConfigError("unknown metric id '" + std::string(token) + "'");
}

std::string_view to_string(MetricId id) { return kMetricTokens[static_cast<std::size_t>(id)]; }

void validate_preference(const Preference& p, const AnalysisModel& model, ComponentBounds bounds) {
  if (p.confidence < 1 || p.confidence > 5) {
    throw ValidationError("confidence must be a Likert level in 1..5");
  }
  auto wrong_payload = [&] {
    return ValidationError("payload does not match preference kind '" +
                           std::string(to_string(p.kind)) + "'");
  };
  switch (p.kind) {
    case PreferenceKind::none: break;
    case PreferenceKind::best_component:
    case PreferenceKind::worst_component: {
      const auto* t = std::get_if<ComponentTarget>(&p.payload);
      if (!t) throw wrong_payload();
      if (t->classes.empty()) throw ValidationError("reference component is empty");
      if (!std::is_sorted(t->classes.begin(), t->classes.end()) ||
          std::adjacent_find(t->classes.begin(), t->classes.end()) != t->classes.end()) {
        throw ValidationError("reference component classes must be sorted and unique");
      }
      if (t->classes.back() >= model.class_count()) throw ValidationError("unknown class in reference component");
      break;
    }
    case PreferenceKind::best_interface:
    case PreferenceKind::worst_interface: {
      const auto* t = std::get_if<InterfaceTarget>(&p.payload);
      if (!t) throw wrong_payload();
      if (t->operations.empty()) throw ValidationError("reference interface has no operations");
      for (const auto& op : t->operations) {
        if (op.cls >= model.class_count()) throw ValidationError("unknown class in reference interface");
      }
      break;
    }
    case PreferenceKind::number_of_components: {
      const auto* t = std::get_if<ComponentCount>(&p.payload);
      if (!t) throw wrong_payload();
      if (t->preferred < bounds.n_min || t->preferred > bounds.n_max) {
        throw ValidationError("preferred number of components outside [n_min, n_max]");
      }
      break;
    }
    case PreferenceKind::metric_in_range: {
      const auto* t = std::get_if<MetricRange>(&p.payload);
      if (!t) throw wrong_payload();
      if (!(0.0 <= t->min && t->min < t->max && t->max <= 1.0)) {
        throw ValidationError("metric range must satisfy 0 <= min < max <= 1");
      }
      break;
    }
    case PreferenceKind::aspiration_levels: {
      const auto* t = std::get_if<AspirationLevels>(&p.payload);
      if (!t) throw wrong_payload();
      for (std::size_t k = 0; k < kObjectiveCount; ++k) {
        if (!(t->reference[k] >= 0.0 && t->reference[k] <= 1.0)) {
          throw ValidationError("aspiration levels must lie in [0, 1]");
        }
        if (!(t->weights[k] >= 0.0)) throw ValidationError("aspiration weights must be non-negative");
      }
      break;
    }
  }
}

double achievement(const Preference& p, const Architecture& arch,
                   std::span<const ProvidedInterface> interfaces, const ObjectiveVector& f,
                   ComponentBounds bounds) {
  switch (p.kind) {
    case PreferenceKind::none: return 0.0;
    case PreferenceKind::best_component:
      return max_component_similarity(arch, std::get<ComponentTarget>(p.payload));
    case PreferenceKind::worst_component:
      return 1.0 - max_component_similarity(arch, std::get<ComponentTarget>(p.payload));
    case PreferenceKind::best_interface:
      return max_interface_similarity(interfaces, std::get<InterfaceTarget>(p.payload));
    case PreferenceKind::worst_interface:
      return 1.0 - max_interface_similarity(interfaces, std::get<InterfaceTarget>(p.payload));
    case PreferenceKind::number_of_components:
      return component_count_achievement(arch.size(), std::get<ComponentCount>(p.payload).preferred,
                                         bounds);
    case PreferenceKind::metric_in_range: {
      const auto& r = std::get<MetricRange>(p.payload);
      return range_achievement(f[static_cast<std::size_t>(r.metric)], r);
    }
    case PreferenceKind::aspiration_levels:
      return aspiration_achievement(f, std::get<AspirationLevels>(p.payload));
  }
  return 0.0;
}

double achievement(const Preference& p, const Architecture& arch, const AnalysisModel& model,
                   const ObjectiveVector& f, ComponentBounds bounds) {
  if (kind_needs_interfaces(p.kind)) {
    const auto itfs = derive_interfaces(arch, model);
    return achievement(p, arch, itfs, f, bounds);
  }
  return achievement(p, arch, std::span<const ProvidedInterface>{}, f, bounds);
}

std::vector<double> normalize_confidences(std::span<const int> likert) {
  const double total = std::accumulate(likert.begin(), likert.end(), 0.0);
  std::vector<double> w;
  w.reserve(likert.size());
  for (int l : likert) w.push_back(static_cast<double>(l) / total);
  return w;
}

void PreferenceStore::add_interaction(std::size_t interaction_index, std::vector<Preference> prefs) {
  if (std::find(recorded_.begin(), recorded_.end(), interaction_index) != recorded_.end()) {
    throw ProtocolError("preferences for interaction " + std::to_string(interaction_index) +
                        " were already recorded");
  }
  recorded_.push_back(interaction_index);
  std::erase_if(prefs, [](const Preference& p) { return p.kind == PreferenceKind::none; });
  if (prefs.empty()) return;
  std::vector<int> likert;
  for (const auto& p : prefs) likert.push_back(p.confidence);
  const auto weights = normalize_confidences(likert);
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    prefs[i].interaction_index = interaction_index;
    needs_interfaces_ = needs_interfaces_ || kind_needs_interfaces(prefs[i].kind);
    entries_.push_back({std::move(prefs[i]), weights[i]});
  }
}

std::optional<double> subjective_fitness(const PreferenceStore& store, const Architecture& arch,
                                         const AnalysisModel& model, const ObjectiveVector& f,
                                         ComponentBounds bounds) {
  if (store.empty()) return std::nullopt;
  std::vector<ProvidedInterface> itfs;
  if (store.needs_interfaces()) itfs = derive_interfaces(arch, model);
  double sum = 0.0;
  for (const auto& e : store.entries()) sum += e.weight * achievement(e.preference, arch, itfs, f, bounds);
  const double value = 1.0 - sum / static_cast<double>(store.size());
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace archevo
