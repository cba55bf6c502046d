#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "archevo/architecture.hpp"
#include "archevo/metrics.hpp"

namespace archevo {

enum class PreferenceKind : std::uint8_t {
  none,
  best_component,
  worst_component,
  best_interface,
  worst_interface,
  number_of_components,
  metric_in_range,
  aspiration_levels,
};

std::string_view to_string(PreferenceKind kind);
std::optional<PreferenceKind> preference_kind_from_string(std::string_view token);

enum class MetricId : std::uint8_t { icd = 0, erp = 1, gcr = 2 };

/// Throws ConfigError for an unknown metric id.
MetricId metric_id_from_string(std::string_view token);
std::string_view to_string(MetricId id);

struct ComponentTarget {
  std::vector<ClassIndex> classes;  // sorted
  bool operator==(const ComponentTarget&) const = default;
};

struct InterfaceTarget {
  std::vector<Operation> operations;  // sorted
  bool operator==(const InterfaceTarget&) const = default;
};

struct ComponentCount {
  std::size_t preferred = 0;
  bool operator==(const ComponentCount&) const = default;
};

/// Range over one normalized objective.
struct MetricRange {
  MetricId metric = MetricId::icd;
  double min = 0.0;
  double max = 1.0;
  bool operator==(const MetricRange&) const = default;
};

struct AspirationLevels {
  ObjectiveVector reference{};
  std::array<double, kObjectiveCount> weights{1.0, 1.0, 1.0};
  bool operator==(const AspirationLevels&) const = default;
};

using PreferencePayload = std::variant<std::monostate, ComponentTarget, InterfaceTarget,
                                       ComponentCount, MetricRange, AspirationLevels>;

struct Preference {
  PreferenceKind kind = PreferenceKind::none;
  PreferencePayload payload;
  int confidence = 3;  // Likert 1..5
  std::size_t interaction_index = 0;

  bool operator==(const Preference&) const = default;
};

struct ComponentBounds {
  std::size_t n_min = 2;
  std::size_t n_max = 6;
};

/// Checks payload/kind consistency and value ranges. Throws ValidationError.
void validate_preference(const Preference& pref, const AnalysisModel& model, ComponentBounds bounds);

/// |a ∩ b| / |a ∪ b| over sorted, duplicate-free ranges; two empty sets give 1.
template <class T>
double jaccard(std::span<const T> a, std::span<const T> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

template <class T>
double jaccard(const std::vector<T>& a, const std::vector<T>& b) {
  return jaccard(std::span<const T>(a), std::span<const T>(b));
}

/// Degree of achievement in [0, 1]. `interfaces` must be the output of
/// derive_interfaces(arch, model) for the interface kinds; it is ignored for
/// the others.
double achievement(const Preference& pref, const Architecture& arch,
                   std::span<const ProvidedInterface> interfaces, const ObjectiveVector& objectives,
                   ComponentBounds bounds);

/// Convenience overload that derives interfaces when the kind needs them.
double achievement(const Preference& pref, const Architecture& arch, const AnalysisModel& model,
                   const ObjectiveVector& objectives, ComponentBounds bounds);

/// Likert levels of one interaction scaled to sum to 1.
std::vector<double> normalize_confidences(std::span<const int> likert);

/// Append-only list of preferences with per-interaction weights.
class PreferenceStore {
 public:
  struct Entry {
    Preference preference;
    double weight;
  };

  /// Adds all non-`none` preferences entered at one stop. Throws ProtocolError
  /// if the interaction index was already recorded.
  void add_interaction(std::size_t interaction_index, std::vector<Preference> prefs);

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool needs_interfaces() const noexcept { return needs_interfaces_; }

 private:
  std::vector<Entry> entries_;
  std::vector<std::size_t> recorded_;
  bool needs_interfaces_ = false;
};

/// 1 - (1/P) Σ w_p · achievement_p, or nullopt for an empty store.
std::optional<double> subjective_fitness(const PreferenceStore& store, const Architecture& arch,
                                         const AnalysisModel& model,
                                         const ObjectiveVector& objectives, ComponentBounds bounds);

}  // namespace archevo
