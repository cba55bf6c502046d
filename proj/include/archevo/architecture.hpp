#pragma once

#include <compare>
#include <span>
#include <cstdint>
#include <string>
#include <vector>

#include "archevo/model.hpp"
#include "archevo/rng.hpp"

namespace archevo {

struct Component {
  std::vector<ClassIndex> classes;  // sorted ascending, non-empty
  bool frozen = false;

  bool operator==(const Component&) const = default;
};

/// A partition of the model's classes into components.
class Architecture {
 public:
  Architecture() = default;
  /// Sorts each component's class list and checks the partition property
  /// (every class in exactly one non-empty component). Throws ValidationError.
  Architecture(std::vector<Component> components, std::size_t class_count);

  const std::vector<Component>& components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }
  std::size_t class_count() const noexcept { return owner_.size(); }
  std::uint32_t owner(ClassIndex c) const { return owner_[c]; }
  const std::vector<std::uint32_t>& owners() const noexcept { return owner_; }

  /// Copy with the given components marked frozen. Throws ValidationError on
  /// an out-of-range index.
  Architecture with_frozen(std::span<const std::size_t> indices) const;

  bool operator==(const Architecture& other) const { return components_ == other.components_; }

 private:
  std::vector<Component> components_;
  std::vector<std::uint32_t> owner_;
};

/// Uniform component count in [n_min, n_max], then a random surjective
/// assignment of classes. Interface constraints are not enforced.
Architecture random_architecture(const AnalysisModel& model, std::size_t n_min, std::size_t n_max,
                                 Rng& rng);

/// Builds an architecture from groups of class ids. Throws ValidationError.
Architecture architecture_from_ids(const AnalysisModel& model,
                                   const std::vector<std::vector<std::string>>& groups);

struct Operation {
  ClassIndex cls;
  std::string method;

  auto operator<=>(const Operation&) const = default;
  bool operator==(const Operation&) const = default;
};

struct ProvidedInterface {
  std::uint32_t provider;
  std::vector<ClassIndex> exposed_classes;  // sorted
  std::vector<Operation> operations;        // sorted
  std::vector<std::uint32_t> consumers;     // sorted

  bool operator==(const ProvidedInterface&) const = default;
};

/// One interface per (provider, exposed class set); consumers that require the
/// same class set share it. Sorted by (provider, exposed_classes).
std::vector<ProvidedInterface> derive_interfaces(const Architecture& arch,
                                                 const AnalysisModel& model);

struct FeasibilityReport {
  bool feasible = true;
  std::size_t empty_component = 0;
  std::size_t interfaceless_component = 0;
  std::size_t mutual_provision_pair = 0;

  std::size_t violation_count() const {
    return empty_component + interfaceless_component + mutual_provision_pair;
  }
  bool operator==(const FeasibilityReport&) const = default;
};

FeasibilityReport check_feasibility(const Architecture& arch, const AnalysisModel& model);

/// Connected groups inside one component; every relationship with both ends
/// inside counts as an undirected edge.
std::size_t connected_groups(const Component& component, const AnalysisModel& model);

}  // namespace archevo
