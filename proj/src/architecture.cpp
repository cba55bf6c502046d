#include "archevo/architecture.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "archevo/errors.hpp"

namespace archevo {

namespace {

constexpr std::uint32_t kUnassigned = UINT32_MAX;

std::uint32_t find_root(std::vector<std::uint32_t>& parent, std::uint32_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

Architecture::Architecture(std::vector<Component> components, std::size_t class_count)
    : components_(std::move(components)), owner_(class_count, kUnassigned) {
  for (std::uint32_t i = 0; i < components_.size(); ++i) {
    auto& cls = components_[i].classes;
    if (cls.empty()) throw ValidationError("component " + std::to_string(i) + " is empty");
    std::sort(cls.begin(), cls.end());
    for (ClassIndex c : cls) {
      if (c >= class_count) throw ValidationError("class index out of range");
      if (owner_[c] != kUnassigned) {
        throw ValidationError("class index " + std::to_string(c) + " placed in two components");
      }
      owner_[c] = i;
    }
  }
  for (std::size_t c = 0; c < class_count; ++c) {
    if (owner_[c] == kUnassigned) {
      throw ValidationError("class index " + std::to_string(c) + " is not placed in any component");
    }
  }
}

Architecture Architecture::with_frozen(std::span<const std::size_t> indices) const {
  Architecture copy = *this;
  for (std::size_t i : indices) {
    if (i >= copy.components_.size()) {
      throw ValidationError("component index " + std::to_string(i) + " out of range");
    }
    copy.components_[i].frozen = true;
  }
  return copy;
}

Architecture random_architecture(const AnalysisModel& model, std::size_t n_min, std::size_t n_max,
                                 Rng& rng) {
  const std::size_t total = model.class_count();
  if (n_min < 2) throw ConfigError("n_min must be at least 2");
  if (n_max < n_min) throw ConfigError("n_max must be >= n_min");
  if (n_min > total) throw ConfigError("n_min exceeds the number of classes");
  const std::size_t n = rng.between(n_min, std::min(n_max, total));

  // Seed each component with one distinct class, then scatter the rest.
  std::vector<ClassIndex> order(total);
  std::iota(order.begin(), order.end(), ClassIndex{0});
  rng.shuffle(std::span<ClassIndex>(order));
  std::vector<Component> comps(n);
  for (std::size_t i = 0; i < n; ++i) comps[i].classes.push_back(order[i]);
  for (std::size_t i = n; i < total; ++i) comps[rng.index(n)].classes.push_back(order[i]);
  return Architecture(std::move(comps), total);
}

Architecture architecture_from_ids(const AnalysisModel& model,
                                   const std::vector<std::vector<std::string>>& groups) {
  std::vector<Component> comps;
  comps.reserve(groups.size());
  for (const auto& group : groups) {
    Component comp;
    for (const auto& id : group) {
      auto idx = model.class_index(id);
      if (!idx) throw ValidationError("unknown class id '" + id + "'");
      comp.classes.push_back(*idx);
    }
    comps.push_back(std::move(comp));
  }
  return Architecture(std::move(comps), model.class_count());
}

std::vector<ProvidedInterface> derive_interfaces(const Architecture& arch,
                                                 const AnalysisModel& model) {
  // (consumer, provider) -> required provider-side classes
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<ClassIndex>> required;
  for (const Edge& e : model.edges()) {
    if (!e.navigable) continue;
    const auto consumer = arch.owner(e.source);
    const auto provider = arch.owner(e.target);
    if (consumer == provider) continue;
    required[{consumer, provider}].push_back(e.target);
  }

  std::map<std::pair<std::uint32_t, std::vector<ClassIndex>>, std::vector<std::uint32_t>> merged;
  for (auto& [key, classes] : required) {
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    merged[{key.second, classes}].push_back(key.first);
  }

  std::vector<ProvidedInterface> out;
  out.reserve(merged.size());
  for (auto& [key, consumers] : merged) {
    ProvidedInterface itf;
    itf.provider = key.first;
    itf.exposed_classes = key.second;
    for (ClassIndex c : itf.exposed_classes) {
      for (const auto& m : model.public_methods(c)) itf.operations.push_back({c, m});
    }
    std::sort(itf.operations.begin(), itf.operations.end());
    std::sort(consumers.begin(), consumers.end());
    itf.consumers = std::move(consumers);
    out.push_back(std::move(itf));
  }
  return out;
}

FeasibilityReport check_feasibility(const Architecture& arch, const AnalysisModel& model) {
  const std::size_t n = arch.size();
  // provides[p * n + c]: component p provides an interface to component c
  std::vector<char> provides(n * n, 0);
  std::vector<char> has_interface(n, 0);
  for (const Edge& e : model.edges()) {
    if (!e.navigable) continue;
    const auto consumer = arch.owner(e.source);
    const auto provider = arch.owner(e.target);
    if (consumer == provider) continue;
    provides[provider * n + consumer] = 1;
    has_interface[provider] = 1;
    has_interface[consumer] = 1;
  }
  FeasibilityReport report;
  for (std::size_t i = 0; i < n; ++i) {
    if (arch.components()[i].classes.empty()) ++report.empty_component;
    if (!has_interface[i]) ++report.interfaceless_component;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (provides[i * n + j] && provides[j * n + i]) ++report.mutual_provision_pair;
    }
  }
  report.feasible = report.violation_count() == 0;
  return report;
}

std::size_t connected_groups(const Component& component, const AnalysisModel& model) {
  const auto& cls = component.classes;
  std::vector<std::uint32_t> parent(cls.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto local = [&](ClassIndex c) -> std::uint32_t {
    auto it = std::lower_bound(cls.begin(), cls.end(), c);
    if (it == cls.end() || *it != c) return kUnassigned;
    return static_cast<std::uint32_t>(it - cls.begin());
  };
  std::size_t groups = cls.size();
  for (const Edge& e : model.edges()) {
    const auto a = local(e.source);
    const auto b = local(e.target);
    if (a == kUnassigned || b == kUnassigned) continue;
    const auto ra = find_root(parent, a);
    const auto rb = find_root(parent, b);
    if (ra != rb) {
      parent[ra] = rb;
      --groups;
    }
  }
  return groups;
}

}  // namespace archevo
