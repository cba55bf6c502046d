#include "archevo/archive.hpp"

#include <algorithm>
#include <limits>

#include "archevo/errors.hpp"

namespace archevo {

void ArchiveConfig::validate() const {
  if (!(tau_final > 0.0)) throw ConfigError("final territory size must be positive");
  if (!(tau0 >= tau_final)) throw ConfigError("initial territory size must be >= final size");
  if (!(decrease > 0.0 && decrease < 1.0)) throw ConfigError("territory decrease factor must lie in (0, 1)");
}

std::vector<RegionWeights> default_region_weights() {
  constexpr double third = 1.0 / 3.0;
  constexpr double two_thirds = 2.0 / 3.0;
  return {
      {1.0, 0.0, 0.0},         {0.0, 1.0, 0.0},         {0.0, 0.0, 1.0},
      {third, third, third},
      {two_thirds, third, 0.0}, {two_thirds, 0.0, third}, {third, two_thirds, 0.0},
      {0.0, two_thirds, third}, {third, 0.0, two_thirds}, {0.0, third, two_thirds},
      {0.5, 0.5, 0.0},         {0.5, 0.0, 0.5},         {0.0, 0.5, 0.5},
  };
}

std::size_t preferred_region(const ObjectiveVector& v, std::span<const RegionWeights> regions) {
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < regions.size(); ++r) {
    double value = 0.0;
    for (std::size_t k = 0; k < kObjectiveCount; ++k) value = std::max(value, regions[r][k] * v[k]);
    if (value < best_value) {
      best_value = value;
      best = r;
    }
  }
  return best;
}

TerritoryArchive::TerritoryArchive(ArchiveConfig cfg, std::vector<RegionWeights> regions)
    : cfg_(cfg), regions_(std::move(regions)), tau_(regions_.size(), cfg.tau0) {
  if (regions_.empty()) throw ConfigError("archive needs at least one region");
}

bool TerritoryArchive::contains(std::uint64_t uid) const {
  return std::any_of(members_.begin(), members_.end(),
                     [&](const Member& m) { return m.individual.uid == uid; });
}

std::size_t TerritoryArchive::count_overlaps(const ObjectiveVector& v) const {
  std::size_t n = 0;
  for (const Member& m : members_) {
    if (rectilinear(v, m.individual.objectives) < tau_[m.region]) ++n;
  }
  return n;
}

TerritoryArchive::Outcome TerritoryArchive::consider(const Individual& ind, bool user_selected) {
  if (contains(ind.uid)) {
    if (user_selected) {
      for (Member& m : members_) {
        if (m.individual.uid == ind.uid) m.individual.preserved = true;
      }
    }
    return Outcome::present;
  }
  if (!user_selected && !ind.feasibility.feasible) return Outcome::rejected;

  const ObjectiveVector& v = ind.objectives;
  const std::size_t region = preferred_region(v, regions_);
  const double t = tau_[region];

  std::size_t closest = members_.size();
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const double di = rectilinear(v, members_[i].individual.objectives);
    if (di < d) {
      d = di;
      closest = i;
    }
  }

  bool accept = false;
  bool replaced = false;
  if (user_selected) {
    accept = true;
    if (d < t) tau_[region] = std::max(cfg_.tau_final, d);
  } else {
    const bool dominated = std::any_of(members_.begin(), members_.end(), [&](const Member& m) {
      return dominates(m.individual.objectives, v);
    });
    if (!dominated) {
      if (d > t) {
        accept = true;
      } else {
        const Individual& s = members_[closest].individual;
        // lower f_sub means better preference satisfaction
        const bool improves = ind.fitness.f_sub && s.fitness.f_sub && *ind.fitness.f_sub < *s.fitness.f_sub;
        if (count_overlaps(v) == 1 && improves && !s.preserved) {
          accept = true;
          replaced = true;
          members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(closest));
        }
      }
    }
  }
  if (!accept) return Outcome::rejected;

  std::erase_if(members_, [&](const Member& m) {
    return !m.individual.preserved && dominates(v, m.individual.objectives);
  });
  Member added{ind, region};
  added.individual.preserved = added.individual.preserved || user_selected;
  added.individual.marked_for_removal = false;
  members_.push_back(std::move(added));
  return replaced ? Outcome::replaced : Outcome::accepted;
}

void TerritoryArchive::update(std::span<const Individual> population) {
  for (const Individual& ind : population) consider(ind, false);
}

void TerritoryArchive::reduce_after_interaction() {
  const Member* best = nullptr;
  for (const Member& m : members_) {
    if (!m.individual.fitness.f_sub) continue;
    if (!best || *m.individual.fitness.f_sub < *best->individual.fitness.f_sub) best = &m;
  }
  if (!best) return;
  double& tau = tau_[best->region];
  tau = std::max(cfg_.tau_final, cfg_.decrease * tau);
}

void TerritoryArchive::refresh(const std::function<void(Individual&)>& fn) {
  for (Member& m : members_) fn(m.individual);
}

}  // namespace archevo
