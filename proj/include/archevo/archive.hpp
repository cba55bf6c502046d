#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "archevo/individual.hpp"

namespace archevo {

struct ArchiveConfig {
  double tau0 = 0.05;       // initial territory size
  double tau_final = 0.005; // lower bound for every territory
  double decrease = 0.5;    // factor applied after each interaction

  void validate() const;
};

using RegionWeights = std::array<double, kObjectiveCount>;

/// The 13 fixed region weight vectors: the three axes, the barycenter, the
/// six mixed thirds (2/3, 1/3, 0) and the three edge midpoints.
std::vector<RegionWeights> default_region_weights();

/// Region minimizing max_k w_k * v_k; ties go to the lowest index.
std::size_t preferred_region(const ObjectiveVector& v, std::span<const RegionWeights> regions);

/// Bounded archive of non-dominated solutions kept apart by per-region
/// territories (rectilinear distance), with user-preserved members.
class TerritoryArchive {
 public:
  struct Member {
    Individual individual;
    std::size_t region;
  };

  enum class Outcome { present, rejected, accepted, replaced };

  explicit TerritoryArchive(ArchiveConfig cfg = {},
                            std::vector<RegionWeights> regions = default_region_weights());

  /// One iteration of the update loop for a single individual.
  Outcome consider(const Individual& ind, bool user_selected = false);

  /// Runs `consider` over every population member in order.
  void update(std::span<const Individual> population);

  /// Shrinks the territory of the region holding the member with the best
  /// (lowest) f_sub: tau <- max(tau_final, decrease * tau). No-op when the
  /// archive is empty or no member has a defined f_sub.
  void reduce_after_interaction();

  const std::vector<Member>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(std::uint64_t uid) const;

  std::span<const RegionWeights> regions() const noexcept { return regions_; }
  std::span<const double> territories() const noexcept { return tau_; }
  const ArchiveConfig& config() const noexcept { return cfg_; }

  /// Lets the owner refresh cached fitness of members (objective vectors must
  /// not change).
  void refresh(const std::function<void(Individual&)>& fn);

 private:
  std::size_t count_overlaps(const ObjectiveVector& v) const;

  ArchiveConfig cfg_;
  std::vector<RegionWeights> regions_;
  std::vector<double> tau_;
  std::vector<Member> members_;
};

}  // namespace archevo
