#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "archevo/archive.hpp"
#include "archevo/fitness.hpp"
#include "archevo/individual.hpp"
#include "archevo/kernels.hpp"
#include "archevo/preferences.hpp"
#include "archevo/problem.hpp"
#include "archevo/rng.hpp"

namespace archevo {

struct MutationWeights {
  double add = 0.2;
  double remove = 0.1;
  double merge = 0.1;
  double split = 0.3;
  double move = 0.3;

  void validate() const;
};

enum class MutationOp : std::uint8_t { add, remove, merge, split, move };

struct EngineConfig {
  std::size_t population_size = 150;
  std::size_t max_evaluations = 24000;
  std::size_t n_min = 2;
  std::size_t n_max = 6;
  MutationWeights mutation;
  ErpWeights erp;
  FitnessConfig fitness;
  ArchiveConfig archive;
  std::size_t interactions = 3;  // stops per interactive run
  std::size_t candidates = 3;    // solutions shown per stop
  std::uint64_t seed = 1;
  Execution execution = Execution::parallel;

  void validate() const;
  ComponentBounds bounds() const { return {n_min, n_max}; }
  /// floor((max_evaluations - population_size) / 2)
  std::size_t generations() const;
};

/// Operations whose outcome keeps the component count within bounds and
/// which have at least one non-frozen target.
std::vector<MutationOp> allowed_operations(const Architecture& arch, ComponentBounds bounds);

/// Applies one transformation to non-frozen components. Returns nullopt when
/// the operation has no legal target.
std::optional<Architecture> apply_mutation(MutationOp op, const Architecture& parent, Rng& rng);

struct MutationResult {
  Architecture architecture;
  bool changed = false;
  std::size_t attempts = 0;
};

/// Roulette over the allowed operations, retried up to 10 times until the
/// mutant is feasible; otherwise the parent is returned unchanged.
MutationResult mutate(const Architecture& parent, const Problem& problem,
                      const MutationWeights& weights, Rng& rng);

inline constexpr std::size_t kMaxMutationAttempts = 10;

struct GenerationStats {
  std::size_t generation = 0;
  std::size_t evaluations = 0;
  double best_combined = 0.0;
  double mean_combined = 0.0;
  MetricVector population_mean;
  ObjectiveVector population_mean_normalized{};
  MetricVector archive_mean;
  ObjectiveVector archive_mean_normalized{};
  std::size_t archive_size = 0;
  std::vector<std::size_t> component_histogram;  // index = component count
};

/// Steady-state evolutionary loop. Single writer of its own state.
class Engine {
 public:
  /// Builds and scores the initial population and seeds the archive.
  Engine(Problem problem, EngineConfig cfg);

  const EngineConfig& config() const noexcept { return cfg_; }
  const Problem& problem() const noexcept { return problem_; }
  std::span<const Individual> population() const noexcept { return population_; }
  const TerritoryArchive& archive() const noexcept { return archive_; }
  const PreferenceStore& preferences() const noexcept { return store_; }
  Rng& rng() noexcept { return rng_; }

  std::size_t generation() const noexcept { return generation_; }
  std::size_t evaluations_used() const noexcept { return evaluations_; }
  std::size_t total_generations() const noexcept { return total_generations_; }
  bool stop_requested() const noexcept { return stop_requested_; }
  bool finished() const noexcept { return stop_requested_ || generation_ >= total_generations_; }

  /// Binary tournament on the population and one on the archive (population
  /// again while the archive is empty).
  std::pair<Individual, Individual> select_parents();

  /// One generation: two offspring, replacement, fitness refresh and archive
  /// update. No-op once finished().
  void step();

  GenerationStats stats() const;

  // Hooks used by the interaction layer.
  const Individual* find(std::uint64_t uid) const;
  void add_preferences(std::size_t interaction_index, std::vector<Preference> prefs);
  void mark_for_removal(std::uint64_t uid);
  void preserve(std::uint64_t uid);
  void freeze(std::uint64_t uid, std::span<const std::size_t> components);
  void request_stop() noexcept { stop_requested_ = true; }
  /// Refreshes fitness with the current preferences and shrinks the territory
  /// around the best-f_sub archive member.
  void finish_interaction();

 private:
  Individual make_individual(Architecture arch);
  void refresh_fitness();
  void replace(std::array<Individual, 2> offspring);
  template <class FitnessAt>
  std::size_t tournament(std::size_t size, FitnessAt&& fitness_at);
  Individual* find_mut(std::uint64_t uid);

  Problem problem_;
  EngineConfig cfg_;
  Rng rng_;
  PreferenceStore store_;
  std::vector<Individual> population_;
  TerritoryArchive archive_;
  std::size_t generation_ = 0;
  std::size_t evaluations_ = 0;
  std::size_t total_generations_ = 0;
  std::uint64_t next_uid_ = 1;
  bool stop_requested_ = false;
};

}  // namespace archevo
