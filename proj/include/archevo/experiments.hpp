#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "archevo/engine.hpp"
#include "archevo/interaction.hpp"
#include "archevo/io.hpp"

namespace archevo {

/// Members of `points` not dominated by any other member. Duplicates are kept.
std::vector<ObjectiveVector> nondominated(std::span<const ObjectiveVector> points);

/// Exact 3-D hypervolume dominated by `front` with reference point (1,1,1).
/// Points outside the unit cube are clipped to it. Empty front gives 0.
double hypervolume(std::span<const ObjectiveVector> front);

/// Schott's spacing with rectilinear nearest-neighbour distances; nullopt for
/// fewer than two points.
std::optional<double> spacing(std::span<const ObjectiveVector> front);

/// Smallest component count among the most frequent ones.
std::size_t modal_component_count(std::span<const Individual> population);

struct RunSummary {
  std::uint64_t seed = 0;
  std::vector<ObjectiveVector> front;  // final archive (or NSGA-II first front)
  std::size_t front_size = 0;
  GenerationStats initial;
  GenerationStats final;
  std::size_t modal_components = 0;
  std::size_t evaluations = 0;
  double runtime_ms = 0.0;
};

/// Summary of an engine's current state; runtime_ms is left at 0.
RunSummary summarize_engine(const Engine& engine, const GenerationStats& initial);
/// Per-run record as written to experiment reports (adds hv and spacing).
OrderedJson run_summary_to_json(const RunSummary& r);

using GenerationCallback = std::function<void(const Engine&)>;

/// Non-interactive steady-state run.
RunSummary run_bmoea(const Problem& problem, const EngineConfig& cfg,
                     const GenerationCallback& on_generation = {});

/// Interactive run driven by a scripted decision maker with cfg.interactions
/// stops of cfg.candidates solutions.
RunSummary run_imoea(const Problem& problem, const EngineConfig& cfg, const PolicySpec& policy,
                     const RunHooks& hooks = {});

struct Nsga2Result {
  RunSummary summary;
  std::vector<Individual> population;
};

/// Generational NSGA-II with the same encoding, mutation operator and
/// evaluation budget; constraint-domination for infeasible solutions.
Nsga2Result run_nsga2(const Problem& problem, const EngineConfig& cfg);

struct InstanceSpec {
  std::string name;
  std::optional<std::filesystem::path> model_path;
  std::optional<GeneratorSpec> generator;
};

struct ExperimentSpec {
  std::vector<InstanceSpec> instances;
  std::vector<std::string> algorithms;  // "bmoea", "imoea", "nsga2"
  std::optional<PolicySpec> policy;     // required for imoea
  std::vector<double> tau0;             // empty: keep config default
  std::vector<std::uint64_t> seeds;
  EngineConfig config;
  std::optional<std::filesystem::path> output;
  std::size_t log_every = 0;  // 0 disables per-generation logs
  bool timing = false;        // runtime_ms stays 0 unless enabled
};

/// Relative paths in the experiment file resolve against `base`.
ExperimentSpec experiment_from_json(const Json& j, const std::filesystem::path& base = {});
ExperimentSpec load_experiment(const std::filesystem::path& path);
GeneratorSpec generator_from_json(const Json& j);

struct ConfigurationReport {
  std::string instance;
  std::string algorithm;
  std::optional<double> tau0;
  std::vector<RunSummary> runs;
};

struct ExperimentReport {
  std::vector<ConfigurationReport> configurations;
};

/// Runs every (instance, algorithm, tau0, seed) combination, seeds in
/// parallel, and writes report.json, report.csv and optional logs when an
/// output directory is set.
ExperimentReport run_experiment(const ExperimentSpec& spec);

OrderedJson report_to_json(const ExperimentReport& report);
std::string report_to_csv(const ExperimentReport& report);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};
MeanStd mean_std(std::span<const double> values);

}  // namespace archevo
