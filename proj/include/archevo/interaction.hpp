#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "archevo/engine.hpp"
#include "archevo/io.hpp"

namespace archevo {

struct InteractionSchedule {
  std::size_t generations = 0;
  std::vector<std::size_t> stops;  // strictly increasing generation indices
};

/// stops_i = floor(g/3) + round(i * (floor(5g/6) - floor(g/3)) / (H - 1)).
/// Throws ConfigError when H < 1, g < 6 or H exceeds the available range.
InteractionSchedule build_schedule(std::size_t generations, std::size_t interactions);

struct CandidateSet {
  std::size_t stop_index = 0;
  std::size_t generation = 0;
  std::vector<Individual> candidates;
};

/// k-means++ with k = m - 1 on the objective vectors, one representative per
/// cluster (the member nearest its centroid) plus the best-f_sub member (best
/// f_obj while no preference exists). Removal-marked and infeasible
/// individuals are skipped when at least m others are eligible.
std::vector<Individual> select_candidates(std::span<const Individual> population, std::size_t m,
                                          Rng& rng);

struct CandidateFeedback {
  std::uint64_t solution = 0;
  std::optional<Preference> preference;
  bool add_to_archive = false;
  bool remove_from_population = false;
  std::vector<std::size_t> freeze;
  bool stop_search = false;

  bool operator==(const CandidateFeedback&) const = default;
};

struct FeedbackBundle {
  std::size_t stop_index = 0;
  std::vector<CandidateFeedback> items;

  bool operator==(const FeedbackBundle&) const = default;
};

FeedbackBundle feedback_from_json(const Json& j, const AnalysisModel& model);
OrderedJson feedback_to_json(const FeedbackBundle& b, const AnalysisModel& model);
OrderedJson candidates_to_json(const CandidateSet& set, const AnalysisModel& model);

/// Drives an engine through its interaction stops. The caller alternates
/// advance() and submit(); no evaluation happens between the two.
class InteractionController {
 public:
  InteractionController(Engine& engine, InteractionSchedule schedule);

  using GenerationHook = std::function<void(const Engine&)>;

  /// Runs generations until the next stop (returning its candidates) or the
  /// end of the run (returning nullopt). `on_generation` fires after every
  /// generation.
  std::optional<CandidateSet> advance(const GenerationHook& on_generation = {});

  /// Validates the bundle against the pending stop and applies it atomically.
  /// Throws ProtocolError (nothing pending, wrong stop, unshown solution,
  /// conflicting actions, bad freeze index) or ValidationError (payload).
  void submit(const FeedbackBundle& bundle);

  const std::optional<CandidateSet>& pending() const noexcept { return pending_; }
  const InteractionSchedule& schedule() const noexcept { return schedule_; }
  std::size_t stops_done() const noexcept { return next_stop_; }
  Engine& engine() noexcept { return engine_; }

 private:
  Engine& engine_;
  InteractionSchedule schedule_;
  std::size_t next_stop_ = 0;
  std::optional<CandidateSet> pending_;
};

class DecisionMaker {
 public:
  virtual ~DecisionMaker() = default;
  virtual FeedbackBundle decide(const CandidateSet& shown, const Engine& engine) = 0;
};

/// Actions a scripted decision maker applies at every stop.
struct ScriptedActions {
  bool archive_first = false;           // add the first candidate to the archive
  bool remove_last = false;             // mark the last candidate for removal
  bool freeze_first_component = false;  // freeze component 0 of the first candidate
  std::optional<std::size_t> stop_at;   // request a stop at this stop index

  bool operator==(const ScriptedActions&) const = default;
};

struct PolicySpec {
  enum class Kind { noop, fixed_nc, target_architecture, replay };
  Kind kind = Kind::noop;
  std::size_t n = 0;  // fixed_nc
  int likert = 5;
  std::vector<std::vector<std::string>> reference;  // target_architecture
  std::vector<Json> bundles;                         // replay, wire form
  ScriptedActions actions;
};

/// `{"policy":"fixed_nc","n":4,"likert":5}`, `{"policy":"noop"}`,
/// `{"policy":"target_architecture","reference":[["C1","C2"],...],"likert":4}`,
/// `{"policy":"replay","bundles":[...]}`; each may carry an "actions" object.
PolicySpec policy_from_json(const Json& j);
PolicySpec load_policy(const std::filesystem::path& path);
OrderedJson policy_to_json(const PolicySpec& spec);

/// Deterministic decision maker built from a policy spec.
std::unique_ptr<DecisionMaker> make_policy(const PolicySpec& spec, const AnalysisModel& model);

struct RunHooks {
  std::function<void(const Engine&)> on_generation;
  std::function<void(const CandidateSet&)> on_stop;
  std::function<void(const CandidateSet&, const FeedbackBundle&)> on_feedback;
};

/// Full interactive run: engine generations, stops, decisions, feedback.
void run_interactive(Engine& engine, const InteractionSchedule& schedule, DecisionMaker& dm,
                     const RunHooks& hooks = {});

}  // namespace archevo
