#pragma once

// Event-sourced session records. A log holds everything needed to re-run a
// session: the model, the configuration and every feedback bundle.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "archevo/engine.hpp"
#include "archevo/interaction.hpp"
#include "archevo/io.hpp"

namespace archevo {

struct EventRecord {
  std::size_t seq = 0;
  double time_ms = 0.0;
  std::string kind;
  OrderedJson payload;
};

OrderedJson record_to_json(const EventRecord& r);

/// Append-only, thread-safe list of events, mirrored to a JSON-lines file
/// when a path is given.
class EventLog {
 public:
  explicit EventLog(std::optional<std::filesystem::path> file = std::nullopt);

  std::size_t append(std::string kind, OrderedJson payload);
  std::vector<EventRecord> since(std::size_t seq) const;
  std::size_t size() const;
  const std::optional<std::filesystem::path>& file() const noexcept { return path_; }

 private:
  mutable std::mutex mu_;
  std::vector<EventRecord> records_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
  std::chrono::steady_clock::time_point start_;
  double last_ms_ = 0.0;
};

/// Reads a JSON-lines log. Throws ReplayError on malformed lines.
std::vector<Json> read_event_file(const std::filesystem::path& path);

/// Writes the standard events for an engine run into a log.
class SessionRecorder {
 public:
  SessionRecorder(EventLog& log, const AnalysisModel& model, std::size_t stats_every = 1)
      : log_(log), model_(model), stats_every_(stats_every) {}

  void header(const std::string& id, const EngineConfig& cfg);
  void generation(const Engine& engine);
  void interaction_start(const CandidateSet& shown, const Engine& engine);
  void interaction_end(const CandidateSet& shown, const FeedbackBundle& bundle, const Engine& engine);
  void stop_requested(const Engine& engine);
  void finished(const Engine& engine, std::string_view reason);

 private:
  EventLog& log_;
  const AnalysisModel& model_;
  std::size_t stats_every_;
};

struct RecordedSession {
  std::shared_ptr<const AnalysisModel> model;
  EngineConfig config;
  std::vector<Json> bundles;            // wire form, in stop order
  std::optional<std::string> finish_reason;
  std::optional<std::size_t> finish_generation;
};

/// Extracts the header and the feedback bundles. Throws ReplayError when the
/// header is missing or malformed.
RecordedSession parse_session_log(std::span<const Json> records);

/// Re-runs a recorded session and returns the canonical final archive text.
/// Throws ReplayError when `seed` differs from the recorded one, when a stop
/// has no recorded feedback or when recorded feedback does not match.
std::string replay_archive(const RecordedSession& session, std::optional<std::uint64_t> seed = {});

struct ScriptedRun {
  std::string archive;  // canonical final archive text
  GenerationStats initial;
  GenerationStats final;
  std::string finish_reason;
};

/// Runs a scripted session, recording it into `log`.
ScriptedRun record_scripted_session(std::shared_ptr<const AnalysisModel> model, const EngineConfig& cfg,
                                    const PolicySpec& policy, EventLog& log, std::size_t stats_every = 1,
                                    const std::function<void(const Engine&)>& on_generation = {});

}  // namespace archevo
