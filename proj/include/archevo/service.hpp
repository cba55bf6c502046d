#pragma once

// Long-running optimization sessions behind an HTTP API. Each session owns one
// engine driven by a dedicated worker thread; request handlers only read
// published snapshots and post messages to that worker.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "archevo/engine.hpp"
#include "archevo/errors.hpp"
#include "archevo/interaction.hpp"
#include "archevo/io.hpp"
#include "archevo/session_log.hpp"

namespace httplib {
class Server;
}

namespace archevo {

enum class SessionState { running, awaiting_feedback, finished, aborted };
std::string_view to_string(SessionState s);

/// Request that is valid in shape but not in the session's current state.
class StateConflict : public Error {
 public:
  using Error::Error;
};

class SessionNotFound : public Error {
 public:
  using Error::Error;
};

class CapacityExceeded : public Error {
 public:
  using Error::Error;
};

/// Feedback replayed automatically when a session is rebuilt from its log.
struct RecoveryPlan {
  std::vector<Json> bundles;
  std::optional<std::size_t> stop_generation;
};

struct SessionOptions {
  std::optional<std::filesystem::path> log_path;
  std::optional<std::chrono::milliseconds> idle_timeout;  // auto-submits "no preference"
  std::size_t stats_every = 10;
  RecoveryPlan recovery;
};

class Session {
 public:
  Session(std::string id, std::shared_ptr<const AnalysisModel> model, EngineConfig cfg,
          SessionOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const noexcept { return id_; }
  const AnalysisModel& model() const noexcept { return *model_; }
  SessionState state() const;

  OrderedJson status() const;
  /// Throws StateConflict unless awaiting feedback.
  OrderedJson candidates() const;
  /// Parses and applies a bundle on the worker. Throws StateConflict when not
  /// awaiting feedback, ParseError on malformed bodies, ProtocolError or
  /// ValidationError when the bundle does not fit the shown candidates.
  OrderedJson submit(const Json& body);
  /// Terminates the search and blocks until the worker has finished.
  OrderedJson stop();
  OrderedJson archive() const;
  OrderedJson events(std::size_t since) const;

  /// Blocks until `pred(state)` holds or the timeout expires.
  bool wait_for(const std::function<bool(SessionState)>& pred, std::chrono::milliseconds timeout) const;

 private:
  struct Message {
    FeedbackBundle bundle;
    std::promise<void> done;
  };

  void run();
  void publish(const Engine& engine);

  std::string id_;
  std::shared_ptr<const AnalysisModel> model_;
  EngineConfig cfg_;
  SessionOptions options_;
  EventLog log_;

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  SessionState state_ = SessionState::running;
  std::optional<Message> mailbox_;
  std::atomic<bool> stop_flag_{false};
  std::atomic<bool> shutdown_{false};
  std::mutex submit_mu_;

  // snapshot, guarded by mu_
  std::size_t generation_ = 0;
  std::size_t total_generations_ = 0;
  std::size_t evaluations_ = 0;
  std::size_t stops_done_ = 0;
  std::size_t stop_count_ = 0;
  std::optional<CandidateSet> shown_;
  std::shared_ptr<const TerritoryArchive> archive_;
  std::string finish_reason_;
  std::string error_;

  std::thread worker_;
};

struct ServiceOptions {
  std::filesystem::path data_dir = "data";
  std::size_t max_sessions = 4;
  std::optional<std::chrono::milliseconds> idle_timeout;
  std::size_t stats_every = 10;
};

class SessionManager {
 public:
  explicit SessionManager(ServiceOptions options);

  /// Throws CapacityExceeded when max_sessions sessions are still active.
  std::shared_ptr<Session> create(std::shared_ptr<const AnalysisModel> model, const EngineConfig& cfg);
  /// Throws SessionNotFound.
  std::shared_ptr<Session> get(const std::string& id) const;
  std::vector<std::string> ids() const;
  std::size_t active() const;
  /// Rebuilds every session found under data_dir/sessions by replaying its
  /// log. Returns the number of sessions restored.
  std::size_t recover();
  const ServiceOptions& options() const noexcept { return options_; }

 private:
  std::string next_id();
  std::filesystem::path log_path(const std::string& id) const;

  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_ = 0;
};

/// HTTP front end. Routes:
///   POST /api/sessions, GET /api/sessions/{id}, GET .../candidates,
///   POST .../feedback, POST .../stop, GET .../archive, GET .../events?since=n
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  SessionManager& sessions() noexcept { return manager_; }

  /// Binds and serves until stop(). Returns false when the port is unavailable.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it; serve with listen_after_bind().
  int bind_any(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  void routes();

  SessionManager manager_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace archevo
