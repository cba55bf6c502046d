#include "archevo/service.hpp"

#include <cstdio>
#include <iostream>
#include <random>

#include "archevo/errors.hpp"
#include "httplib.h"
#include "json_util.hpp"

namespace archevo {

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::running: return "running";
    case SessionState::awaiting_feedback: return "awaiting_feedback";
    case SessionState::finished: return "finished";
    case SessionState::aborted: return "aborted";
  }
  return "aborted";
}

namespace {

bool is_active(SessionState s) {
  return s == SessionState::running || s == SessionState::awaiting_feedback;
}

FeedbackBundle empty_bundle(const CandidateSet& shown) {
  FeedbackBundle b;
  b.stop_index = shown.stop_index;
  for (const auto& c : shown.candidates) b.items.push_back({c.uid, std::nullopt, false, false, {}, false});
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Session

Session::Session(std::string id, std::shared_ptr<const AnalysisModel> model, EngineConfig cfg,
                 SessionOptions options)
    : id_(std::move(id)),
      model_(std::move(model)),
      cfg_(std::move(cfg)),
      options_(std::move(options)),
      log_(options_.log_path) {
  worker_ = std::thread([this] { run(); });
}

Session::~Session() {
  {
    std::lock_guard lock(mu_);
    shutdown_ = true;
    stop_flag_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

SessionState Session::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

void Session::publish(const Engine& engine) {
  auto snapshot = std::make_shared<const TerritoryArchive>(engine.archive());
  std::lock_guard lock(mu_);
  generation_ = engine.generation();
  evaluations_ = engine.evaluations_used();
  archive_ = std::move(snapshot);
}

void Session::run() {
  try {
    Problem problem(model_, cfg_.erp, cfg_.bounds());
    Engine engine(std::move(problem), cfg_);
    const auto schedule = build_schedule(engine.total_generations(), cfg_.interactions);
    InteractionController ctl(engine, schedule);
    SessionRecorder rec(log_, *model_, options_.stats_every);
    rec.header(id_, cfg_);

    std::vector<FeedbackBundle> preload;
    for (const Json& b : options_.recovery.bundles) preload.push_back(feedback_from_json(b, *model_));
    {
      std::lock_guard lock(mu_);
      total_generations_ = engine.total_generations();
      stop_count_ = schedule.stops.size();
    }
    publish(engine);

    bool external_stop = false;
    const auto check_stop = [&] {
      const bool recovered_stop = options_.recovery.stop_generation &&
                                  engine.generation() == *options_.recovery.stop_generation;
      if (stop_flag_ || recovered_stop) {
        external_stop = true;
        if (!engine.finished() && !shutdown_) rec.stop_requested(engine);
        engine.request_stop();
      }
      return external_stop;
    };
    check_stop();

    const auto hook = [&](const Engine&) {
      rec.generation(engine);
      publish(engine);
      check_stop();
    };

    while (auto shown = ctl.advance(hook)) {
      rec.interaction_start(*shown, engine);
      auto pre = std::find_if(preload.begin(), preload.end(),
                              [&](const FeedbackBundle& b) { return b.stop_index == shown->stop_index; });
      if (pre != preload.end()) {
        ctl.submit(*pre);
        rec.interaction_end(*shown, *pre, engine);
        publish(engine);
        std::lock_guard lock(mu_);
        stops_done_ = ctl.stops_done();
        continue;
      }
      if (check_stop()) break;
      {
        std::lock_guard lock(mu_);
        shown_ = *shown;
        state_ = SessionState::awaiting_feedback;
      }
      cv_.notify_all();

      bool resumed = false;
      while (!resumed) {
        std::unique_lock lock(mu_);
        const auto ready = [&] { return mailbox_.has_value() || stop_flag_.load(); };
        bool got = true;
        if (options_.idle_timeout) {
          got = cv_.wait_for(lock, *options_.idle_timeout, ready);
        } else {
          cv_.wait(lock, ready);
        }
        if (stop_flag_) {
          if (mailbox_) {
            mailbox_->done.set_exception(std::make_exception_ptr(StateConflict("session is stopping")));
            mailbox_.reset();
          }
          lock.unlock();
          check_stop();
          break;
        }
        FeedbackBundle bundle;
        std::optional<std::promise<void>> reply;
        if (got) {
          bundle = std::move(mailbox_->bundle);
          reply = std::move(mailbox_->done);
          mailbox_.reset();
        } else {
          bundle = empty_bundle(*shown);
        }
        lock.unlock();
        try {
          ctl.submit(bundle);
        } catch (...) {
          if (!reply) throw;
          reply->set_exception(std::current_exception());
          continue;
        }
        rec.interaction_end(*shown, bundle, engine);
        publish(engine);
        {
          std::lock_guard relock(mu_);
          shown_.reset();
          stops_done_ = ctl.stops_done();
          state_ = SessionState::running;
        }
        cv_.notify_all();
        if (reply) reply->set_value();
        resumed = true;
      }
      if (external_stop) break;
    }

    // A shutdown leaves the log open-ended so that recovery resumes the run.
    if (external_stop && shutdown_) return;
    const std::string reason = external_stop            ? "stopped"
                               : engine.stop_requested() ? "stop_search"
                                                         : "completed";
    rec.finished(engine, reason);
    publish(engine);
    {
      std::lock_guard lock(mu_);
      shown_.reset();
      finish_reason_ = reason;
      state_ = SessionState::finished;
    }
    cv_.notify_all();
  } catch (const std::exception& e) {
    {
      std::lock_guard lock(mu_);
      error_ = e.what();
      shown_.reset();
      state_ = SessionState::aborted;
      if (mailbox_) {
        mailbox_->done.set_exception(std::make_exception_ptr(StateConflict("session aborted")));
        mailbox_.reset();
      }
    }
    cv_.notify_all();
  }
}

OrderedJson Session::status() const {
  std::lock_guard lock(mu_);
  OrderedJson j;
  j["id"] = id_;
  j["state"] = std::string(to_string(state_));
  j["generation"] = generation_;
  j["total_generations"] = total_generations_;
  j["evaluations"] = evaluations_;
  j["stops_done"] = stops_done_;
  j["stops"] = stop_count_;
  j["stop"] = shown_ ? OrderedJson(shown_->stop_index) : OrderedJson(nullptr);
  j["archive_size"] = archive_ ? archive_->size() : 0;
  j["seed"] = cfg_.seed;
  if (state_ == SessionState::finished) j["finish_reason"] = finish_reason_;
  if (state_ == SessionState::aborted) j["error"] = error_;
  return j;
}

OrderedJson Session::candidates() const {
  std::lock_guard lock(mu_);
  if (state_ != SessionState::awaiting_feedback || !shown_) {
    throw StateConflict("session " + id_ + " is " + std::string(to_string(state_)) +
                        ", not awaiting feedback");
  }
  return candidates_to_json(*shown_, *model_);
}

OrderedJson Session::submit(const Json& body) {
  std::lock_guard serial(submit_mu_);
  FeedbackBundle bundle = feedback_from_json(body, *model_);
  std::future<void> done;
  {
    std::lock_guard lock(mu_);
    if (state_ != SessionState::awaiting_feedback) {
      throw StateConflict("session " + id_ + " is " + std::string(to_string(state_)) +
                          ", not awaiting feedback");
    }
    mailbox_.emplace(Message{std::move(bundle), {}});
    done = mailbox_->done.get_future();
  }
  cv_.notify_all();
  done.get();
  return status();
}

OrderedJson Session::stop() {
  {
    std::lock_guard lock(mu_);
    stop_flag_ = true;
  }
  cv_.notify_all();
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !is_active(state_); });
  lock.unlock();
  return status();
}

OrderedJson Session::archive() const {
  std::shared_ptr<const TerritoryArchive> a;
  {
    std::lock_guard lock(mu_);
    a = archive_;
  }
  if (!a) return archive_to_json(TerritoryArchive(cfg_.archive), *model_);
  return archive_to_json(*a, *model_);
}

OrderedJson Session::events(std::size_t since) const {
  OrderedJson list = OrderedJson::array();
  for (const auto& r : log_.since(since)) list.push_back(record_to_json(r));
  OrderedJson j;
  j["since"] = since;
  j["next"] = since + list.size();
  j["events"] = std::move(list);
  return j;
}

bool Session::wait_for(const std::function<bool(SessionState)>& pred,
                       std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return pred(state_); });
}

// ---------------------------------------------------------------------------
// SessionManager

SessionManager::SessionManager(ServiceOptions options) : options_(std::move(options)) {
  salt_ = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
}

std::string SessionManager::next_id() {
  // splitmix64 over a salted counter
  std::uint64_t z = salt_ + 0x9e3779b97f4a7c15ULL * ++counter_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
  return buf;
}

std::filesystem::path SessionManager::log_path(const std::string& id) const {
  return options_.data_dir / "sessions" / (id + ".jsonl");
}

std::shared_ptr<Session> SessionManager::create(std::shared_ptr<const AnalysisModel> model,
                                                const EngineConfig& cfg) {
  cfg.validate();
  std::lock_guard lock(mu_);
  std::size_t live = 0;
  for (const auto& [_, s] : sessions_) live += is_active(s->state()) ? 1 : 0;
  if (live >= options_.max_sessions) {
    throw CapacityExceeded("at most " + std::to_string(options_.max_sessions) +
                           " sessions may run at once");
  }
  std::string id = next_id();
  while (sessions_.count(id)) id = next_id();
  SessionOptions so;
  so.log_path = log_path(id);
  so.idle_timeout = options_.idle_timeout;
  so.stats_every = options_.stats_every;
  auto s = std::make_shared<Session>(id, std::move(model), cfg, std::move(so));
  sessions_.emplace(id, s);
  return s;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound("no session '" + id + "'");
  return it->second;
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

std::size_t SessionManager::active() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [_, s] : sessions_) n += is_active(s->state()) ? 1 : 0;
  return n;
}

std::size_t SessionManager::recover() {
  const auto dir = options_.data_dir / "sessions";
  if (!std::filesystem::is_directory(dir)) return 0;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::size_t restored = 0;
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    {
      std::lock_guard lock(mu_);
      if (sessions_.count(id)) continue;
    }
    try {
      const auto records = read_event_file(f);
      RecordedSession rs = parse_session_log(records);
      SessionOptions so;
      so.log_path = f;
      so.idle_timeout = options_.idle_timeout;
      so.stats_every = options_.stats_every;
      so.recovery.bundles = std::move(rs.bundles);
      if (rs.finish_reason == "stopped") so.recovery.stop_generation = rs.finish_generation;
      auto s = std::make_shared<Session>(id, rs.model, rs.config, std::move(so));
      std::lock_guard lock(mu_);
      sessions_.emplace(id, std::move(s));
      ++restored;
    } catch (const std::exception& e) {
      std::cerr << "skipping session log " << f << ": " << e.what() << '\n';
    }
  }
  return restored;
}

// ---------------------------------------------------------------------------
// Service

namespace {

void send_json(httplib::Response& res, int status, const OrderedJson& body) {
  res.status = status;
  res.set_content(dump(body), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  OrderedJson j;
  j["error"] = message;
  j["status"] = status;
  send_json(res, status, j);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const SessionNotFound& e) {
      send_error(res, 404, e.what());
    } catch (const StateConflict& e) {
      send_error(res, 409, e.what());
    } catch (const CapacityExceeded& e) {
      send_error(res, 429, e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, e.what());
    } catch (const ProtocolError& e) {
      send_error(res, 422, e.what());
    } catch (const ValidationError& e) {
      send_error(res, 422, e.what());
    } catch (const ConfigError& e) {
      send_error(res, 422, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

Json body_json(const httplib::Request& req) {
  if (req.body.empty()) throw ParseError("request body is empty", 0);
  return detail::parse_json(req.body);
}

}  // namespace

Service::Service(ServiceOptions options)
    : manager_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

Service::~Service() { stop(); }

void Service::routes() {
  auto& srv = *server_;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  const auto ui = manager_.options().data_dir / "ui";
  if (std::filesystem::is_directory(ui)) srv.set_mount_point("/", ui.string());

  srv.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const Json body = body_json(req);
             detail::expect_keys(body, "session", {"model", "config"});
             const Json& m = detail::require(body, "session", "model");
             if (!m.is_object()) throw ParseError("session/model: expected a model object", 0);
             auto model = std::make_shared<const AnalysisModel>(parse_model(m.dump()));
             EngineConfig cfg;
             if (body.contains("config") && !body["config"].is_null()) cfg = config_from_json(body["config"]);
             auto s = manager_.create(std::move(model), cfg);
             send_json(res, 201, s->status());
           }));

  srv.Get("/api/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
            OrderedJson list = OrderedJson::array();
            for (const auto& id : manager_.ids()) list.push_back(manager_.get(id)->status());
            send_json(res, 200, OrderedJson{{"sessions", std::move(list)}});
          }));

  srv.Get(R"(/api/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, manager_.get(req.matches[1])->status());
          }));

  srv.Get(R"(/api/sessions/([^/]+)/candidates)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, manager_.get(req.matches[1])->candidates());
          }));

  srv.Post(R"(/api/sessions/([^/]+)/feedback)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto s = manager_.get(req.matches[1]);
             send_json(res, 200, s->submit(body_json(req)));
           }));

  srv.Post(R"(/api/sessions/([^/]+)/stop)", guarded([this](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, manager_.get(req.matches[1])->stop());
           }));

  srv.Get(R"(/api/sessions/([^/]+)/archive)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, manager_.get(req.matches[1])->archive());
          }));

  srv.Get(R"(/api/sessions/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto s = manager_.get(req.matches[1]);
            std::size_t since = 0;
            if (req.has_param("since")) {
              const std::string v = req.get_param_value("since");
              std::size_t used = 0;
              try {
                since = std::stoul(v, &used);
              } catch (const std::exception&) {
                used = 0;
              }
              if (used == 0 || used != v.size()) throw ParseError("since: expected a non-negative integer", 0);
            }
            send_json(res, 200, s->events(since));
          }));
}

bool Service::listen(const std::string& host, int port) { return server_->listen(host, port); }

int Service::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }

bool Service::listen_after_bind() { return server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

bool Service::running() const { return server_ && server_->is_running(); }

}  // namespace archevo
