#include "archevo/session_log.hpp"

#include <algorithm>

#include "archevo/errors.hpp"
#include "json_util.hpp"

namespace archevo {

OrderedJson record_to_json(const EventRecord& r) {
  OrderedJson j;
  j["seq"] = r.seq;
  j["time_ms"] = r.time_ms;
  j["kind"] = r.kind;
  j["payload"] = r.payload;
  return j;
}

EventLog::EventLog(std::optional<std::filesystem::path> file)
    : path_(std::move(file)), start_(std::chrono::steady_clock::now()) {
  if (path_) {
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
    out_.open(*path_, std::ios::out | std::ios::trunc);
    if (!out_) throw Error("cannot open event log " + path_->string());
  }
}

std::size_t EventLog::append(std::string kind, OrderedJson payload) {
  std::lock_guard lock(mu_);
  const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - start_;
  last_ms_ = std::max(last_ms_, dt.count());
  EventRecord r{records_.size(), last_ms_, std::move(kind), std::move(payload)};
  if (out_.is_open()) {
    out_ << record_to_json(r).dump() << '\n';
    out_.flush();
  }
  records_.push_back(std::move(r));
  return records_.size() - 1;
}

std::vector<EventRecord> EventLog::since(std::size_t seq) const {
  std::lock_guard lock(mu_);
  if (seq >= records_.size()) return {};
  return {records_.begin() + static_cast<std::ptrdiff_t>(seq), records_.end()};
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::vector<Json> read_event_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ReplayError(e.what());
  }
  std::vector<Json> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error&) {
      throw ReplayError(path.string() + ":" + std::to_string(line_no) + ": malformed event record");
    }
  }
  return out;
}

namespace {

OrderedJson candidate_summary(const Individual& c) {
  OrderedJson j;
  j["uid"] = c.uid;
  j["components"] = c.architecture.size();
  j["objectives"] = objectives_to_json(c.objectives);
  j["f_sub"] = c.fitness.f_sub ? OrderedJson(*c.fitness.f_sub) : OrderedJson(nullptr);
  return j;
}

}  // namespace

void SessionRecorder::header(const std::string& id, const EngineConfig& cfg) {
  OrderedJson j;
  j["id"] = id;
  j["seed"] = cfg.seed;
  j["model"] = OrderedJson::parse(serialize_model(model_));
  j["config"] = config_to_json(cfg);
  log_.append("session", std::move(j));
}

void SessionRecorder::generation(const Engine& engine) {
  if (stats_every_ == 0) return;
  const bool last = engine.generation() >= engine.total_generations();
  if (engine.generation() % stats_every_ != 0 && !last) return;
  log_.append("gen_stats", stats_to_json(engine.stats()));
}

void SessionRecorder::interaction_start(const CandidateSet& shown, const Engine& engine) {
  OrderedJson j;
  j["stop"] = shown.stop_index;
  j["generation"] = engine.generation();
  j["evaluations"] = engine.evaluations_used();
  OrderedJson list = OrderedJson::array();
  for (const auto& c : shown.candidates) list.push_back(candidate_summary(c));
  j["candidates"] = std::move(list);
  log_.append("interaction_start", std::move(j));
}

void SessionRecorder::interaction_end(const CandidateSet& shown, const FeedbackBundle& bundle,
                                      const Engine& engine) {
  for (const auto& item : bundle.items) {
    if (item.preference) {
      OrderedJson p;
      p["stop"] = shown.stop_index;
      p["solution"] = item.solution;
      p["preference"] = preference_to_json(*item.preference, model_);
      log_.append("preference", std::move(p));
    }
    const auto action = [&](std::string_view name, OrderedJson extra = nullptr) {
      OrderedJson a;
      a["stop"] = shown.stop_index;
      a["solution"] = item.solution;
      a["action"] = std::string(name);
      if (!extra.is_null()) a["components"] = std::move(extra);
      log_.append("action", std::move(a));
    };
    if (item.add_to_archive) action("add_to_archive");
    if (item.remove_from_population) action("remove_from_population");
    if (!item.freeze.empty()) action("freeze", OrderedJson(item.freeze));
    if (item.stop_search) action("stop_search");
  }
  OrderedJson j;
  j["stop"] = shown.stop_index;
  j["generation"] = engine.generation();
  j["evaluations"] = engine.evaluations_used();
  j["bundle"] = feedback_to_json(bundle, model_);
  log_.append("interaction_end", std::move(j));
}

void SessionRecorder::stop_requested(const Engine& engine) {
  OrderedJson j;
  j["generation"] = engine.generation();
  j["evaluations"] = engine.evaluations_used();
  log_.append("stop", std::move(j));
}

void SessionRecorder::finished(const Engine& engine, std::string_view reason) {
  OrderedJson j;
  j["reason"] = std::string(reason);
  j["generation"] = engine.generation();
  j["evaluations"] = engine.evaluations_used();
  j["archive_size"] = engine.archive().size();
  log_.append("finished", std::move(j));
}

RecordedSession parse_session_log(std::span<const Json> records) {
  RecordedSession out;
  bool have_header = false;
  for (const Json& r : records) {
    if (!r.is_object() || !r.contains("kind") || !r["kind"].is_string() || !r.contains("payload")) {
      throw ReplayError("event record without kind or payload");
    }
    const std::string kind = r["kind"].get<std::string>();
    const Json& p = r["payload"];
    try {
      if (kind == "session") {
        out.model = std::make_shared<const AnalysisModel>(parse_model(p.at("model").dump()));
        out.config = config_from_json(p.at("config"));
        have_header = true;
      } else if (kind == "interaction_end") {
        out.bundles.push_back(p.at("bundle"));
      } else if (kind == "finished") {
        out.finish_reason = p.at("reason").get<std::string>();
        out.finish_generation = p.at("generation").get<std::size_t>();
      }
    } catch (const ReplayError&) {
      throw;
    } catch (const std::exception& e) {
      throw ReplayError("malformed '" + kind + "' record: " + e.what());
    }
  }
  if (!have_header) throw ReplayError("event log has no session header");
  return out;
}

std::string replay_archive(const RecordedSession& session, std::optional<std::uint64_t> seed) {
  if (!session.model) throw ReplayError("recorded session has no model");
  if (seed && *seed != session.config.seed) {
    throw ReplayError("replay seed " + std::to_string(*seed) + " does not match recorded seed " +
                      std::to_string(session.config.seed));
  }
  EngineConfig cfg = session.config;
  Problem problem(session.model, cfg.erp, cfg.bounds());
  Engine engine(std::move(problem), cfg);
  InteractionController ctl(engine, build_schedule(engine.total_generations(), cfg.interactions));

  std::vector<FeedbackBundle> bundles;
  for (const Json& b : session.bundles) {
    try {
      bundles.push_back(feedback_from_json(b, *session.model));
    } catch (const Error& e) {
      throw ReplayError(std::string("recorded feedback is invalid: ") + e.what());
    }
  }

  const bool external_stop = session.finish_reason == "stopped" && session.finish_generation;
  const auto stop_here = [&](const Engine& e) {
    return external_stop && e.generation() == *session.finish_generation;
  };
  if (stop_here(engine)) engine.request_stop();

  while (auto shown = ctl.advance([&](const Engine& e) {
    if (stop_here(e)) engine.request_stop();
  })) {
    auto it = std::find_if(bundles.begin(), bundles.end(),
                           [&](const FeedbackBundle& b) { return b.stop_index == shown->stop_index; });
    if (it == bundles.end()) {
      if (stop_here(engine)) {
        engine.request_stop();
        break;
      }
      throw ReplayError("recording has no feedback for stop " + std::to_string(shown->stop_index));
    }
    try {
      ctl.submit(*it);
    } catch (const ProtocolError& e) {
      throw ReplayError(std::string("recorded feedback does not match the replayed run: ") + e.what());
    }
  }
  return dump(archive_to_json(engine.archive(), *session.model));
}

ScriptedRun record_scripted_session(std::shared_ptr<const AnalysisModel> model, const EngineConfig& cfg,
                                    const PolicySpec& policy, EventLog& log, std::size_t stats_every,
                                    const std::function<void(const Engine&)>& on_generation) {
  Problem problem(model, cfg.erp, cfg.bounds());
  Engine engine(std::move(problem), cfg);
  const auto schedule = build_schedule(engine.total_generations(), cfg.interactions);
  auto dm = make_policy(policy, *model);
  SessionRecorder rec(log, *model, stats_every);
  rec.header("scripted-" + std::to_string(cfg.seed), cfg);
  ScriptedRun out;
  out.initial = engine.stats();

  RunHooks hooks;
  hooks.on_generation = [&](const Engine& e) {
    rec.generation(e);
    if (on_generation) on_generation(e);
  };
  hooks.on_stop = [&](const CandidateSet& s) { rec.interaction_start(s, engine); };
  hooks.on_feedback = [&](const CandidateSet& s, const FeedbackBundle& b) { rec.interaction_end(s, b, engine); };
  run_interactive(engine, schedule, *dm, hooks);
  out.finish_reason = engine.stop_requested() ? "stop_search" : "completed";
  rec.finished(engine, out.finish_reason);
  out.final = engine.stats();
  out.archive = dump(archive_to_json(engine.archive(), *model));
  return out;
}

}  // namespace archevo
