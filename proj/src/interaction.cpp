#include "archevo/interaction.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "archevo/errors.hpp"
#include "json_util.hpp"

namespace archevo {

namespace {

using namespace detail;

double squared_distance(const ObjectiveVector& a, const ObjectiveVector& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < kObjectiveCount; ++k) d += (a[k] - b[k]) * (a[k] - b[k]);
  return d;
}

constexpr std::size_t kKMeansIterations = 50;

struct Clustering {
  std::vector<ObjectiveVector> centroids;
  std::vector<std::size_t> assignment;
};

std::size_t nearest_centroid(const ObjectiveVector& p, const std::vector<ObjectiveVector>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Clustering kmeans_pp(const std::vector<ObjectiveVector>& points, std::size_t k, Rng& rng) {
  Clustering out;
  const std::size_t n = points.size();
  out.centroids.push_back(points[rng.index(n)]);
  std::vector<double> d2(n);
  while (out.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = squared_distance(points[i], out.centroids[nearest_centroid(points[i], out.centroids)]);
      total += d2[i];
    }
    std::size_t chosen = n - 1;
    if (total <= 0.0) {
      chosen = rng.index(n);
    } else {
      double spin = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        spin -= d2[i];
        if (spin < 0.0) {
          chosen = i;
          break;
        }
      }
    }
    out.centroids.push_back(points[chosen]);
  }

  out.assignment.assign(n, k);
  for (std::size_t iter = 0; iter < kKMeansIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest_centroid(points[i], out.centroids);
      changed = changed || c != out.assignment[i];
      out.assignment[i] = c;
    }
    if (!changed) break;
    std::vector<ObjectiveVector> sum(k, ObjectiveVector{});
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < kObjectiveCount; ++d) sum[out.assignment[i]][d] += points[i][d];
      ++count[out.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) continue;
      for (std::size_t d = 0; d < kObjectiveCount; ++d) {
        out.centroids[c][d] = sum[c][d] / static_cast<double>(count[c]);
      }
    }
  }
  return out;
}

bool better_preference(const Individual& a, const Individual& b) {
  const auto& fa = a.fitness;
  const auto& fb = b.fitness;
  if (fa.f_sub && fb.f_sub) return *fa.f_sub < *fb.f_sub;
  if (fa.f_sub != fb.f_sub) return fa.f_sub.has_value();
  return fa.f_obj < fb.f_obj;
}

std::string_view policy_token(PolicySpec::Kind k) {
  switch (k) {
    case PolicySpec::Kind::noop: return "noop";
    case PolicySpec::Kind::fixed_nc: return "fixed_nc";
    case PolicySpec::Kind::target_architecture: return "target_architecture";
    case PolicySpec::Kind::replay: return "replay";
  }
  return "noop";
}

}  // namespace

InteractionSchedule build_schedule(std::size_t g, std::size_t h) {
  if (h < 1) throw ConfigError("at least one interaction is required");
  if (g < 6) throw ConfigError("at least 6 generations are required to schedule interactions");
  const std::size_t first = g / 3;
  const std::size_t last = 5 * g / 6;
  const std::size_t span = last - first;
  if (h - 1 > span) {
    throw ConfigError("cannot place " + std::to_string(h) + " interactions in " +
                      std::to_string(g) + " generations");
  }
  InteractionSchedule s;
  s.generations = g;
  if (h == 1) {
    s.stops.push_back(first);
    return s;
  }
  for (std::size_t i = 0; i < h; ++i) {
    // round(i * span / (h - 1)), halves rounded up
    s.stops.push_back(first + (2 * i * span + (h - 1)) / (2 * (h - 1)));
  }
  return s;
}

std::vector<Individual> select_candidates(std::span<const Individual> population, std::size_t m,
                                          Rng& rng) {
  std::vector<const Individual*> pool;
  for (const auto& ind : population) {
    if (!ind.marked_for_removal && ind.fitness.feasible) pool.push_back(&ind);
  }
  if (pool.size() < m) {
    pool.clear();
    for (const auto& ind : population) pool.push_back(&ind);
  }
  if (pool.size() <= m) {
    std::vector<Individual> all;
    for (const auto* p : pool) all.push_back(*p);
    return all;
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    if (better_preference(*pool[i], *pool[best])) best = i;
  }
  std::vector<char> taken(pool.size(), 0);
  taken[best] = 1;
  std::vector<std::size_t> chosen;

  if (m > 1) {
    std::vector<ObjectiveVector> points;
    points.reserve(pool.size());
    for (const auto* p : pool) points.push_back(p->objectives);
    const Clustering cl = kmeans_pp(points, m - 1, rng);
    for (std::size_t c = 0; c < m - 1; ++c) {
      // members of this cluster first, nearest to the centroid; then any
      // remaining point as backfill
      std::size_t pick = pool.size();
      double pick_d = std::numeric_limits<double>::infinity();
      bool pick_in = false;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (taken[i]) continue;
        const bool in = cl.assignment[i] == c;
        const double d = squared_distance(points[i], cl.centroids[c]);
        if ((in && !pick_in) || (in == pick_in && d < pick_d)) {
          pick = i;
          pick_d = d;
          pick_in = in;
        }
      }
      taken[pick] = 1;
      chosen.push_back(pick);
    }
  }
  chosen.push_back(best);

  std::vector<Individual> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(*pool[i]);
  return out;
}

FeedbackBundle feedback_from_json(const Json& j, const AnalysisModel& model) {
  constexpr std::string_view w = "feedback";
  expect_keys(j, w, {"stop", "feedback"});
  FeedbackBundle b;
  const long long stop = require_integer(j, w, "stop");
  if (stop < 0) throw ValidationError("feedback/stop: must be non-negative");
  b.stop_index = static_cast<std::size_t>(stop);
  const Json& items = require_array(j, w, "feedback");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string iw = "feedback/feedback/" + std::to_string(i);
    const Json& item = items[i];
    expect_keys(item, iw, {"solution", "preference", "actions"});
    CandidateFeedback f;
    const Json& sol = require(item, iw, "solution");
    if (!sol.is_number_unsigned()) throw ParseError(iw + "/solution: expected a solution id", 0);
    f.solution = sol.get<std::uint64_t>();
    if (item.contains("preference") && !item["preference"].is_null()) {
      Preference p = preference_from_json(item["preference"], model);
      if (p.kind != PreferenceKind::none) f.preference = std::move(p);
    }
    if (item.contains("actions")) {
      const Json& a = item["actions"];
      const std::string aw = iw + "/actions";
      expect_keys(a, aw, {"add_to_archive", "remove_from_population", "freeze", "stop_search"});
      if (a.contains("add_to_archive")) f.add_to_archive = require_bool(a, aw, "add_to_archive");
      if (a.contains("remove_from_population")) {
        f.remove_from_population = require_bool(a, aw, "remove_from_population");
      }
      if (a.contains("stop_search")) f.stop_search = require_bool(a, aw, "stop_search");
      if (a.contains("freeze")) {
        for (const Json& idx : require_array(a, aw, "freeze")) {
          if (!idx.is_number_unsigned()) throw ParseError(aw + "/freeze: expected component indices", 0);
          f.freeze.push_back(idx.get<std::size_t>());
        }
      }
    }
    b.items.push_back(std::move(f));
  }
  return b;
}

OrderedJson feedback_to_json(const FeedbackBundle& b, const AnalysisModel& model) {
  OrderedJson items = OrderedJson::array();
  for (const auto& f : b.items) {
    OrderedJson ji;
    ji["solution"] = f.solution;
    ji["preference"] = f.preference ? preference_to_json(*f.preference, model) : OrderedJson(nullptr);
    ji["actions"] = {{"add_to_archive", f.add_to_archive},
                     {"remove_from_population", f.remove_from_population},
                     {"freeze", f.freeze},
                     {"stop_search", f.stop_search}};
    items.push_back(std::move(ji));
  }
  OrderedJson j;
  j["stop"] = b.stop_index;
  j["feedback"] = std::move(items);
  return j;
}

OrderedJson candidates_to_json(const CandidateSet& set, const AnalysisModel& model) {
  OrderedJson list = OrderedJson::array();
  for (const auto& c : set.candidates) list.push_back(individual_to_json(c, model));
  OrderedJson j;
  j["stop"] = set.stop_index;
  j["generation"] = set.generation;
  j["candidates"] = std::move(list);
  return j;
}

InteractionController::InteractionController(Engine& engine, InteractionSchedule schedule)
    : engine_(engine), schedule_(std::move(schedule)) {}

std::optional<CandidateSet> InteractionController::advance(const GenerationHook& on_generation) {
  if (pending_) return pending_;
  while (true) {
    if (engine_.finished()) return std::nullopt;
    if (next_stop_ < schedule_.stops.size() && engine_.generation() == schedule_.stops[next_stop_]) {
      CandidateSet set;
      set.stop_index = next_stop_;
      set.generation = engine_.generation();
      set.candidates =
          select_candidates(engine_.population(), engine_.config().candidates, engine_.rng());
      pending_ = std::move(set);
      return pending_;
    }
    engine_.step();
    if (on_generation) on_generation(engine_);
  }
}

void InteractionController::submit(const FeedbackBundle& bundle) {
  if (!pending_) throw ProtocolError("no interaction stop is awaiting feedback");
  const CandidateSet& shown = *pending_;
  if (bundle.stop_index != shown.stop_index) {
    throw ProtocolError("feedback is for stop " + std::to_string(bundle.stop_index) +
                        " but stop " + std::to_string(shown.stop_index) + " is pending");
  }
  std::set<std::uint64_t> seen;
  std::vector<Preference> prefs;
  for (const auto& item : bundle.items) {
    auto it = std::find_if(shown.candidates.begin(), shown.candidates.end(),
                           [&](const Individual& c) { return c.uid == item.solution; });
    if (it == shown.candidates.end()) {
      throw ProtocolError("solution " + std::to_string(item.solution) + " was not shown at this stop");
    }
    if (!seen.insert(item.solution).second) {
      throw ProtocolError("solution " + std::to_string(item.solution) + " appears twice in the feedback");
    }
    if (item.add_to_archive && item.remove_from_population) {
      throw ProtocolError("solution " + std::to_string(item.solution) +
                          " cannot be both archived and removed");
    }
    for (std::size_t c : item.freeze) {
      if (c >= it->architecture.size()) {
        throw ProtocolError("solution " + std::to_string(item.solution) + " has no component " +
                            std::to_string(c));
      }
    }
    if (item.preference) {
      validate_preference(*item.preference, engine_.problem().model(), engine_.config().bounds());
      prefs.push_back(*item.preference);
    }
  }

  engine_.add_preferences(shown.stop_index, std::move(prefs));
  bool stop = false;
  for (const auto& item : bundle.items) {
    if (!item.freeze.empty()) engine_.freeze(item.solution, item.freeze);
    if (item.add_to_archive) engine_.preserve(item.solution);
    if (item.remove_from_population) engine_.mark_for_removal(item.solution);
    stop = stop || item.stop_search;
  }
  engine_.finish_interaction();
  if (stop) engine_.request_stop();
  pending_.reset();
  ++next_stop_;
}

namespace {

class NoopPolicy : public DecisionMaker {
 public:
  explicit NoopPolicy(ScriptedActions actions) : actions_(actions) {}
  FeedbackBundle decide(const CandidateSet& shown, const Engine&) override {
    FeedbackBundle b;
    b.stop_index = shown.stop_index;
    for (const auto& c : shown.candidates) b.items.push_back({c.uid, std::nullopt, false, false, {}, false});
    apply_actions(b, shown);
    return b;
  }

 protected:
  void apply_actions(FeedbackBundle& b, const CandidateSet& shown) const {
    if (b.items.empty()) return;
    auto& first = b.items.front();
    if (actions_.archive_first) first.add_to_archive = true;
    if (actions_.freeze_first_component) first.freeze = {0};
    if (actions_.remove_last && b.items.size() > 1 && !b.items.back().add_to_archive) {
      b.items.back().remove_from_population = true;
    }
    if (actions_.stop_at && *actions_.stop_at == shown.stop_index) first.stop_search = true;
  }

 private:
  ScriptedActions actions_;
};

class FixedCountPolicy final : public NoopPolicy {
 public:
  FixedCountPolicy(std::size_t n, int likert, ScriptedActions actions)
      : NoopPolicy(actions), n_(n), likert_(likert) {}
  FeedbackBundle decide(const CandidateSet& shown, const Engine& engine) override {
    FeedbackBundle b = NoopPolicy::decide(shown, engine);
    if (!b.items.empty()) {
      Preference p;
      p.kind = PreferenceKind::number_of_components;
      p.payload = ComponentCount{n_};
      p.confidence = likert_;
      b.items.front().preference = p;
    }
    return b;
  }

 private:
  std::size_t n_;
  int likert_;
};

class TargetPolicy final : public NoopPolicy {
 public:
  TargetPolicy(Architecture reference, int likert, ScriptedActions actions)
      : NoopPolicy(actions), reference_(std::move(reference)), likert_(likert) {}
  FeedbackBundle decide(const CandidateSet& shown, const Engine& engine) override {
    FeedbackBundle b = NoopPolicy::decide(shown, engine);
    const auto& comps = reference_.components();
    for (std::size_t j = 0; j < b.items.size(); ++j) {
      Preference p;
      p.kind = PreferenceKind::best_component;
      p.payload = ComponentTarget{comps[(shown.stop_index * b.items.size() + j) % comps.size()].classes};
      p.confidence = likert_;
      b.items[j].preference = p;
    }
    return b;
  }

 private:
  Architecture reference_;
  int likert_;
};

class ReplayPolicy final : public DecisionMaker {
 public:
  explicit ReplayPolicy(std::vector<FeedbackBundle> bundles) : bundles_(std::move(bundles)) {}
  FeedbackBundle decide(const CandidateSet& shown, const Engine&) override {
    for (const auto& b : bundles_) {
      if (b.stop_index != shown.stop_index) continue;
      for (const auto& item : b.items) {
        const bool present = std::any_of(shown.candidates.begin(), shown.candidates.end(),
                                         [&](const Individual& c) { return c.uid == item.solution; });
        if (!present) {
          throw ReplayError("recorded feedback for stop " + std::to_string(shown.stop_index) +
                            " names solution " + std::to_string(item.solution) +
                            ", which the replayed run did not show");
        }
      }
      return b;
    }
    throw ReplayError("recording has no feedback for stop " + std::to_string(shown.stop_index));
  }

 private:
  std::vector<FeedbackBundle> bundles_;
};

}  // namespace

PolicySpec policy_from_json(const Json& j) {
  constexpr std::string_view w = "policy";
  expect_keys(j, w, {"policy", "n", "likert", "reference", "bundles", "actions"});
  PolicySpec spec;
  const std::string kind = require_string(j, w, "policy");
  if (kind == "noop") {
    spec.kind = PolicySpec::Kind::noop;
  } else if (kind == "fixed_nc") {
    spec.kind = PolicySpec::Kind::fixed_nc;
    const long long n = require_integer(j, w, "n");
    if (n < 0) throw ValidationError("policy/n: must be non-negative");
    spec.n = static_cast<std::size_t>(n);
  } else if (kind == "target_architecture") {
    spec.kind = PolicySpec::Kind::target_architecture;
    const Json& groups = require_array(j, w, "reference");
    for (const Json& g : groups) {
      if (!g.is_array()) throw ParseError("policy/reference: expected arrays of class ids", 0);
      auto& out = spec.reference.emplace_back();
      for (const Json& id : g) {
        if (!id.is_string()) throw ParseError("policy/reference: expected class id strings", 0);
        out.push_back(id.get<std::string>());
      }
    }
  } else if (kind == "replay") {
    spec.kind = PolicySpec::Kind::replay;
    for (const Json& b : require_array(j, w, "bundles")) spec.bundles.push_back(b);
  } else {
    throw ValidationError("policy/policy: unknown policy '" + kind + "'");
  }
  if (j.contains("likert")) {
    spec.likert = static_cast<int>(require_integer(j, w, "likert"));
    if (spec.likert < 1 || spec.likert > 5) throw ValidationError("policy/likert: must lie in 1..5");
  }
  if (j.contains("actions")) {
    const Json& a = j["actions"];
    expect_keys(a, "policy/actions", {"archive_first", "remove_last", "freeze_first_component", "stop_at"});
    if (a.contains("archive_first")) spec.actions.archive_first = require_bool(a, "policy/actions", "archive_first");
    if (a.contains("remove_last")) spec.actions.remove_last = require_bool(a, "policy/actions", "remove_last");
    if (a.contains("freeze_first_component")) {
      spec.actions.freeze_first_component = require_bool(a, "policy/actions", "freeze_first_component");
    }
    if (a.contains("stop_at")) {
      const long long s = require_integer(a, "policy/actions", "stop_at");
      if (s < 0) throw ValidationError("policy/actions/stop_at: must be non-negative");
      spec.actions.stop_at = static_cast<std::size_t>(s);
    }
  }
  return spec;
}

PolicySpec load_policy(const std::filesystem::path& path) { return policy_from_json(parse_json(read_file(path))); }

OrderedJson policy_to_json(const PolicySpec& spec) {
  OrderedJson j;
  j["policy"] = std::string(policy_token(spec.kind));
  switch (spec.kind) {
    case PolicySpec::Kind::fixed_nc:
      j["n"] = spec.n;
      j["likert"] = spec.likert;
      break;
    case PolicySpec::Kind::target_architecture:
      j["reference"] = spec.reference;
      j["likert"] = spec.likert;
      break;
    case PolicySpec::Kind::replay: {
      OrderedJson arr = OrderedJson::array();
      for (const auto& b : spec.bundles) arr.push_back(OrderedJson::parse(b.dump()));
      j["bundles"] = std::move(arr);
      break;
    }
    case PolicySpec::Kind::noop: break;
  }
  const auto& a = spec.actions;
  if (a != ScriptedActions{}) {
    OrderedJson ja;
    ja["archive_first"] = a.archive_first;
    ja["remove_last"] = a.remove_last;
    ja["freeze_first_component"] = a.freeze_first_component;
    if (a.stop_at) ja["stop_at"] = *a.stop_at;
    j["actions"] = std::move(ja);
  }
  return j;
}

std::unique_ptr<DecisionMaker> make_policy(const PolicySpec& spec, const AnalysisModel& model) {
  switch (spec.kind) {
    case PolicySpec::Kind::noop: return std::make_unique<NoopPolicy>(spec.actions);
    case PolicySpec::Kind::fixed_nc:
      return std::make_unique<FixedCountPolicy>(spec.n, spec.likert, spec.actions);
    case PolicySpec::Kind::target_architecture:
      return std::make_unique<TargetPolicy>(architecture_from_ids(model, spec.reference), spec.likert,
                                            spec.actions);
    case PolicySpec::Kind::replay: {
      std::vector<FeedbackBundle> bundles;
      for (const auto& b : spec.bundles) bundles.push_back(feedback_from_json(b, model));
      return std::make_unique<ReplayPolicy>(std::move(bundles));
    }
  }
  throw ConfigError("unknown policy");
}

void run_interactive(Engine& engine, const InteractionSchedule& schedule, DecisionMaker& dm,
                     const RunHooks& hooks) {
  InteractionController ctl(engine, schedule);
  while (auto shown = ctl.advance(hooks.on_generation)) {
    if (hooks.on_stop) hooks.on_stop(*shown);
    FeedbackBundle bundle = dm.decide(*shown, engine);
    ctl.submit(bundle);
    if (hooks.on_feedback) hooks.on_feedback(*shown, bundle);
  }
}

}  // namespace archevo
