#include "archevo/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "archevo/errors.hpp"
#include "json_util.hpp"

namespace archevo {

namespace {

using namespace detail;
using Clock = std::chrono::steady_clock;

double area_2d(std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double min_y = 1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    min_y = std::min(min_y, pts[i][1]);
    const double next_x = i + 1 < pts.size() ? pts[i + 1][0] : 1.0;
    area += (next_x - pts[i][0]) * (1.0 - min_y);
  }
  return area;
}

std::vector<ObjectiveVector> archive_front(const TerritoryArchive& archive) {
  std::vector<ObjectiveVector> out;
  for (const auto& m : archive.members()) {
    if (m.individual.feasibility.feasible) out.push_back(m.individual.objectives);
  }
  return out;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void finish_summary(RunSummary& s, const Engine& engine, Clock::time_point start) {
  s.final = engine.stats();
  s.front = archive_front(engine.archive());
  s.front_size = engine.archive().size();
  s.modal_components = modal_component_count(engine.population());
  s.evaluations = engine.evaluations_used();
  s.runtime_ms = elapsed_ms(start);
}

// ---- NSGA-II -------------------------------------------------------------

struct NsgaMember {
  Individual ind;
  std::size_t rank = 0;
  double crowding = 0.0;
};

bool constraint_dominates(const Individual& a, const Individual& b) {
  const bool fa = a.feasibility.feasible;
  const bool fb = b.feasibility.feasible;
  if (fa != fb) return fa;
  if (!fa) return a.feasibility.violation_count() < b.feasibility.violation_count();
  return dominates(a.objectives, b.objectives);
}

std::vector<std::vector<std::size_t>> sort_fronts(const std::vector<NsgaMember>& pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> counter(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (constraint_dominates(pop[p].ind, pop[q].ind)) {
        dominated[p].push_back(q);
      } else if (constraint_dominates(pop[q].ind, pop[p].ind)) {
        ++counter[p];
      }
    }
    if (counter[p] == 0) fronts[0].push_back(p);
  }
  for (std::size_t f = 0; !fronts[f].empty(); ++f) {
    std::vector<std::size_t> next;
    for (std::size_t p : fronts[f]) {
      for (std::size_t q : dominated[p]) {
        if (--counter[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

void assign_crowding(std::vector<NsgaMember>& pop, const std::vector<std::size_t>& front) {
  for (std::size_t i : front) pop[i].crowding = 0.0;
  if (front.size() <= 2) {
    for (std::size_t i : front) pop[i].crowding = std::numeric_limits<double>::infinity();
    return;
  }
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    std::vector<std::size_t> order = front;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pop[a].ind.objectives[k] < pop[b].ind.objectives[k];
    });
    const double lo = pop[order.front()].ind.objectives[k];
    const double hi = pop[order.back()].ind.objectives[k];
    pop[order.front()].crowding = std::numeric_limits<double>::infinity();
    pop[order.back()].crowding = std::numeric_limits<double>::infinity();
    if (hi <= lo) continue;
    for (std::size_t i = 1; i + 1 < order.size(); ++i) {
      pop[order[i]].crowding +=
          (pop[order[i + 1]].ind.objectives[k] - pop[order[i - 1]].ind.objectives[k]) / (hi - lo);
    }
  }
}

std::vector<NsgaMember> survive(std::vector<NsgaMember> pool, std::size_t size) {
  const auto fronts = sort_fronts(pool);
  std::vector<NsgaMember> next;
  next.reserve(size);
  for (std::size_t f = 0; f < fronts.size() && next.size() < size; ++f) {
    assign_crowding(pool, fronts[f]);
    for (std::size_t i : fronts[f]) pool[i].rank = f;
    std::vector<std::size_t> members = fronts[f];
    if (next.size() + members.size() > size) {
      std::stable_sort(members.begin(), members.end(),
                       [&](std::size_t a, std::size_t b) { return pool[a].crowding > pool[b].crowding; });
      members.resize(size - next.size());
    }
    for (std::size_t i : members) next.push_back(pool[i]);
  }
  return next;
}

bool crowded_better(const NsgaMember& a, const NsgaMember& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.crowding > b.crowding;
}

void evaluate_members(std::vector<NsgaMember>& members, std::size_t from, const Problem& problem,
                      Execution ex) {
  std::vector<const Architecture*> archs;
  for (std::size_t i = from; i < members.size(); ++i) archs.push_back(&members[i].ind.architecture);
  std::vector<Evaluation> evals(archs.size());
  kernels::evaluate(ex, problem, archs, evals);
  for (std::size_t i = 0; i < evals.size(); ++i) {
    auto& ind = members[from + i].ind;
    ind.raw = evals[i].raw;
    ind.objectives = evals[i].objectives;
    ind.feasibility = evals[i].feasibility;
    ind.fitness.feasible = ind.feasibility.feasible;
    ind.fitness.violation_count = ind.feasibility.violation_count();
  }
}

GenerationStats nsga_stats(const std::vector<NsgaMember>& pop, std::size_t generation,
                           std::size_t evaluations, std::size_t n_max) {
  GenerationStats s;
  s.generation = generation;
  s.evaluations = evaluations;
  s.component_histogram.assign(n_max + 1, 0);
  const double np = static_cast<double>(pop.size());
  for (const auto& m : pop) {
    s.population_mean.icd += m.ind.raw.icd / np;
    s.population_mean.erp += m.ind.raw.erp / np;
    s.population_mean.gcr += m.ind.raw.gcr / np;
    for (std::size_t k = 0; k < kObjectiveCount; ++k) s.population_mean_normalized[k] += m.ind.objectives[k] / np;
    ++s.component_histogram[std::min(m.ind.architecture.size(), n_max)];
  }
  return s;
}

// ---- experiment files ----------------------------------------------------

std::string tau_label(std::optional<double> tau) {
  if (!tau) return "default";
  std::ostringstream out;
  out << *tau;
  return out.str();
}

}  // namespace

std::vector<ObjectiveVector> nondominated(std::span<const ObjectiveVector> points) {
  std::vector<ObjectiveVector> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      dominated = j != i && dominates(points[j], points[i]);
    }
    if (!dominated) out.push_back(points[i]);
  }
  return out;
}

double hypervolume(std::span<const ObjectiveVector> front) {
  std::vector<ObjectiveVector> pts;
  for (ObjectiveVector p : front) {
    for (double& v : p) v = std::clamp(v, 0.0, 1.0);
    pts.push_back(p);
  }
  pts = nondominated(pts);
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[2] < b[2]; });
  double volume = 0.0;
  std::vector<std::array<double, 2>> slice;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    slice.push_back({pts[i][0], pts[i][1]});
    const double next_z = i + 1 < pts.size() ? pts[i + 1][2] : 1.0;
    if (next_z > pts[i][2]) volume += area_2d(slice) * (next_z - pts[i][2]);
  }
  return volume;
}

std::optional<double> spacing(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  if (n < 2) return std::nullopt;
  std::vector<double> d(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) d[i] = std::min(d[i], rectilinear(front[i], front[j]));
    }
  }
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double sq = 0.0;
  for (double v : d) sq += (mean - v) * (mean - v);
  return std::sqrt(sq / static_cast<double>(n - 1));
}

std::size_t modal_component_count(std::span<const Individual> population) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto& ind : population) ++counts[ind.architecture.size()];
  std::size_t mode = 0;
  std::size_t best = 0;
  for (const auto& [n, c] : counts) {
    if (c > best) {
      best = c;
      mode = n;
    }
  }
  return mode;
}

RunSummary run_bmoea(const Problem& problem, const EngineConfig& cfg,
                     const GenerationCallback& on_generation) {
  const auto start = Clock::now();
  Engine engine(problem, cfg);
  RunSummary s;
  s.seed = cfg.seed;
  s.initial = engine.stats();
  while (!engine.finished()) {
    engine.step();
    if (on_generation) on_generation(engine);
  }
  finish_summary(s, engine, start);
  return s;
}

RunSummary run_imoea(const Problem& problem, const EngineConfig& cfg, const PolicySpec& policy,
                     const RunHooks& hooks) {
  const auto start = Clock::now();
  Engine engine(problem, cfg);
  RunSummary s;
  s.seed = cfg.seed;
  s.initial = engine.stats();
  auto dm = make_policy(policy, problem.model());
  run_interactive(engine, build_schedule(engine.total_generations(), cfg.interactions), *dm, hooks);
  finish_summary(s, engine, start);
  return s;
}

Nsga2Result run_nsga2(const Problem& problem, const EngineConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  Rng rng(cfg.seed);
  const std::size_t size = cfg.population_size;
  std::uint64_t next_uid = 1;

  std::vector<NsgaMember> pop(size);
  for (auto& m : pop) {
    m.ind.uid = next_uid++;
    m.ind.architecture = random_architecture(problem.model(), cfg.n_min, cfg.n_max, rng);
  }
  evaluate_members(pop, 0, problem, cfg.execution);
  std::size_t evaluations = size;
  pop = survive(std::move(pop), size);

  Nsga2Result result;
  result.summary.seed = cfg.seed;
  result.summary.initial = nsga_stats(pop, 0, evaluations, cfg.n_max);

  const std::size_t generations = (cfg.max_evaluations - size) / size;
  for (std::size_t g = 0; g < generations; ++g) {
    std::vector<NsgaMember> pool = pop;
    pool.reserve(2 * size);
    for (std::size_t i = 0; i < size; ++i) {
      const std::size_t a = rng.index(size);
      const std::size_t b = rng.index(size);
      const NsgaMember& parent = crowded_better(pop[b], pop[a]) ? pop[b] : pop[a];
      NsgaMember child;
      child.ind.uid = next_uid++;
      child.ind.architecture = mutate(parent.ind.architecture, problem, cfg.mutation, rng).architecture;
      pool.push_back(std::move(child));
    }
    evaluate_members(pool, size, problem, cfg.execution);
    evaluations += size;
    pop = survive(std::move(pool), size);
  }

  RunSummary& s = result.summary;
  s.final = nsga_stats(pop, generations, evaluations, cfg.n_max);
  for (const auto& m : pop) {
    if (m.rank == 0 && m.ind.feasibility.feasible) s.front.push_back(m.ind.objectives);
    result.population.push_back(m.ind);
  }
  s.front_size = s.front.size();
  s.final.archive_size = s.front_size;
  s.modal_components = modal_component_count(result.population);
  s.evaluations = evaluations;
  s.runtime_ms = elapsed_ms(start);
  return result;
}

GeneratorSpec generator_from_json(const Json& j) {
  constexpr std::string_view w = "generator";
  expect_keys(j, w, {"n_classes", "counts", "navigable_probability", "seed"});
  GeneratorSpec g;
  const long long n = require_integer(j, w, "n_classes");
  if (n < 0) throw ValidationError("generator/n_classes: must be non-negative");
  g.n_classes = static_cast<std::size_t>(n);
  if (j.contains("counts")) {
    const Json& c = j["counts"];
    expect_keys(c, "generator/counts", {"as", "ag", "co", "ge", "de"});
    for (std::size_t k = 0; k < kRelationKindCount; ++k) {
      const std::string token(to_string(static_cast<RelationKind>(k)));
      if (!c.contains(token)) continue;
      const long long v = require_integer(c, "generator/counts", token.c_str());
      if (v < 0) throw ValidationError("generator/counts: must be non-negative");
      g.counts[k] = static_cast<std::size_t>(v);
    }
  }
  if (j.contains("navigable_probability")) {
    g.navigable_probability = require_number(j, w, "navigable_probability");
  }
  if (j.contains("seed")) g.seed = static_cast<std::uint64_t>(require_integer(j, w, "seed"));
  return g;
}

ExperimentSpec experiment_from_json(const Json& j, const std::filesystem::path& base) {
  constexpr std::string_view w = "experiment";
  expect_keys(j, w, {"instances", "algorithms", "policy", "tau0", "seeds", "config", "output", "log_every", "timing"});
  ExperimentSpec spec;
  for (const Json& ji : require_array(j, w, "instances")) {
    expect_keys(ji, "experiment/instances", {"name", "model", "generate"});
    InstanceSpec inst;
    inst.name = require_string(ji, "experiment/instances", "name");
    if (ji.contains("model")) {
      std::filesystem::path p = require_string(ji, "experiment/instances", "model");
      inst.model_path = p.is_relative() ? base / p : p;
    }
    if (ji.contains("generate")) inst.generator = generator_from_json(ji["generate"]);
    if (inst.model_path.has_value() == inst.generator.has_value()) {
      throw ValidationError("experiment/instances: '" + inst.name + "' needs exactly one of model or generate");
    }
    spec.instances.push_back(std::move(inst));
  }
  for (const Json& a : require_array(j, w, "algorithms")) {
    if (!a.is_string()) throw ParseError("experiment/algorithms: expected strings", 0);
    const std::string name = a.get<std::string>();
    if (name != "bmoea" && name != "imoea" && name != "nsga2") {
      throw ValidationError("experiment/algorithms: unknown algorithm '" + name + "'");
    }
    spec.algorithms.push_back(name);
  }
  if (j.contains("policy")) spec.policy = policy_from_json(j["policy"]);
  if (j.contains("tau0")) {
    for (const Json& t : require_array(j, w, "tau0")) {
      if (!t.is_number()) throw ParseError("experiment/tau0: expected numbers", 0);
      spec.tau0.push_back(t.get<double>());
    }
  }
  for (const Json& s : require_array(j, w, "seeds")) {
    if (!s.is_number_unsigned()) throw ParseError("experiment/seeds: expected non-negative integers", 0);
    spec.seeds.push_back(s.get<std::uint64_t>());
  }
  if (spec.seeds.empty()) throw ValidationError("experiment/seeds: at least one seed is required");
  if (j.contains("config")) spec.config = config_from_json(j["config"]);
  if (j.contains("output")) {
    std::filesystem::path p = require_string(j, w, "output");
    spec.output = p.is_relative() ? base / p : p;
  }
  if (j.contains("log_every")) {
    const long long v = require_integer(j, w, "log_every");
    if (v < 0) throw ValidationError("experiment/log_every: must be non-negative");
    spec.log_every = static_cast<std::size_t>(v);
  }
  if (j.contains("timing")) spec.timing = require_bool(j, w, "timing");
  const bool needs_policy = std::find(spec.algorithms.begin(), spec.algorithms.end(), "imoea") != spec.algorithms.end();
  if (needs_policy && !spec.policy) throw ValidationError("experiment/policy: required for imoea");
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  return experiment_from_json(parse_json(read_file(path)), path.parent_path());
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - r.mean) * (v - r.mean);
    r.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return r;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  std::vector<std::shared_ptr<const AnalysisModel>> models;
  for (const auto& inst : spec.instances) {
    models.push_back(std::make_shared<const AnalysisModel>(
        inst.model_path ? load_model(*inst.model_path) : generate_model(*inst.generator)));
  }

  ExperimentReport report;
  struct Job {
    std::size_t config;
    std::size_t instance;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  std::vector<std::optional<double>> taus;
  for (std::size_t i = 0; i < spec.instances.size(); ++i) {
    for (const auto& alg : spec.algorithms) {
      std::vector<std::optional<double>> values;
      if (alg == "nsga2" || spec.tau0.empty()) {
        values.push_back(std::nullopt);
      } else {
        values.assign(spec.tau0.begin(), spec.tau0.end());
      }
      for (const auto& tau : values) {
        ConfigurationReport c;
        c.instance = spec.instances[i].name;
        c.algorithm = alg;
        c.tau0 = tau;
        c.runs.resize(spec.seeds.size());
        for (std::size_t s = 0; s < spec.seeds.size(); ++s) jobs.push_back({report.configurations.size(), i, s});
        report.configurations.push_back(std::move(c));
      }
    }
  }

  if (spec.output) std::filesystem::create_directories(*spec.output / "logs");

  std::vector<std::string> errors(jobs.size());
  const auto njobs = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < njobs; ++k) {
    const Job& job = jobs[k];
    ConfigurationReport& c = report.configurations[job.config];
    try {
      EngineConfig cfg = spec.config;
      cfg.seed = spec.seeds[job.seed];
      cfg.execution = Execution::serial;
      if (c.tau0) {
        cfg.archive.tau0 = *c.tau0;
        cfg.archive.tau_final = std::min(cfg.archive.tau_final, *c.tau0);
      }
      const Problem problem(models[job.instance], cfg.erp, cfg.bounds());

      std::ofstream log;
      if (spec.output && spec.log_every > 0) {
        const auto path = *spec.output / "logs" /
                          (c.instance + "_" + c.algorithm + "_" + tau_label(c.tau0) + "_" +
                           std::to_string(cfg.seed) + ".jsonl");
        log.open(path, std::ios::binary | std::ios::trunc);
        if (!log) throw Error("cannot write '" + path.string() + "'");
      }
      auto on_generation = [&](const Engine& e) {
        if (log.is_open() && e.generation() % spec.log_every == 0) log << stats_to_json(e.stats()).dump() << '\n';
      };

      RunSummary r;
      if (c.algorithm == "bmoea") {
        r = run_bmoea(problem, cfg, on_generation);
      } else if (c.algorithm == "imoea") {
        RunHooks hooks;
        hooks.on_generation = on_generation;
        r = run_imoea(problem, cfg, *spec.policy, hooks);
      } else {
        r = run_nsga2(problem, cfg).summary;
        if (log.is_open()) log << stats_to_json(r.final).dump() << '\n';
      }
      if (!spec.timing) r.runtime_ms = 0.0;
      c.runs[job.seed] = std::move(r);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("experiment run failed: " + e);
  }

  if (spec.output) {
    write_file(*spec.output / "report.json", dump(report_to_json(report)));
    write_file(*spec.output / "report.csv", report_to_csv(report));
  }
  return report;
}

RunSummary summarize_engine(const Engine& engine, const GenerationStats& initial) {
  RunSummary s;
  s.seed = engine.config().seed;
  s.initial = initial;
  finish_summary(s, engine, Clock::now());
  s.runtime_ms = 0.0;
  return s;
}

OrderedJson run_summary_to_json(const RunSummary& r) {
  const auto s = spacing(r.front);
  OrderedJson jr;
  jr["seed"] = r.seed;
  jr["hv"] = hypervolume(r.front);
  jr["spacing"] = s ? OrderedJson(*s) : OrderedJson(nullptr);
  jr["archive_size"] = r.front_size;
  jr["modal_components"] = r.modal_components;
  jr["evaluations"] = r.evaluations;
  jr["initial_population_mean"] = objectives_to_json(r.initial.population_mean_normalized);
  jr["final_population_mean"] = objectives_to_json(r.final.population_mean_normalized);
  jr["final_component_histogram"] = r.final.component_histogram;
  jr["runtime_ms"] = r.runtime_ms;
  return jr;
}

OrderedJson report_to_json(const ExperimentReport& report) {
  OrderedJson configs = OrderedJson::array();
  for (const auto& c : report.configurations) {
    OrderedJson runs = OrderedJson::array();
    std::vector<double> hv, sp, size, modal;
    for (const auto& r : c.runs) {
      const double h = hypervolume(r.front);
      const auto s = spacing(r.front);
      hv.push_back(h);
      if (s) sp.push_back(*s);
      size.push_back(static_cast<double>(r.front_size));
      modal.push_back(static_cast<double>(r.modal_components));
      OrderedJson jr = run_summary_to_json(r);
      runs.push_back(std::move(jr));
    }
    auto summary = [](std::span<const double> v) {
      const MeanStd m = mean_std(v);
      return OrderedJson{{"mean", m.mean}, {"stddev", m.stddev}};
    };
    OrderedJson jc;
    jc["instance"] = c.instance;
    jc["algorithm"] = c.algorithm;
    jc["tau0"] = c.tau0 ? OrderedJson(*c.tau0) : OrderedJson(nullptr);
    jc["hv"] = summary(hv);
    jc["spacing"] = summary(sp);
    jc["archive_size"] = summary(size);
    jc["modal_components"] = summary(modal);
    jc["runs"] = std::move(runs);
    configs.push_back(std::move(jc));
  }
  OrderedJson j;
  j["configurations"] = std::move(configs);
  return j;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "instance,algorithm,tau0,seed,hv,spacing,archive_size,modal_components,runtime_ms\n";
  for (const auto& c : report.configurations) {
    for (const auto& r : c.runs) {
      const auto s = spacing(r.front);
      out << c.instance << ',' << c.algorithm << ',';
      if (c.tau0) out << *c.tau0;
      out << ',' << r.seed << ',' << hypervolume(r.front) << ',';
      if (s) out << *s;
      out << ',' << r.front_size << ',' << r.modal_components << ',' << r.runtime_ms << '\n';
    }
  }
  return out.str();
}

}  // namespace archevo
