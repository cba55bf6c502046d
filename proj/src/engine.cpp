#include "archevo/engine.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "archevo/errors.hpp"

namespace archevo {

void MutationWeights::validate() const {
  for (double w : {add, remove, merge, split, move}) {
    if (!(w >= 0.0)) throw ConfigError("mutation weights must be non-negative");
  }
  if (add + remove + merge + split + move <= 0.0) throw ConfigError("mutation weights must not all be zero");
}

void EngineConfig::validate() const {
  if (population_size < 2) throw ConfigError("population size must be at least 2");
  if (n_min < 2) throw ConfigError("n_min must be at least 2");
  if (n_max < n_min) throw ConfigError("n_max must be >= n_min");
  if (max_evaluations < population_size) throw ConfigError("evaluation budget smaller than the population");
  if (candidates < 1) throw ConfigError("at least one candidate per stop is required");
  mutation.validate();
  erp.validate();
  fitness.validate();
  archive.validate();
}

std::size_t EngineConfig::generations() const {
  return max_evaluations >= population_size ? (max_evaluations - population_size) / 2 : 0;
}

namespace {

std::vector<std::size_t> unfrozen(const Architecture& a, std::size_t min_classes = 1) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& c = a.components()[i];
    if (!c.frozen && c.classes.size() >= min_classes) out.push_back(i);
  }
  return out;
}

double weight_of(const MutationWeights& w, MutationOp op) {
  switch (op) {
    case MutationOp::add: return w.add;
    case MutationOp::remove: return w.remove;
    case MutationOp::merge: return w.merge;
    case MutationOp::split: return w.split;
    case MutationOp::move: return w.move;
  }
  return 0.0;
}

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.index(v.size())];
}

}  // namespace

std::vector<MutationOp> allowed_operations(const Architecture& a, ComponentBounds b) {
  const std::size_t n = a.size();
  const std::size_t free_count = unfrozen(a).size();
  const bool splittable = !unfrozen(a, 2).empty();
  std::vector<MutationOp> ops;
  if (n + 1 <= b.n_max && splittable) ops.push_back(MutationOp::add);
  if (n >= b.n_min + 1 && free_count >= 2) ops.push_back(MutationOp::remove);
  if (n >= b.n_min + 1 && free_count >= 2) ops.push_back(MutationOp::merge);
  if (n + 1 <= b.n_max && splittable) ops.push_back(MutationOp::split);
  if (splittable && free_count >= 2) ops.push_back(MutationOp::move);
  return ops;
}

std::optional<Architecture> apply_mutation(MutationOp op, const Architecture& parent, Rng& rng) {
  std::vector<Component> comps = parent.components();
  const std::size_t total = parent.class_count();
  const auto free = unfrozen(parent);
  const auto splittable = unfrozen(parent, 2);

  switch (op) {
    case MutationOp::add: {
      if (splittable.empty()) return std::nullopt;
      Component& src = comps[pick(splittable, rng)];
      const std::size_t k = rng.between(1, src.classes.size() - 1);
      rng.shuffle(std::span<ClassIndex>(src.classes));
      Component fresh;
      fresh.classes.assign(src.classes.end() - static_cast<std::ptrdiff_t>(k), src.classes.end());
      src.classes.resize(src.classes.size() - k);
      comps.push_back(std::move(fresh));
      break;
    }
    case MutationOp::remove: {
      if (free.size() < 2) return std::nullopt;
      const std::size_t victim = pick(free, rng);
      std::vector<std::size_t> targets;
      for (std::size_t i : free) {
        if (i != victim) targets.push_back(i);
      }
      for (ClassIndex c : comps[victim].classes) comps[pick(targets, rng)].classes.push_back(c);
      comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(victim));
      break;
    }
    case MutationOp::merge: {
      if (free.size() < 2) return std::nullopt;
      const std::size_t i = rng.index(free.size());
      std::size_t j = rng.index(free.size() - 1);
      if (j >= i) ++j;
      const std::size_t keep = std::min(free[i], free[j]);
      const std::size_t drop = std::max(free[i], free[j]);
      auto& dst = comps[keep].classes;
      dst.insert(dst.end(), comps[drop].classes.begin(), comps[drop].classes.end());
      comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(drop));
      break;
    }
    case MutationOp::split: {
      if (splittable.empty()) return std::nullopt;
      const std::size_t idx = pick(splittable, rng);
      std::vector<ClassIndex> left, right;
      do {
        left.clear();
        right.clear();
        for (ClassIndex c : comps[idx].classes) (rng.bernoulli(0.5) ? left : right).push_back(c);
      } while (left.empty() || right.empty());
      comps[idx].classes = std::move(left);
      Component other;
      other.classes = std::move(right);
      comps.push_back(std::move(other));
      break;
    }
    case MutationOp::move: {
      if (splittable.empty() || free.size() < 2) return std::nullopt;
      const std::size_t from = pick(splittable, rng);
      std::vector<std::size_t> targets;
      for (std::size_t i : free) {
        if (i != from) targets.push_back(i);
      }
      auto& src = comps[from].classes;
      const std::size_t pos = rng.index(src.size());
      const ClassIndex moved = src[pos];
      src.erase(src.begin() + static_cast<std::ptrdiff_t>(pos));
      comps[pick(targets, rng)].classes.push_back(moved);
      break;
    }
  }
  return Architecture(std::move(comps), total);
}

MutationResult mutate(const Architecture& parent, const Problem& problem,
                      const MutationWeights& weights, Rng& rng) {
  const ComponentBounds bounds = problem.bounds();
  for (std::size_t attempt = 1; attempt <= kMaxMutationAttempts; ++attempt) {
    auto ops = allowed_operations(parent, bounds);
    std::erase_if(ops, [&](MutationOp op) { return weight_of(weights, op) <= 0.0; });
    if (ops.empty()) return {parent, false, attempt};

    double total = 0.0;
    for (MutationOp op : ops) total += weight_of(weights, op);
    double spin = rng.uniform() * total;
    MutationOp chosen = ops.back();
    for (MutationOp op : ops) {
      spin -= weight_of(weights, op);
      if (spin < 0.0) {
        chosen = op;
        break;
      }
    }

    auto child = apply_mutation(chosen, parent, rng);
    if (!child) continue;
    if (child->size() < bounds.n_min || child->size() > bounds.n_max) continue;
    if (!check_feasibility(*child, problem.model()).feasible) continue;
    return {std::move(*child), true, attempt};
  }
  return {parent, false, kMaxMutationAttempts};
}

Engine::Engine(Problem problem, EngineConfig cfg)
    : problem_(std::move(problem)), cfg_(cfg), rng_(cfg.seed), archive_(cfg.archive) {
  cfg_.validate();
  if (cfg_.n_min > problem_.model().class_count()) {
    throw ConfigError("n_min exceeds the number of classes in the model");
  }
  total_generations_ = cfg_.generations();
  population_.reserve(cfg_.population_size);
  for (std::size_t i = 0; i < cfg_.population_size; ++i) {
    population_.push_back(
        make_individual(random_architecture(problem_.model(), cfg_.n_min, cfg_.n_max, rng_)));
  }
  std::vector<const Architecture*> archs;
  for (const auto& ind : population_) archs.push_back(&ind.architecture);
  std::vector<Evaluation> evals(population_.size());
  kernels::evaluate(cfg_.execution, problem_, archs, evals);
  for (std::size_t i = 0; i < population_.size(); ++i) {
    population_[i].raw = evals[i].raw;
    population_[i].objectives = evals[i].objectives;
    population_[i].feasibility = evals[i].feasibility;
  }
  evaluations_ = population_.size();
  refresh_fitness();
  archive_.update(population_);
}

Individual Engine::make_individual(Architecture arch) {
  Individual ind;
  ind.uid = next_uid_++;
  ind.architecture = std::move(arch);
  return ind;
}

void Engine::refresh_fitness() {
  const std::size_t np = population_.size();
  const std::size_t na = archive_.size();
  std::vector<ObjectiveVector> reference(np);
  std::unordered_map<std::uint64_t, std::size_t> position;
  for (std::size_t i = 0; i < np; ++i) {
    reference[i] = population_[i].objectives;
    position.emplace(population_[i].uid, i);
  }

  std::vector<const Architecture*> archs;
  std::vector<ObjectiveVector> queries;
  std::vector<std::size_t> self;
  archs.reserve(np + na);
  for (std::size_t i = 0; i < np; ++i) {
    archs.push_back(&population_[i].architecture);
    queries.push_back(population_[i].objectives);
    self.push_back(i);
  }
  for (const auto& m : archive_.members()) {
    archs.push_back(&m.individual.architecture);
    queries.push_back(m.individual.objectives);
    auto it = position.find(m.individual.uid);
    self.push_back(it == position.end() ? kernels::npos : it->second);
  }

  std::vector<double> raw(queries.size());
  kernels::maximin(cfg_.execution, reference, queries, self, raw);
  std::vector<std::optional<double>> sub(queries.size());
  kernels::subjective(cfg_.execution, store_, problem_, archs, queries, sub);

  auto assign = [&](Individual& ind, std::size_t k) {
    ind.fitness = make_record((1.0 + raw[k]) / 2.0, sub[k], ind.feasibility,
                              ind.fitness.removal_penalized, cfg_.fitness);
  };
  for (std::size_t i = 0; i < np; ++i) assign(population_[i], i);
  std::size_t k = np;
  archive_.refresh([&](Individual& ind) { assign(ind, k++); });
}

template <class FitnessAt>
std::size_t Engine::tournament(std::size_t size, FitnessAt&& fitness_at) {
  const std::size_t a = rng_.index(size);
  const std::size_t b = rng_.index(size);
  return better(fitness_at(a), a, fitness_at(b), b) ? a : b;
}

std::pair<Individual, Individual> Engine::select_parents() {
  auto pop_fitness = [&](std::size_t i) -> const FitnessRecord& { return population_[i].fitness; };
  const Individual first = population_[tournament(population_.size(), pop_fitness)];
  if (archive_.empty()) return {first, population_[tournament(population_.size(), pop_fitness)]};
  const auto& members = archive_.members();
  const std::size_t w = tournament(members.size(), [&](std::size_t i) -> const FitnessRecord& {
    return members[i].individual.fitness;
  });
  return {first, members[w].individual};
}

void Engine::replace(std::array<Individual, 2> offspring) {
  // Score offspring and population against the combined pool so they compete
  // on the same reference set.
  const std::size_t np = population_.size();
  std::vector<ObjectiveVector> pool(np + 2);
  std::vector<const Architecture*> archs(np + 2);
  std::vector<std::size_t> self(np + 2);
  for (std::size_t i = 0; i < np; ++i) {
    pool[i] = population_[i].objectives;
    archs[i] = &population_[i].architecture;
  }
  for (std::size_t j = 0; j < 2; ++j) {
    pool[np + j] = offspring[j].objectives;
    archs[np + j] = &offspring[j].architecture;
  }
  std::iota(self.begin(), self.end(), std::size_t{0});
  std::vector<double> raw(pool.size());
  kernels::maximin(cfg_.execution, pool, pool, self, raw);
  std::vector<std::optional<double>> sub(pool.size());
  kernels::subjective(cfg_.execution, store_, problem_, archs, pool, sub);

  std::vector<FitnessRecord> scores(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const bool penalized = i < np && population_[i].fitness.removal_penalized;
    const auto& feas = i < np ? population_[i].feasibility : offspring[i - np].feasibility;
    scores[i] = make_record((1.0 + raw[i]) / 2.0, sub[i], feas, penalized, cfg_.fitness);
  }
  for (std::size_t j = 0; j < 2; ++j) offspring[j].fitness = scores[np + j];

  auto worse_first = [&](std::size_t a, std::size_t b) { return better(scores[b], b, scores[a], a); };

  std::vector<std::size_t> order = {np, np + 1};  // best offspring first
  if (better(scores[np + 1], np + 1, scores[np], np)) std::swap(order[0], order[1]);

  std::vector<std::size_t> marked;
  for (std::size_t i = 0; i < np; ++i) {
    if (population_[i].marked_for_removal && !population_[i].preserved) marked.push_back(i);
  }
  std::sort(marked.begin(), marked.end(), worse_first);

  std::size_t used = 0;
  for (; used < 2 && used < marked.size(); ++used) {
    const std::size_t slot = marked[used];
    population_[slot] = std::move(offspring[order[used] - np]);
    scores[slot] = scores[order[used]];
  }
  for (std::size_t r = 2; r < marked.size(); ++r) {
    population_[marked[r]].fitness.removal_penalized = true;
    scores[marked[r]].removal_penalized = true;
    scores[marked[r]].combined = 1.0;
  }

  for (; used < 2; ++used) {
    const std::size_t child = order[used];
    std::size_t worst = np;
    for (std::size_t i = 0; i < np; ++i) {
      if (population_[i].preserved) continue;
      if (worst == np || better(scores[worst], worst, scores[i], i)) worst = i;
    }
    if (worst == np) break;
    if (better(scores[child], child, scores[worst], worst)) {
      population_[worst] = std::move(offspring[child - np]);
      scores[worst] = scores[child];
    }
  }
}

void Engine::step() {
  if (finished()) return;
  auto [p1, p2] = select_parents();
  std::array<Individual, 2> offspring;
  const Individual* parents[2] = {&p1, &p2};
  for (std::size_t j = 0; j < 2; ++j) {
    auto result = mutate(parents[j]->architecture, problem_, cfg_.mutation, rng_);
    offspring[j] = make_individual(std::move(result.architecture));
  }
  std::array<const Architecture*, 2> archs = {&offspring[0].architecture, &offspring[1].architecture};
  std::array<Evaluation, 2> evals;
  kernels::evaluate_serial(problem_, archs, evals);
  for (std::size_t j = 0; j < 2; ++j) {
    offspring[j].raw = evals[j].raw;
    offspring[j].objectives = evals[j].objectives;
    offspring[j].feasibility = evals[j].feasibility;
  }
  evaluations_ += 2;

  replace(std::move(offspring));
  refresh_fitness();
  archive_.update(population_);
  ++generation_;
}

GenerationStats Engine::stats() const {
  GenerationStats s;
  s.generation = generation_;
  s.evaluations = evaluations_;
  s.archive_size = archive_.size();
  s.component_histogram.assign(cfg_.n_max + 1, 0);
  s.best_combined = 1.0;
  double sum = 0.0;
  for (const auto& ind : population_) {
    s.best_combined = std::min(s.best_combined, ind.fitness.combined);
    sum += ind.fitness.combined;
    s.population_mean.icd += ind.raw.icd;
    s.population_mean.erp += ind.raw.erp;
    s.population_mean.gcr += ind.raw.gcr;
    for (std::size_t k = 0; k < kObjectiveCount; ++k) s.population_mean_normalized[k] += ind.objectives[k];
    const std::size_t n = std::min(ind.architecture.size(), cfg_.n_max);
    ++s.component_histogram[n];
  }
  const double np = static_cast<double>(population_.size());
  s.mean_combined = sum / np;
  s.population_mean.icd /= np;
  s.population_mean.erp /= np;
  s.population_mean.gcr /= np;
  for (double& v : s.population_mean_normalized) v /= np;

  s.archive_mean = MetricVector{0.0, 0.0, 0.0};
  for (const auto& m : archive_.members()) {
    s.archive_mean.icd += m.individual.raw.icd;
    s.archive_mean.erp += m.individual.raw.erp;
    s.archive_mean.gcr += m.individual.raw.gcr;
    for (std::size_t k = 0; k < kObjectiveCount; ++k) s.archive_mean_normalized[k] += m.individual.objectives[k];
  }
  if (!archive_.empty()) {
    const double na = static_cast<double>(archive_.size());
    s.archive_mean.icd /= na;
    s.archive_mean.erp /= na;
    s.archive_mean.gcr /= na;
    for (double& v : s.archive_mean_normalized) v /= na;
  }
  return s;
}

const Individual* Engine::find(std::uint64_t uid) const {
  for (const auto& ind : population_) {
    if (ind.uid == uid) return &ind;
  }
  return nullptr;
}

Individual* Engine::find_mut(std::uint64_t uid) {
  for (auto& ind : population_) {
    if (ind.uid == uid) return &ind;
  }
  return nullptr;
}

void Engine::add_preferences(std::size_t interaction_index, std::vector<Preference> prefs) {
  for (const auto& p : prefs) validate_preference(p, problem_.model(), cfg_.bounds());
  store_.add_interaction(interaction_index, std::move(prefs));
}

void Engine::mark_for_removal(std::uint64_t uid) {
  Individual* ind = find_mut(uid);
  if (!ind) throw ProtocolError("solution " + std::to_string(uid) + " is not in the population");
  ind->marked_for_removal = true;
}

void Engine::preserve(std::uint64_t uid) {
  Individual* ind = find_mut(uid);
  if (!ind) throw ProtocolError("solution " + std::to_string(uid) + " is not in the population");
  ind->preserved = true;
  ind->marked_for_removal = false;
  archive_.consider(*ind, true);
}

void Engine::freeze(std::uint64_t uid, std::span<const std::size_t> components) {
  Individual* ind = find_mut(uid);
  if (!ind) throw ProtocolError("solution " + std::to_string(uid) + " is not in the population");
  ind->architecture = ind->architecture.with_frozen(components);
}

void Engine::finish_interaction() {
  refresh_fitness();
  archive_.reduce_after_interaction();
}

}  // namespace archevo
