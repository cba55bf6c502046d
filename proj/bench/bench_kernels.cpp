// Serial vs OpenMP kernels on a generated 60-class model.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "archevo/kernels.hpp"

using namespace archevo;

namespace {

struct Workload {
  std::shared_ptr<const AnalysisModel> model;
  Problem problem;
  std::vector<Architecture> archs;
  std::vector<const Architecture*> ptrs;
  std::vector<ObjectiveVector> objectives;
  std::vector<std::size_t> self;
  PreferenceStore store;

  explicit Workload(std::size_t size)
      : model(std::make_shared<const AnalysisModel>(generate_model(spec()))),
        problem(model, ErpWeights{}, ComponentBounds{2, 6}) {
    Rng rng(3);
    for (std::size_t i = 0; i < size; ++i) archs.push_back(random_architecture(*model, 2, 6, rng));
    for (const auto& a : archs) ptrs.push_back(&a);
    for (std::size_t i = 0; i < size; ++i) {
      objectives.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
      self.push_back(i);
    }
    Preference nc;
    nc.kind = PreferenceKind::number_of_components;
    nc.payload = ComponentCount{4};
    Preference best;
    best.kind = PreferenceKind::best_component;
    best.payload = ComponentTarget{{0, 1, 2, 3, 4, 5}};
    store.add_interaction(0, {nc, best});
  }

  static GeneratorSpec spec() {
    GeneratorSpec g;
    g.n_classes = 60;
    g.counts = {20, 10, 10, 14, 12};
    g.seed = 7;
    return g;
  }
};

Workload& workload(std::size_t size) {
  static std::vector<std::unique_ptr<Workload>> cache;
  for (auto& w : cache) {
    if (w->archs.size() == size) return *w;
  }
  return *cache.emplace_back(std::make_unique<Workload>(size));
}

template <Execution Ex>
void BM_Evaluate(benchmark::State& state) {
  auto& w = workload(static_cast<std::size_t>(state.range(0)));
  std::vector<Evaluation> out(w.ptrs.size());
  for (auto _ : state) {
    kernels::evaluate(Ex, w.problem, w.ptrs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Execution Ex>
void BM_Maximin(benchmark::State& state) {
  auto& w = workload(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(w.objectives.size());
  for (auto _ : state) {
    kernels::maximin(Ex, w.objectives, w.objectives, w.self, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Execution Ex>
void BM_Subjective(benchmark::State& state) {
  auto& w = workload(static_cast<std::size_t>(state.range(0)));
  std::vector<std::optional<double>> out(w.ptrs.size());
  for (auto _ : state) {
    kernels::subjective(Ex, w.store, w.problem, w.ptrs, w.objectives, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Evaluate<Execution::serial>)->Arg(150)->Arg(1000);
BENCHMARK(BM_Evaluate<Execution::parallel>)->Arg(150)->Arg(1000);
BENCHMARK(BM_Maximin<Execution::serial>)->Arg(150)->Arg(1000);
BENCHMARK(BM_Maximin<Execution::parallel>)->Arg(150)->Arg(1000);
BENCHMARK(BM_Subjective<Execution::serial>)->Arg(150)->Arg(1000);
BENCHMARK(BM_Subjective<Execution::parallel>)->Arg(150)->Arg(1000);

BENCHMARK_MAIN();
