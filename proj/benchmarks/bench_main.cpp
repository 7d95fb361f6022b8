#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "delconf/align.hpp"
#include "delconf/birnn.hpp"
#include "delconf/metrics.hpp"
#include "delconf/pipeline.hpp"
#include "delconf/random.hpp"
#include "delconf/select.hpp"
#include "delconf/simgen.hpp"

using namespace delconf;

namespace {

std::vector<std::string> random_tokens(Rng& rng, std::size_t n) {
  std::vector<std::string> out(n);
  for (auto& t : out) t = "w" + std::to_string(rng.below(50));
  return out;
}

void BM_Align(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto hyp = random_tokens(rng, n);
  const auto ref = random_tokens(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(align::levenshtein_align(hyp, ref).total_cost);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Align)->RangeMultiplier(4)->Range(8, 512)->Complexity();

void BM_RocAuc(benchmark::State& state) {
  Rng rng(2);
  metrics::ScoredSet set;
  for (int i = 0; i < state.range(0); ++i) {
    set.scores.push_back(rng.uniform());
    set.labels.push_back(rng.bernoulli(0.7));
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::roc_auc(set));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RocAuc)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

birnn::Example random_example(Rng& rng, std::size_t steps, std::size_t dim) {
  birnn::Example ex;
  for (std::size_t t = 0; t < steps; ++t) {
    features::FeatureVector x(dim);
    for (auto& v : x) v = rng.normal();
    ex.xs.push_back(x);
    ex.targets.c.push_back(rng.bernoulli(0.7));
    ex.targets.d.push_back(rng.bernoulli(0.1));
  }
  return ex;
}

void BM_BiRnnForward(benchmark::State& state) {
  Rng rng(3);
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const auto model = birnn::init_model(57, hidden, true, 1);
  const auto ex = random_example(rng, 12, 57);
  for (auto _ : state) benchmark::DoNotOptimize(birnn::forward(model, ex.xs).c.data());
}
BENCHMARK(BM_BiRnnForward)->Arg(16)->Arg(64)->Arg(128);

void BM_BiRnnGradients(benchmark::State& state) {
  Rng rng(4);
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const auto model = birnn::init_model(57, hidden, true, 1);
  const std::vector<birnn::Example> batch{random_example(rng, 12, 57)};
  for (auto _ : state) benchmark::DoNotOptimize(birnn::gradients(model, batch, 1e-4).loss);
}
BENCHMARK(BM_BiRnnGradients)->Arg(16)->Arg(64)->Arg(128);

void BM_FitThresholds(benchmark::State& state) {
  auto config = simgen::preset("mismatched");
  config.n_utts = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<corpus::LabeledUtterance> dev;
  for (auto& u : simgen::generate(config)) {
    corpus::Predictions p;
    for (std::size_t k = 0; k < u.size(); ++k) {
      p.c.push_back(rng.uniform());
      p.d.push_back(rng.uniform());
    }
    p.s = rng.uniform();
    u.predictions = p;
    dev.push_back(std::move(u));
  }
  const auto grid = selection::ThresholdGrid::standard();
  for (auto _ : state) benchmark::DoNotOptimize(selection::fit_thresholds(dev, grid).mse);
}
BENCHMARK(BM_FitThresholds)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
