#include <benchmark/benchmark.h>

#include <vector>

#include "fluscope/anomaly.hpp"
#include "fluscope/eval.hpp"
#include "fluscope/features.hpp"
#include "fluscope/learners.hpp"
#include "fluscope/rng.hpp"
#include "fluscope/stats.hpp"

using namespace fluscope;

namespace {

std::vector<anomaly::Instance> random_instances(std::size_t n) {
  Rng rng(11);
  std::vector<anomaly::Instance> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].label = rng.bernoulli(0.2) ? Label::sick : Label::not_sick;
    out[i].z = std::abs(rng.normal()) + (is_sick(out[i].label) ? 0.4 : 0.0);
  }
  return out;
}

Dataset random_dataset(std::size_t n, std::size_t d) {
  Rng rng(5);
  Dataset data("bench", d);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    const Label l = rng.bernoulli(0.3) ? Label::sick : Label::not_sick;
    for (auto& v : row) v = rng.bernoulli(is_sick(l) ? 0.3 : 0.1) ? 1.0 : 0.0;
    data.add(row, l, std::to_string(i));
  }
  return data;
}

features::BagCorpus random_corpus(std::size_t n, std::size_t vocab, std::size_t tokens) {
  Rng rng(3);
  features::BagCorpus c;
  for (std::size_t t = 0; t < vocab; ++t) c.lexicon.intern("t" + std::to_string(t));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<features::TermId> terms;
    for (std::size_t k = 0; k < tokens; ++k) terms.push_back(static_cast<features::TermId>(rng.below(vocab)));
    c.bags.push_back(features::Bag::from_terms(std::move(terms), tokens * 5));
  }
  return c;
}

void BM_LoocvThreshold_Parallel(benchmark::State& state) {
  const auto in = random_instances(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(anomaly::fit_threshold_loocv(in));
}
void BM_LoocvThreshold_Serial(benchmark::State& state) {
  const auto in = random_instances(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(anomaly::serial::fit_threshold_loocv(in));
}
BENCHMARK(BM_LoocvThreshold_Parallel)->Arg(2000);
BENCHMARK(BM_LoocvThreshold_Serial)->Arg(2000);

void BM_Vocabulary_Parallel(benchmark::State& state) {
  const auto c = random_corpus(1800, 12000, 400);
  std::vector<std::size_t> rows(c.bags.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  for (auto _ : state) benchmark::DoNotOptimize(features::build_vocabulary(c, rows, 12393));
}
void BM_Vocabulary_Serial(benchmark::State& state) {
  const auto c = random_corpus(1800, 12000, 400);
  std::vector<std::size_t> rows(c.bags.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  for (auto _ : state) benchmark::DoNotOptimize(features::serial::build_vocabulary(c, rows, 12393));
}
BENCHMARK(BM_Vocabulary_Parallel);
BENCHMARK(BM_Vocabulary_Serial);

void BM_KFold_Parallel(benchmark::State& state) {
  const auto data = random_dataset(600, 50);
  learners::AlgorithmSpec spec;
  spec.kind = learners::Kind::decision_tree;
  for (auto _ : state) benchmark::DoNotOptimize(eval::k_fold_cv(data, 10, spec, 1));
}
void BM_KFold_Serial(benchmark::State& state) {
  const auto data = random_dataset(600, 50);
  learners::AlgorithmSpec spec;
  spec.kind = learners::Kind::decision_tree;
  for (auto _ : state) benchmark::DoNotOptimize(eval::serial::k_fold_cv(data, 10, spec, 1));
}
BENCHMARK(BM_KFold_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KFold_Serial)->Unit(benchmark::kMillisecond);

void BM_RepeatedCv_Parallel(benchmark::State& state) {
  const auto data = random_dataset(400, 20);
  learners::AlgorithmSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(eval::repeated_cv_auc_distribution(data, spec, 10, 5, 1));
}
void BM_RepeatedCv_Serial(benchmark::State& state) {
  const auto data = random_dataset(400, 20);
  learners::AlgorithmSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(eval::serial::repeated_cv_auc_distribution(data, spec, 10, 5, 1));
}
BENCHMARK(BM_RepeatedCv_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RepeatedCv_Serial)->Unit(benchmark::kMillisecond);

void BM_Fisher_Parallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stats::fisher_exact({120, 80, 95, 105}));
}
void BM_Fisher_Serial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stats::serial::fisher_exact({120, 80, 95, 105}));
}
BENCHMARK(BM_Fisher_Parallel);
BENCHMARK(BM_Fisher_Serial);

}  // namespace

BENCHMARK_MAIN();
