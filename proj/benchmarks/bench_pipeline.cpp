#include <benchmark/benchmark.h>

#include <vector>

#include "msig/classifiers.hpp"
#include "msig/dtw.hpp"
#include "msig/features.hpp"
#include "msig/rng.hpp"
#include "msig/signal.hpp"
#include "msig/synth.hpp"

namespace {

std::vector<double> random_sequence(std::size_t n, std::uint64_t seed) {
  msig::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

msig::SignatureCorpus bench_corpus() {
  msig::GeneratorParams params;
  params.n_users = 8;
  params.n_forgers_per_user = 3;
  params.n_forgeries_per_forger = 2;
  params.min_duration_s = 1.5;
  params.max_duration_s = 2.5;
  params.seed = 99;
  return msig::generate_corpus(params);
}

void BM_DtwDistance(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::vector<double> a = random_sequence(n, 1);
  const std::vector<double> b = random_sequence(n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(msig::dtw_distance(a, b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DtwDistance)->RangeMultiplier(2)->Range(16, 512)->Complexity();

void BM_DctCompress(benchmark::State& state) {
  msig::MotionSignal sig;
  sig.samples = random_sequence(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(msig::dct_compress(sig));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DctCompress)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_PreprocessRecording(benchmark::State& state) {
  static const msig::SignatureCorpus corpus = bench_corpus();
  const msig::SignatureRecording& rec = corpus.users[0].genuine[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(msig::preprocess(rec));
  }
}
BENCHMARK(BM_PreprocessRecording);

void BM_ExtractFeatures(benchmark::State& state) {
  static const msig::SignatureCorpus corpus = bench_corpus();
  msig::ReferenceSet refs;
  refs.user_id = corpus.users[0].user_id;
  const std::size_t n_refs = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < n_refs; ++i) {
    refs.references.push_back(msig::preprocess(corpus.users[0].genuine[i]));
  }
  const msig::CompressedSignature questioned =
      msig::preprocess(corpus.users[0].genuine[n_refs]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(msig::extract_features(questioned, refs));
  }
}
BENCHMARK(BM_ExtractFeatures)->DenseRange(2, 10, 2);

void BM_TrainLogistic(benchmark::State& state) {
  static const msig::TrainingSet ts = msig::build_training_set(bench_corpus(), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(msig::train_logistic(ts));
  }
}
BENCHMARK(BM_TrainLogistic);

void BM_TrainRandomForest(benchmark::State& state) {
  static const msig::TrainingSet ts = msig::build_training_set(bench_corpus(), 7);
  msig::ForestConfig config;
  config.n_trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(msig::train_random_forest(ts, config));
  }
}
BENCHMARK(BM_TrainRandomForest)->Arg(25)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
