// Serial reference against the OpenMP paths for the two hot loops.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mmls/approximator.hpp"
#include "mmls/datasets.hpp"
#include "mmls/distance.hpp"

namespace {

mmls::RowMatrix random_points(mmls::Index rows, mmls::Index cols) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  mmls::RowMatrix p(rows, cols);
  for (mmls::Index i = 0; i < p.size(); ++i) p.data()[i] = g(rng);
  return p;
}

template <bool Parallel>
void BM_SquaredDistances(benchmark::State& state) {
  const mmls::RowMatrix p = random_points(2000, state.range(0));
  const mmls::Vector x = mmls::Vector::Ones(state.range(0));
  std::vector<double> out(2000);
  for (auto _ : state) {
    if constexpr (Parallel) mmls::squared_distances(p, x, out);
    else mmls::squared_distances_serial(p, x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * p.size() * static_cast<int64_t>(sizeof(double)));
}

struct HelixBatch {
  mmls::SampleSet samples;
  mmls::RowMatrix queries;
};

const HelixBatch& helix_batch() {
  static const HelixBatch batch = [] {
    using namespace mmls::datasets;
    const auto train = gen_helix(2000, NoiseModel::constant(0.0, 1.0, 2));
    const auto q = gen_helix(256, NoiseModel::constant(0.05, 0.0, 3), -6.0, 6.0);
    return HelixBatch{train.samples, q.samples.points()};
  }();
  return batch;
}

template <bool Parallel>
void BM_ApproximateBatch(benchmark::State& state) {
  const HelixBatch& b = helix_batch();
  mmls::ApproxConfig cfg;
  cfg.m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto res = Parallel ? mmls::approximate_batch(b.queries, b.samples, cfg)
                        : mmls::approximate_batch_serial(b.queries, b.samples, cfg);
    benchmark::DoNotOptimize(res.values.data());
  }
  state.SetItemsProcessed(state.iterations() * b.queries.rows());
}

}  // namespace

BENCHMARK(BM_SquaredDistances<false>)->Arg(100)->Arg(1000)->Arg(10000)->Name("squared_distances/serial");
BENCHMARK(BM_SquaredDistances<true>)->Arg(100)->Arg(1000)->Arg(10000)->Name("squared_distances/openmp");
BENCHMARK(BM_ApproximateBatch<false>)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->Name("approximate_batch/serial");
BENCHMARK(BM_ApproximateBatch<true>)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->Name("approximate_batch/openmp");

BENCHMARK_MAIN();
