// Serial against OpenMP execution of the parallel kernels.

#include <benchmark/benchmark.h>

#include "cdpp/diagnostics.hpp"
#include "cdpp/exact_reference.hpp"
#include "cdpp/feature_maps.hpp"
#include "cdpp/kernel.hpp"
#include "cdpp/schur_gibbs.hpp"

namespace {

using namespace cdpp;

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

SampleSet random_points(int n, int d, std::uint64_t seed) {
  RngStream rng(seed);
  SampleSet xs;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.normal();
    xs.push_back(x);
  }
  return xs;
}

void BM_KernelMatrix(benchmark::State& state) {
  const KernelSpec kern = gaussian_kernel(3, 1.0, 0.5);
  const SampleSet xs = random_points(400, 3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(kern, xs, exec_of(state)));
}

void BM_DualMatrix(benchmark::State& state) {
  RngStream rng(2);
  const FeatureMap map = build_nystrom(gaussian_kernel(2, 1.0, 0.5), 60, rng);
  for (auto _ : state) benchmark::DoNotOptimize(dual_matrix(map, exec_of(state)));
}

void BM_NearestDistances(benchmark::State& state) {
  const SampleSet ref = random_points(2000, 10, 3), cand = random_points(200, 10, 4);
  for (auto _ : state) benchmark::DoNotOptimize(nearest_distances(ref, cand, exec_of(state)));
}

void BM_GibbsChains(benchmark::State& state) {
  const KernelSpec kern = gaussian_kernel(1, 1.0, 0.1);
  for (auto _ : state) {
    RngStream rng(5);
    benchmark::DoNotOptimize(run_gibbs_chains(kern, 5, 8, 200, 100, 5, rng, exec_of(state)));
  }
}

void BM_EstimateTv(benchmark::State& state) {
  const KernelSpec kern = gaussian_kernel(1, 1.0, 0.5);
  for (auto _ : state) {
    RngStream rng(6);
    benchmark::DoNotOptimize(estimate_tv(kern, MapKind::nystrom, 30, 5, 40, rng, exec_of(state)));
  }
}

BENCHMARK(BM_KernelMatrix)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DualMatrix)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestDistances)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GibbsChains)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateTv)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
