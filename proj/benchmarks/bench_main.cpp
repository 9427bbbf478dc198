#include <random>

#include <benchmark/benchmark.h>

#include "sensorplace/placement.hpp"
#include "sensorplace/pod.hpp"
#include "sensorplace/reconstruct.hpp"
#include "sensorplace/snapshots.hpp"

using namespace sensorplace;

namespace {

Eigen::MatrixXd gaussian(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

PodBasis demo_basis(Index rank) {
  const auto data = generate_gaussian_dataset(-10.0, 10.0, 0.01, {-2.0, 3.0}, inclusive_range(0.5, 0.2, 6.5));
  auto c = center(data);
  return truncate(compute_pod(c.fluctuations.values), RankCriterion{rank}, BasisScaling::sv_scaled, c.mean);
}

void BM_QrPivot(benchmark::State& state) {
  const auto x = gaussian(state.range(0), state.range(1), 1);
  for (auto _ : state) benchmark::DoNotOptimize(qr_pivot(x));
}
BENCHMARK(BM_QrPivot)->Args({10, 2000})->Args({30, 60})->Args({50, 5000});

void BM_ComputePod(benchmark::State& state) {
  const auto x = gaussian(state.range(0), 62, 2);
  PodOptions opts;
  opts.method = state.range(1) ? PodMethod::snapshots : PodMethod::direct_svd;
  for (auto _ : state) benchmark::DoNotOptimize(compute_pod(x, opts));
}
BENCHMARK(BM_ComputePod)->Args({2001, 0})->Args({2001, 1})->Args({20000, 1})->Unit(benchmark::kMillisecond);

void BM_PlaceDemo(benchmark::State& state) {
  const auto basis = demo_basis(5);
  const auto data = generate_gaussian_dataset(-10.0, 10.0, 0.01, {-2.0}, {1.0});
  const ConstraintSpec spacing{{}, 0.25};
  for (auto _ : state) benchmark::DoNotOptimize(place_sensors(basis, state.range(0), spacing, data.coords));
}
BENCHMARK(BM_PlaceDemo)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  const auto basis = demo_basis(5);
  const auto sensors = place_sensors(basis, state.range(0), {}, {});
  const auto fields = gaussian(basis.nodes(), 6, 3);
  const auto readings = measure(fields, sensors);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(basis, sensors, readings, basis.mean));
}
BENCHMARK(BM_Reconstruct)->Arg(5)->Arg(10);

}  // namespace
BENCHMARK_MAIN();
