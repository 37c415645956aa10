// Serial reference kernels versus their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sgscn/kernels.hpp"

namespace {

using namespace sgscn::kernels;

std::vector<float> random_vec(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> d;
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

ConvDims dims(const benchmark::State& s) {
  const auto ci = static_cast<std::size_t>(s.range(0));
  const auto hw = static_cast<std::size_t>(s.range(1));
  return {ci, 100, hw, hw};
}

template <bool Parallel>
void conv_forward(benchmark::State& state) {
  const auto d = dims(state);
  const auto x = random_vec(d.in_channels * d.plane(), 1);
  const auto w = random_vec(d.out_channels * d.patch(), 2);
  const auto b = random_vec(d.out_channels, 3);
  std::vector<float> y(d.out_channels * d.plane());
  for (auto _ : state) {
    if constexpr (Parallel) {
      omp::conv3x3_forward(d, x.data(), w.data(), b.data(), y.data());
    } else {
      serial::conv3x3_forward(d, x.data(), w.data(), b.data(), y.data());
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(d.out_channels * d.plane() * d.patch()));
}

template <bool Parallel>
void conv_backward(benchmark::State& state) {
  const auto d = dims(state);
  const auto x = random_vec(d.in_channels * d.plane(), 1);
  const auto w = random_vec(d.out_channels * d.patch(), 2);
  const auto dy = random_vec(d.out_channels * d.plane(), 3);
  std::vector<float> dx(x.size()), dw(w.size()), db(d.out_channels);
  for (auto _ : state) {
    if constexpr (Parallel) {
      omp::conv3x3_backward(d, x.data(), w.data(), dy.data(), dx.data(), dw.data(), db.data());
    } else {
      serial::conv3x3_backward(d, x.data(), w.data(), dy.data(), dx.data(), dw.data(), db.data());
    }
    benchmark::DoNotOptimize(dx.data());
  }
}

template <bool Parallel>
void assign(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 3, k = 6;
  const auto pts = random_vec(n * dim, 1);
  const auto cents = random_vec(k * dim, 2);
  std::vector<std::int32_t> labels(n);
  std::vector<float> dist(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      omp::assign_nearest(n, dim, pts.data(), k, cents.data(), labels.data(), dist.data());
    } else {
      serial::assign_nearest(n, dim, pts.data(), k, cents.data(), labels.data(), dist.data());
    }
    benchmark::DoNotOptimize(labels.data());
  }
}

void conv_args(benchmark::internal::Benchmark* b) {
  b->Args({3, 32})->Args({100, 32})->Args({100, 64})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(conv_forward<false>)->Name("conv_forward/serial")->Apply(conv_args);
BENCHMARK(conv_forward<true>)->Name("conv_forward/omp")->Apply(conv_args);
BENCHMARK(conv_backward<false>)->Name("conv_backward/serial")->Apply(conv_args);
BENCHMARK(conv_backward<true>)->Name("conv_backward/omp")->Apply(conv_args);
BENCHMARK(assign<false>)->Name("assign_nearest/serial")->Arg(128 * 128)->Arg(512 * 512);
BENCHMARK(assign<true>)->Name("assign_nearest/omp")->Arg(128 * 128)->Arg(512 * 512);

BENCHMARK_MAIN();
