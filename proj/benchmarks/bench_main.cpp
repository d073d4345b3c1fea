#include <map>

#include <benchmark/benchmark.h>

#include "drabi/ed.hpp"
#include "drabi/kernel_table.hpp"
#include "drabi/wlmc.hpp"

namespace {

const drabi::KernelTable& ohmic_table(double beta) {
  static std::map<double, drabi::KernelTable> cache;
  auto it = cache.find(beta);
  if (it == cache.end())
    it = cache.emplace(beta, drabi::KernelTable::build(drabi::SpectralDensity::pure_ohmic(1.05, 10.0), beta)).first;
  return it->second;
}

void BM_KernelTableBuild(benchmark::State& state) {
  drabi::ModelParams p;
  p.g = 0.85;
  const auto sd = drabi::SpectralDensity::structured(p);
  for (auto _ : state) benchmark::DoNotOptimize(drabi::KernelTable::build(sd, static_cast<double>(state.range(0))));
}
BENCHMARK(BM_KernelTableBuild)->Arg(25)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_PairIntegral(benchmark::State& state) {
  const auto& kt = ohmic_table(400.0);
  drabi::Rng rng(7);
  std::vector<double> t(4096);
  for (auto& x : t) x = 100.0 * rng.uniform();
  std::size_t i = 0;
  for (auto _ : state) {
    const double a = t[i % t.size()], b = a + t[(i + 1) % t.size()];
    benchmark::DoNotOptimize(kt.pair_integral(a, b, b + 1.0, b + 1.0 + t[(i + 2) % t.size()]));
    ++i;
  }
}
BENCHMARK(BM_PairIntegral);

void BM_ClusterSweep(benchmark::State& state) {
  const double beta = static_cast<double>(state.range(0));
  const auto& kt = ohmic_table(beta);
  drabi::Schedule sched;
  auto st = drabi::make_chain(beta, sched);
  for (int k = 0; k < 200; ++k) drabi::cluster_sweep(st, kt, 1.0);
  for (auto _ : state) drabi::cluster_sweep(st, kt, 1.0);
}
BENCHMARK(BM_ClusterSweep)->Arg(25)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_MetropolisMove(benchmark::State& state) {
  const auto& kt = ohmic_table(100.0);
  drabi::Schedule sched;
  auto st = drabi::make_chain(100.0, sched);
  for (int k = 0; k < 200; ++k) drabi::cluster_sweep(st, kt, 1.0);
  for (auto _ : state) drabi::metropolis_kink_pair(st, kt, 1.0);
}
BENCHMARK(BM_MetropolisMove);

void BM_Diagonalize(benchmark::State& state) {
  drabi::DiscretizedBath bath{{{0.75, 0.35}, {3.0, 0.6}}, "bench"};
  drabi::FockSpec spec{{static_cast<int>(state.range(0)), static_cast<int>(state.range(0))}};
  for (auto _ : state) benchmark::DoNotOptimize(drabi::diagonalize(1.0, bath, spec));
}
BENCHMARK(BM_Diagonalize)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
