// Throughput of the hot paths: proposals, profile analysis, coarse-graining.
#include <benchmark/benchmark.h>

#include <map>
#include <string>

#include "rangewalk/coarse_grain.hpp"
#include "rangewalk/interpolation.hpp"
#include "rangewalk/sampler.hpp"
#include "rangewalk/shape_analysis.hpp"
#include "rangewalk/spectral.hpp"

using namespace rangewalk;

namespace {

// an equilibrated walk at scale n, cached per n
const WalkPath& equilibrated(int n) {
  static std::map<int, WalkPath> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  ChainConfig cfg;
  cfg.d = 3;
  cfg.N = n * n * n * n * n;
  cfg.sweeps = 0;
  cfg.burn_in = 300;
  cfg.seed = 17;
  return cache.emplace(n, run_chain(cfg).final_walk).first->second;
}

void BM_MetropolisSweep(benchmark::State& state) {
  const int n = int(state.range(0));
  ChainConfig cfg;
  cfg.d = 3;
  cfg.N = n * n * n * n * n;
  WalkPath walk = equilibrated(n);
  Rng rng = make_rng(1, 0);
  for (auto _ : state)
    for (int k = 0; k < cfg.N; ++k) benchmark::DoNotOptimize(metropolis_step(walk, cfg, rng));
  state.SetItemsProcessed(state.iterations() * cfg.N);
}
BENCHMARK(BM_MetropolisSweep)->Arg(4)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_MoveKind(benchmark::State& state) {
  const auto kind = MoveKind(state.range(0));
  ChainConfig cfg;
  cfg.d = 3;
  cfg.N = 3125;
  cfg.mix = MoveMix::only(kind);
  WalkPath walk = equilibrated(5);
  Rng rng = make_rng(2, 0);
  for (auto _ : state) benchmark::DoNotOptimize(metropolis_step(walk, cfg, rng));
  state.SetLabel(move_name(kind));
}
BENCHMARK(BM_MoveKind)->DenseRange(0, kMoveKinds - 1);

void BM_LocalTime(benchmark::State& state) {
  const WalkPath& w = equilibrated(int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(local_time(w));
}
BENCHMARK(BM_LocalTime)->Arg(4)->Arg(6);

void BM_AnalyseWalk(benchmark::State& state) {
  const int n = int(state.range(0));
  const WalkPath& w = equilibrated(n);
  const RadialEigenfunction phi = eigenfunction_profile(3);
  const ScaleRelation scale = ScaleRelation::from_n(3, n);
  for (auto _ : state) benchmark::DoNotOptimize(analyse_walk(w, scale, phi));
}
BENCHMARK(BM_AnalyseWalk)->Arg(4)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
  const SiteField L = local_time(equilibrated(6));
  const GammaBudget budget = gamma_budget(6, 3, 1.0, 25.0);
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(L, budget));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

void BM_IntegralIdentities(benchmark::State& state) {
  const SiteField f = sqrt_field(local_time(equilibrated(int(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(integral_identities(multilinear_interpolate(f)));
}
BENCHMARK(BM_IntegralIdentities)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_DiscreteEigenpair(benchmark::State& state) {
  const Domain ball = lattice_ball(3, Site{}, double(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(discrete_principal_eigenpair(ball));
  state.SetLabel(std::to_string(ball.size()) + " sites");
}
BENCHMARK(BM_DiscreteEigenpair)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ExactPartition(benchmark::State& state) {
  const int N = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exact_partition(3, N));
}
BENCHMARK(BM_ExactPartition)->DenseRange(6, 9)->Unit(benchmark::kMillisecond);

void BM_StayProbability(benchmark::State& state) {
  const MesoBall ball = ball_of_radius(3, Site{}, 32);
  for (auto _ : state) benchmark::DoNotOptimize(stay_probability(ball, make_site({24, 0, 0}), 1024, 1000, 5));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_StayProbability)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
