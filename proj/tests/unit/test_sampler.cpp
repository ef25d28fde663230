#include <cmath>
#include <map>
#include <unordered_map>

#include "doctest.h"
#include "rangewalk/sampler.hpp"
#include "exact_kernel.hpp"

using namespace rangewalk;
using namespace rangewalk::testing;

namespace {

std::vector<std::uint8_t> straight(int N) { return std::vector<std::uint8_t>(N, 0); }

// +e1, -e1, +e1, ...: range 2, the opposite extreme from the straight line
std::vector<std::uint8_t> oscillating(int N) {
  std::vector<std::uint8_t> s(N);
  for (int k = 0; k < N; ++k) s[k] = std::uint8_t(k % 2);
  return s;
}

}  // namespace

TEST_CASE("exact partition") {
  CHECK(exact_partition(3, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(std::abs(exact_partition(3, 1) - std::exp(-2.0)) < 1e-12);
  CHECK(std::abs(exact_partition(3, 2) - (std::exp(-2.0) / 6 + 5 * std::exp(-3.0) / 6)) < 1e-12);
  CHECK(exact_partition(3, 2) == doctest::Approx(0.064045).epsilon(1e-5));
  CHECK(exact_partition(2, 5, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(exact_partition(3, 11), InvalidInput);

  // enumeration oracle through full path construction
  for (auto [d, N] : {std::pair{2, 6}, std::pair{3, 4}, std::pair{1, 10}}) {
    std::map<std::size_t, std::uint64_t> brute;
    for_each_path(d, N, [&](const std::vector<std::uint8_t>& s) { ++brute[build_walk(d, Site{}, s).recount_range()]; });
    auto counts = exact_range_counts(d, N);
    for (std::size_t r = 0; r < counts.size(); ++r) CHECK(counts[r] == (brute.count(r) ? brute[r] : 0));
  }
}

TEST_CASE("metropolis acceptance rules") {
  ChainConfig cfg;
  cfg.d = 3;
  cfg.N = 200;
  cfg.beta = 0;
  cfg.verify = true;
  Rng rng(4);
  WalkPath w = build_walk(3, Site{}, random_steps(3, 200, rng));
  for (int i = 0; i < 5000; ++i) {
    auto o = metropolis_step(w, cfg, rng);
    // fiber and shuffle windows that run off the end are no-ops
    if (o.kind != MoveKind::Fiber) CHECK(o.accepted);
  }
  cfg.beta = 1;
  for (int i = 0; i < 20000; ++i) {
    auto o = metropolis_step(w, cfg, rng);
    if (o.delta <= 0 && o.kind != MoveKind::Fiber) CHECK(o.accepted);
  }
  // every kind on its own keeps the bookkeeping right
  for (int k = 0; k < kMoveKinds; ++k) {
    cfg.mix = MoveMix::only(MoveKind(k));
    for (int i = 0; i < 500; ++i) metropolis_step(w, cfg, rng);
  }
  CHECK(w.range_size() == w.recount_range());

  ChainConfig bad;
  bad.beta = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad.beta = 1;
  bad.mix.p[0] += 0.1;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("exact kernel has the tilted measure as stationary vector") {
  ChainConfig cfg;
  cfg.d = 2;
  cfg.N = 4;
  cfg.beta = 1;
  auto K = assemble(cfg);
  CHECK(stationarity_error(K) < 1e-10);
  // detailed balance pairwise
  double worst = 0;
  for (std::size_t s = 0; s < K.pi.size(); ++s)
    for (const auto& [t, p] : K.rows[s]) {
      auto it = K.rows[t].find(s);
      const double back = it == K.rows[t].end() ? 0.0 : it->second;
      worst = std::max(worst, std::abs(K.pi[s] * p - K.pi[t] * back));
    }
  CHECK(worst < 1e-12);
  for (const auto& row : K.rows) {
    double total = 0;
    for (const auto& [t, p] : row) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  // each move kind alone
  for (int k = 0; k < kMoveKinds; ++k) {
    cfg.mix = MoveMix::only(MoveKind(k));
    CHECK(stationarity_error(assemble(cfg)) < 1e-10);
  }
}

TEST_CASE("exact kernel stationarity across small sizes") {
  std::vector<std::pair<int, int>> sizes;
  for (int d = 1; d <= 3; ++d)
    for (int N = 1; std::pow(2.0 * d, N) <= 1e5; ++N) sizes.emplace_back(d, N);
  // pivot groups grow as 2^d d!, so higher dimensions stop at 10^4 states
  for (int d = 4; d <= 6; ++d)
    for (int N = 1; std::pow(2.0 * d, N) <= 1e4; ++N) sizes.emplace_back(d, N);
  for (auto [d, N] : sizes) {
    CAPTURE(d);
    CAPTURE(N);
    ChainConfig cfg;
    cfg.d = d;
    cfg.N = N;
    cfg.beta = 0.7;
    CHECK(stationarity_error(assemble(cfg)) < 1e-10);
  }
}

TEST_CASE("chain reproduces the exact range law") {
  ChainConfig cfg;
  cfg.d = 2;
  cfg.N = 7;
  cfg.beta = 1;
  cfg.sweeps = 60000;
  cfg.burn_in = 100;
  cfg.seed = 9;
  auto counts = exact_range_counts(2, 7);
  std::vector<double> target(counts.size());
  double Z = 0;
  for (std::size_t r = 0; r < counts.size(); ++r) Z += target[r] = counts[r] * std::exp(-double(r));
  auto res = run_chain(cfg);
  std::vector<double> seen(counts.size(), 0.0);
  for (const auto& s : res.samples) seen[s.range] += 1;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    const double p = target[r] / Z;
    const double q = seen[r] / res.samples.size();
    // generous for autocorrelation: 6 binomial SE plus a floor
    CHECK(std::abs(p - q) < 6 * std::sqrt(p * (1 - p) / res.samples.size()) * 3 + 1e-3);
  }
}

TEST_CASE("seed determinism") {
  ChainConfig cfg;
  cfg.d = 3;
  cfg.N = 243;
  cfg.sweeps = 50;
  cfg.burn_in = 5;
  cfg.seed = 77;
  auto a = run_chain(cfg);
  auto b = run_chain(cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].range == b.samples[i].range);
    CHECK(a.samples[i].energy == b.samples[i].energy);
  }
  CHECK(a.final_walk.steps() == b.final_walk.steps());
  cfg.seed = 78;
  CHECK(run_chain(cfg).final_walk.steps() != a.final_walk.steps());
}

TEST_CASE("annealed importance sampling") {
  AisOptions opt;
  opt.replicas = 8;
  auto one = ais_partition(3, 8, {0.0}, opt);
  CHECK(one.estimate == 1.0);
  CHECK(one.se == 0.0);

  opt.replicas = 64;
  opt.seed = 3;
  const double exact = exact_partition(3, 8);
  auto est = ais_partition(3, 8, geometric_schedule(64), opt);
  MESSAGE("Z_8 exact " << exact << " AIS " << est.estimate << " +- " << est.se);
  CHECK(std::abs(est.estimate - exact) <= 3 * est.se);
  CHECK(est.se > 0);

  auto half = ais_partition(3, 8, geometric_schedule(64, 0.5), opt);
  CHECK(std::abs(half.estimate - exact_partition(3, 8, 0.5)) <= 3 * half.se);
  CHECK(half.estimate >= est.estimate - 3 * est.se);

  CHECK_THROWS_AS(ais_partition(3, 8, {0.0, 0.5, 0.4}, opt), InvalidInput);
}

TEST_CASE("tilted kernel") {
  auto single = lattice_ball(3, Site{}, 0.5);
  REQUIRE(single.size() == 1);
  auto ks = tilted_kernel(single, discrete_principal_eigenpair(single));
  CHECK(ks.degenerate);

  auto ball = lattice_ball(3, Site{}, 8);
  auto pair = discrete_principal_eigenpair(ball);
  auto K = tilted_kernel(ball, pair);
  CHECK_FALSE(K.degenerate);
  double worst = 0;
  for (std::size_t i = 0; i < ball.size(); ++i) worst = std::max(worst, std::abs(K.row_sum(i) - 1));
  CHECK(worst < 1e-10);

  Rng rng(12);
  WalkPath zero = sample_tilted_path(K, Site{}, 0, rng);
  CHECK(importance_weight(zero, K) == 1.0);

  for (int trial = 0; trial < 50; ++trial) {
    Site start = ball[uniform_index(rng, ball.size())];
    auto path = sample_tilted_path(K, start, 1 + int(uniform_index(rng, 300)), rng);
    for (const Site& s : path.positions()) REQUIRE(ball.contains(s));
    const double closed = std::pow(1 - K.lambda1, double(path.length())) * K.phi_at(path.start()) / K.phi_at(path.end());
    CHECK(std::abs(importance_weight(path, K) / closed - 1) < 1e-10);
  }

  // leaving the ball is rejected
  auto out = build_walk(3, Site{}, std::vector<std::uint8_t>(9, 0));
  CHECK_THROWS_AS(log_importance_weight(out, K), InvalidInput);
}

TEST_CASE("h-transform survival identity") {
  auto ball = lattice_ball(3, Site{}, 8);
  auto K = tilted_kernel(ball, discrete_principal_eigenpair(ball));
  const Site x = make_site({2, -1, 3});
  const int N = 200;
  const int trials = 40000;
  Rng rng(21);
  // direct: plain walk stays in the ball
  double stay = 0;
  for (int t = 0; t < trials; ++t) {
    Site y = x;
    bool in = true;
    for (int k = 0; k < N && in; ++k) {
      y = moved(y, int(uniform_index(rng, 6)));
      in = ball.contains(y);
    }
    stay += in;
  }
  const double p = stay / trials;
  const double p_se = std::sqrt(p * (1 - p) / trials);
  // tilted: weights
  double sw = 0, sw2 = 0;
  for (int t = 0; t < trials; ++t) {
    const double w = importance_weight(sample_tilted_path(K, x, N, rng), K);
    sw += w;
    sw2 += w * w;
  }
  const double m = sw / trials;
  const double m_se = std::sqrt((sw2 / trials - m * m) / trials);
  MESSAGE("direct " << p << " +- " << p_se << ", tilted " << m << " +- " << m_se);
  CHECK(std::abs(p - m) <= 3 * std::hypot(p_se, m_se));
  CHECK(p > 0.005);
}

TEST_CASE("two-sample KS") {
  Rng rng(5);
  std::vector<double> a, b, c;
  for (int i = 0; i < 2000; ++i) {
    a.push_back(uniform01(rng));
    b.push_back(uniform01(rng));
    c.push_back(std::sqrt(uniform01(rng)));
  }
  CHECK(ks_two_sample(a, b).p_value > 0.01);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
  CHECK(ks_two_sample(a, a).statistic == 0);
}

TEST_CASE("chains from opposite starts agree") {
  ChainConfig cfg;
  cfg.d = 3;
  cfg.N = 3125;
  cfg.beta = 1;
  cfg.burn_in = 600;
  cfg.sweeps = 1500;
  cfg.thinning = 5;
  cfg.seed = 100;
  auto a = run_chain(cfg, straight(cfg.N));
  cfg.seed = 200;
  auto b = run_chain(cfg, oscillating(cfg.N));
  std::vector<double> ra, rb;
  for (const auto& s : a.samples) ra.push_back(double(s.range));
  for (const auto& s : b.samples) rb.push_back(double(s.range));
  auto ks = ks_two_sample(ra, rb);
  MESSAGE("KS D=" << ks.statistic << " p=" << ks.p_value);
  CHECK(ks.p_value > 0.01);
}
