#include "rangewalk/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rangewalk {

// ---------------------------------------------------------------- enumeration

namespace {

struct Enumerator {
  int d, N;
  std::vector<long> stride;
  std::vector<std::uint16_t> occ;
  std::vector<std::uint64_t> counts;

  void run(long idx, int depth, int range) {
    if (depth == N) {
      ++counts[range];
      return;
    }
    for (int axis = 0; axis < d; ++axis)
      for (int sign : {1, -1}) {
        const long next = idx + sign * stride[axis];
        const bool fresh = occ[next] == 0;
        ++occ[next];
        run(next, depth + 1, range + fresh);
        --occ[next];
      }
  }
};

}  // namespace

std::vector<std::uint64_t> exact_range_counts(int d, int N) {
  check_dim(d);
  require(N >= 0, "N must be nonnegative");
  require(std::pow(2.0 * d, N) <= kEnumerationBudget, "enumeration budget exceeded: (2d)^N > 1e8");
  Enumerator e{d, N, {}, {}, std::vector<std::uint64_t>(N + 2, 0)};
  const long side = 2L * N + 1;
  long size = 1;
  for (int i = 0; i < d; ++i) {
    e.stride.push_back(size);
    size *= side;
  }
  e.occ.assign(size, 0);
  long origin = 0;
  for (int i = 0; i < d; ++i) origin += N * e.stride[i];
  e.occ[origin] = 1;
  e.run(origin, 0, 1);
  return e.counts;
}

double exact_partition(int d, int N, double beta) {
  const auto counts = exact_range_counts(d, N);
  long double z = 0;
  const long double total = std::pow(2.0L * d, N);
  for (std::size_t r = 0; r < counts.size(); ++r)
    if (counts[r]) z += counts[r] * std::exp(-static_cast<long double>(beta) * r);
  return static_cast<double>(z / total);
}

// ---------------------------------------------------------------- moves

const char* move_name(MoveKind k) {
  switch (k) {
    case MoveKind::SingleStep: return "single";
    case MoveKind::Block: return "block";
    case MoveKind::Pivot: return "pivot";
    case MoveKind::Fiber: return "fiber";
    case MoveKind::Shuffle: return "shuffle";
  }
  return "?";
}

MoveMix MoveMix::only(MoveKind k) {
  MoveMix m;
  m.p.fill(0);
  m.p[static_cast<int>(k)] = 1;
  return m;
}

void ChainConfig::validate() const {
  check_dim(d);
  require(N >= 1, "N must be at least 1");
  require(beta >= 0 && beta <= 1, "beta must lie in [0, 1]");
  double total = 0;
  for (double p : mix.p) {
    require(p >= 0, "move probabilities must be nonnegative");
    total += p;
  }
  require(std::abs(total - 1) < 1e-9, "move probabilities must sum to 1");
  require(sweeps >= 0 && burn_in >= 0 && thinning >= 1, "sweeps, burn-in and thinning out of range");
}

int ChainConfig::window() const { return std::max(1, static_cast<int>(std::floor(std::sqrt(double(N)) + 1e-9))); }

namespace {

bool accept(long delta, double beta, Rng& rng) {
  if (delta <= 0 || beta == 0) return true;
  return uniform01(rng) < std::exp(-beta * double(delta));
}

MoveKind pick_kind(const MoveMix& mix, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0;
  int last = 0;
  for (int k = 0; k < kMoveKinds; ++k) {
    if (mix.p[k] <= 0) continue;
    acc += mix.p[k];
    last = k;
    if (u < acc) return static_cast<MoveKind>(k);
  }
  return static_cast<MoveKind>(last);
}

// code -> displacement vector packed as (axis, sign); pairs with equal sum
bool same_sum(int a, int b, int c, int e) {
  Site s1 = moved(moved(Site{}, a), b);
  Site s2 = moved(moved(Site{}, c), e);
  return s1 == s2;
}

std::vector<std::pair<int, int>> pairs_with_sum(int d, int a, int b) {
  std::vector<std::pair<int, int>> out;
  for (int c = 0; c < 2 * d; ++c)
    for (int e = 0; e < 2 * d; ++e)
      if (same_sum(a, b, c, e)) out.emplace_back(c, e);
  return out;
}

// axis permutation and sign flips -> code map
std::array<std::uint8_t, 2 * kMaxDim> symmetry_map(int d, const std::array<int, kMaxDim>& perm, unsigned flips) {
  std::array<std::uint8_t, 2 * kMaxDim> map{};
  for (int a = 0; a < d; ++a)
    for (int s = 0; s < 2; ++s) map[2 * a + s] = static_cast<std::uint8_t>(2 * perm[a] + (s ^ ((flips >> a) & 1u)));
  return map;
}

long apply_window(WalkPath& walk, std::size_t first, const std::vector<std::uint8_t>& codes) {
  return walk.rewrite(first, codes);
}

}  // namespace

StepOutcome metropolis_step(WalkPath& walk, const ChainConfig& cfg, Rng& rng) {
  const int d = cfg.d;
  const std::size_t N = walk.length();
  const int W = cfg.window();
  StepOutcome out;
  out.kind = pick_kind(cfg.mix, rng);
  const auto& steps = walk.steps();

  auto try_window = [&](std::size_t first, std::vector<std::uint8_t> codes) {
    std::vector<std::uint8_t> old(steps.begin() + first, steps.begin() + first + codes.size());
    if (old == codes) {
      out.accepted = true;
      return;
    }
    out.delta = apply_window(walk, first, codes);
    out.accepted = accept(out.delta, cfg.beta, rng);
    if (!out.accepted) apply_window(walk, first, old);
  };

  switch (out.kind) {
    case MoveKind::SingleStep: {
      const std::size_t i = uniform_index(rng, N);
      const auto code = static_cast<std::uint8_t>(uniform_index(rng, 2 * d));
      try_window(i, {code});
      break;
    }
    case MoveKind::Block: {
      const std::size_t w = 1 + uniform_index(rng, W);
      const std::size_t first = uniform_index(rng, N - w + 1);
      std::vector<std::uint8_t> codes(w);
      for (auto& c : codes) c = static_cast<std::uint8_t>(uniform_index(rng, 2 * d));
      try_window(first, std::move(codes));
      break;
    }
    case MoveKind::Pivot: {
      const std::size_t k = uniform_index(rng, N);
      std::array<int, kMaxDim> perm{};
      std::iota(perm.begin(), perm.begin() + d, 0);
      for (int i = d - 1; i > 0; --i) std::swap(perm[i], perm[uniform_index(rng, i + 1)]);
      const auto flips = static_cast<unsigned>(uniform_index(rng, 1u << d));
      const auto map = symmetry_map(d, perm, flips);
      std::array<std::uint8_t, 2 * kMaxDim> inv{};
      for (int c = 0; c < 2 * d; ++c) inv[map[c]] = static_cast<std::uint8_t>(c);
      bool identity = true;
      for (int c = 0; c < 2 * d; ++c) identity = identity && map[c] == c;
      if (identity) {
        out.accepted = true;
        break;
      }
      out.delta = walk.remap_suffix(k, std::span<const std::uint8_t>(map.data(), 2 * d));
      out.accepted = accept(out.delta, cfg.beta, rng);
      if (!out.accepted) walk.remap_suffix(k, std::span<const std::uint8_t>(inv.data(), 2 * d));
      break;
    }
    case MoveKind::Fiber: {
      const std::size_t i = uniform_index(rng, N);
      const std::size_t j = i + 1 + uniform_index(rng, W);
      if (j >= N) break;  // no-op proposal
      const auto cands = pairs_with_sum(d, steps[i], steps[j]);
      const auto& pick = cands[uniform_index(rng, cands.size())];
      std::vector<std::uint8_t> codes(steps.begin() + i, steps.begin() + j + 1);
      codes.front() = static_cast<std::uint8_t>(pick.first);
      codes.back() = static_cast<std::uint8_t>(pick.second);
      try_window(i, std::move(codes));
      break;
    }
    case MoveKind::Shuffle: {
      const std::size_t wmax = std::max(2, W);
      const std::size_t w = 2 + uniform_index(rng, wmax - 1);
      if (w > N) break;
      const std::size_t first = uniform_index(rng, N - w + 1);
      std::vector<std::uint8_t> codes(steps.begin() + first, steps.begin() + first + w);
      for (std::size_t a = w - 1; a > 0; --a) std::swap(codes[a], codes[uniform_index(rng, a + 1)]);
      try_window(first, std::move(codes));
      break;
    }
  }
  if (cfg.verify && walk.range_size() != walk.recount_range())
    throw NumericalFailure("incremental range disagrees with recount");
  return out;
}

std::vector<Proposal> proposal_distribution(const std::vector<std::uint8_t>& steps, const ChainConfig& cfg) {
  const int d = cfg.d;
  const std::size_t N = steps.size();
  const int W = cfg.window();
  const int q = 2 * d;
  std::vector<Proposal> out;
  auto emit = [&](std::vector<std::uint8_t> s, double p) {
    if (p > 0) out.push_back({std::move(s), p});
  };

  if (double pk = cfg.mix[MoveKind::SingleStep]; pk > 0)
    for (std::size_t i = 0; i < N; ++i)
      for (int c = 0; c < q; ++c) {
        auto s = steps;
        s[i] = static_cast<std::uint8_t>(c);
        emit(std::move(s), pk / N / q);
      }

  if (double pk = cfg.mix[MoveKind::Block]; pk > 0)
    for (std::size_t w = 1; w <= std::size_t(W); ++w) {
      const double combos = std::pow(double(q), double(w));
      for (std::size_t first = 0; first + w <= N; ++first)
        for (long code = 0; code < long(combos); ++code) {
          auto s = steps;
          long rest = code;
          for (std::size_t k = 0; k < w; ++k) {
            s[first + k] = static_cast<std::uint8_t>(rest % q);
            rest /= q;
          }
          emit(std::move(s), pk / W / double(N - w + 1) / combos);
        }
    }

  if (double pk = cfg.mix[MoveKind::Pivot]; pk > 0) {
    std::array<int, kMaxDim> perm{};
    std::iota(perm.begin(), perm.begin() + d, 0);
    std::vector<std::array<int, kMaxDim>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.begin() + d));
    const double group = double(perms.size()) * double(1u << d);
    for (std::size_t k = 0; k < N; ++k)
      for (const auto& pm : perms)
        for (unsigned flips = 0; flips < (1u << d); ++flips) {
          const auto map = symmetry_map(d, pm, flips);
          auto s = steps;
          for (std::size_t t = k; t < N; ++t) s[t] = map[s[t]];
          emit(std::move(s), pk / N / group);
        }
  }

  if (double pk = cfg.mix[MoveKind::Fiber]; pk > 0)
    for (std::size_t i = 0; i < N; ++i)
      for (int g = 1; g <= W; ++g) {
        const std::size_t j = i + g;
        const double base = pk / N / W;
        if (j >= N) {
          emit(steps, base);
          continue;
        }
        const auto cands = pairs_with_sum(d, steps[i], steps[j]);
        for (const auto& [a, b] : cands) {
          auto s = steps;
          s[i] = static_cast<std::uint8_t>(a);
          s[j] = static_cast<std::uint8_t>(b);
          emit(std::move(s), base / cands.size());
        }
      }

  if (double pk = cfg.mix[MoveKind::Shuffle]; pk > 0) {
    const std::size_t wmax = std::max(2, W);
    for (std::size_t w = 2; w <= wmax; ++w) {
      const double base = pk / double(wmax - 1);
      if (w > N) {
        emit(steps, base);
        continue;
      }
      std::vector<std::size_t> idx(w);
      double fact = 1;
      for (std::size_t k = 2; k <= w; ++k) fact *= double(k);
      for (std::size_t first = 0; first + w <= N; ++first) {
        std::iota(idx.begin(), idx.end(), 0);
        do {
          auto s = steps;
          for (std::size_t k = 0; k < w; ++k) s[first + k] = steps[first + idx[k]];
          emit(std::move(s), base / double(N - w + 1) / fact);
        } while (std::next_permutation(idx.begin(), idx.end()));
      }
    }
  }
  return out;
}

double MoveStats::acceptance(MoveKind k) const {
  const int i = static_cast<int>(k);
  return proposed[i] ? double(accepted[i]) / double(proposed[i]) : 0.0;
}

std::vector<std::uint8_t> random_steps(int d, int N, Rng& rng) {
  std::vector<std::uint8_t> s(N);
  for (auto& c : s) c = static_cast<std::uint8_t>(uniform_index(rng, 2 * d));
  return s;
}

ChainResult run_chain(const ChainConfig& cfg, const SampleVisitor& visit) {
  cfg.validate();
  Rng init = make_rng(cfg.seed, 1);
  return run_chain(cfg, random_steps(cfg.d, cfg.N, init), visit);
}

ChainResult run_chain(const ChainConfig& cfg, std::vector<std::uint8_t> initial, const SampleVisitor& visit) {
  cfg.validate();
  require(initial.size() == std::size_t(cfg.N), "initial path has the wrong length");
  Rng rng = make_rng(cfg.seed, 0);
  ChainResult res;
  WalkPath walk = build_walk(cfg.d, Site{}, std::move(initial));
  const long total = cfg.burn_in + cfg.sweeps;
  for (long sweep = 1; sweep <= total; ++sweep) {
    for (int k = 0; k < cfg.N; ++k) {
      const auto o = metropolis_step(walk, cfg, rng);
      ++res.stats.proposed[static_cast<int>(o.kind)];
      if (o.accepted) ++res.stats.accepted[static_cast<int>(o.kind)];
    }
    if (sweep > cfg.burn_in && (sweep - cfg.burn_in) % cfg.thinning == 0) {
      SampleRecord rec;
      rec.sweep = sweep - cfg.burn_in;
      rec.range = static_cast<long>(walk.range_size());
      rec.energy = dirichlet_energy(sqrt_field(local_time(walk)));
      res.samples.push_back(rec);
      if (visit && !visit(walk, rec)) break;
    }
  }
  res.final_walk = std::move(walk);
  return res;
}

// ---------------------------------------------------------------- AIS

std::vector<double> geometric_schedule(int rungs, double beta, double first) {
  require(rungs >= 1 && beta > 0 && first > 0 && first <= beta, "bad schedule parameters");
  std::vector<double> s{0.0};
  if (rungs == 1) {
    s.push_back(beta);
    return s;
  }
  for (int k = 0; k < rungs; ++k) s.push_back(first * std::pow(beta / first, double(k) / (rungs - 1)));
  s.back() = beta;
  return s;
}

AisResult ais_partition(int d, int N, const std::vector<double>& schedule, const AisOptions& opt) {
  require(!schedule.empty() && schedule.front() == 0, "schedule must start at 0");
  for (std::size_t k = 1; k < schedule.size(); ++k)
    require(schedule[k] > schedule[k - 1] && schedule[k] <= 1, "schedule must increase within [0, 1]");
  require(opt.replicas >= 1, "need at least one replica");
  AisResult res;
  for (int r = 0; r < opt.replicas; ++r) {
    Rng rng = make_rng(opt.seed, static_cast<std::uint64_t>(r));
    WalkPath walk = build_walk(d, Site{}, random_steps(d, N, rng));
    ChainConfig cfg;
    cfg.d = d;
    cfg.N = std::max(N, 1);
    cfg.mix = opt.mix;
    double lw = 0;
    for (std::size_t k = 1; k < schedule.size(); ++k) {
      lw -= (schedule[k] - schedule[k - 1]) * double(walk.range_size());
      if (N == 0) continue;
      cfg.beta = schedule[k];
      const long moves = std::max(1L, opt.sweeps_per_rung * N);
      for (long m = 0; m < moves; ++m) metropolis_step(walk, cfg, rng);
    }
    res.log_weights.push_back(lw);
  }
  const double top = *std::max_element(res.log_weights.begin(), res.log_weights.end());
  double mean = 0;
  for (double lw : res.log_weights) mean += std::exp(lw - top);
  mean /= opt.replicas;
  double var = 0;
  for (double lw : res.log_weights) var += std::pow(std::exp(lw - top) - mean, 2);
  const double sd = opt.replicas > 1 ? std::sqrt(var / (opt.replicas - 1)) : 0.0;
  res.log_estimate = top + std::log(mean);
  res.estimate = std::exp(res.log_estimate);
  res.se = std::exp(top) * sd / std::sqrt(double(opt.replicas));
  return res;
}

// ---------------------------------------------------------------- tilted kernel

double TiltedKernel::row_sum(std::size_t i) const {
  double s = 0;
  for (double v : rows[i]) s += v;
  return s;
}

double TiltedKernel::phi_at(const Site& s) const {
  const long i = ball.index_of(s);
  return i < 0 ? 0.0 : phi[static_cast<std::size_t>(i)];
}

TiltedKernel tilted_kernel(const Domain& ball, const DiscreteEigenpair& pair) {
  require(pair.domain.size() == ball.size(), "eigenpair does not belong to this ball");
  TiltedKernel k;
  k.ball = ball;
  k.lambda1 = pair.lambda1;
  k.phi.resize(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) k.phi[i] = pair.at(ball[i]);
  k.rows.assign(ball.size(), {});
  const double survive = 1 - pair.lambda1;
  if (ball.size() < 2 || survive <= 1e-14) {
    k.degenerate = true;
    return k;
  }
  const int d = ball.dim();
  for (std::size_t i = 0; i < ball.size(); ++i)
    for (int c = 0; c < 2 * d; ++c)
      k.rows[i][c] = k.phi_at(moved(ball[i], c)) / (2.0 * d * survive * k.phi[i]);
  return k;
}

Site TiltedKernel::sample_next(const Site& x, Rng& rng) const {
  const long i = ball.index_of(x);
  require(i >= 0, "tilted kernel queried outside its ball");
  const auto& row = rows[static_cast<std::size_t>(i)];
  const int q = 2 * ball.dim();
  const double u = uniform01(rng) * row_sum(static_cast<std::size_t>(i));
  double acc = 0;
  int last = -1;
  for (int c = 0; c < q; ++c) {
    if (row[c] <= 0) continue;
    acc += row[c];
    last = c;
    if (u < acc) return moved(x, c);
  }
  require(last >= 0, "tilted kernel has an empty row");
  return moved(x, last);
}

WalkPath sample_tilted_path(const TiltedKernel& kernel, const Site& start, int N, Rng& rng) {
  require(!kernel.degenerate, "tilted kernel is degenerate");
  require(kernel.ball.contains(start), "start outside the kernel's ball");
  const int d = kernel.ball.dim();
  std::vector<std::uint8_t> steps;
  steps.reserve(N);
  Site x = start;
  for (int k = 0; k < N; ++k) {
    const Site y = kernel.sample_next(x, rng);
    for (int c = 0; c < 2 * d; ++c)
      if (moved(x, c) == y) {
        steps.push_back(static_cast<std::uint8_t>(c));
        break;
      }
    x = y;
  }
  return build_walk(d, start, std::move(steps));
}

double log_importance_weight(const WalkPath& path, const TiltedKernel& kernel) {
  const int d = path.dim();
  double lw = 0;
  for (std::size_t k = 0; k < path.length(); ++k) {
    const long i = kernel.ball.index_of(path.position(k));
    require(i >= 0 && !kernel.degenerate, "path leaves the kernel's ball");
    const double q = kernel.rows[static_cast<std::size_t>(i)][path.steps()[k]];
    require(q > 0, "path leaves the kernel's ball");
    lw += std::log(1.0 / (2.0 * d) / q);
  }
  if (path.length() > 0) require(kernel.ball.contains(path.end()), "path leaves the kernel's ball");
  return lw;
}

double importance_weight(const WalkPath& path, const TiltedKernel& kernel) {
  return std::exp(log_importance_weight(path, kernel));
}

}  // namespace rangewalk
