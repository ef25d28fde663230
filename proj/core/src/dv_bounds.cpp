#include "rangewalk/dv_bounds.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "rangewalk/spectral.hpp"

namespace rangewalk {

// ---------------------------------------------------------------- martingale

WeightField::WeightField(int d, double fallback) : d_(d), fallback_(fallback) {
  check_dim(d);
  require(fallback > 0, "weight fallback must be positive");
}

void WeightField::set(const Site& s, double v) {
  require(v > 0 && std::isfinite(v), "weights must be positive and finite");
  values_[s] = v;
}

double WeightField::operator()(const Site& s) const {
  auto it = values_.find(s);
  return it == values_.end() ? fallback_ : it->second;
}

double WeightField::neighbour_average(const Site& s) const {
  double acc = 0;
  for (int c = 0; c < 2 * d_; ++c) acc += (*this)(moved(s, c));
  return acc / (2.0 * d_);
}

MartingaleTrace dv_martingale_weights(const WeightField& u, const WalkPath& walk) {
  require(u.dim() == walk.dim(), "dimension mismatch between weight and walk");
  MartingaleTrace tr;
  const std::size_t N = walk.length();
  tr.log_ratio.resize(N);
  tr.values.resize(N + 1);
  double acc = 0;
  for (std::size_t k = 0; k <= N; ++k) {
    const Site& s = walk.position(k);
    tr.values[k] = std::exp(acc + std::log(u(s)));
    if (k < N) {
      tr.log_ratio[k] = std::log(u(s)) - std::log(u.neighbour_average(s));
      acc += tr.log_ratio[k];
    }
  }
  return tr;
}

double profile_probability_bound(const SiteField& phi, double alpha, long long N) {
  require(alpha > 0 && alpha < 1, "alpha must lie in (0, 1)");
  double sq = 0;
  for (const auto& kv : phi.values()) sq += kv.second * kv.second;
  require(std::abs(sq - double(N)) <= 1e-9 * double(N), "profile must satisfy sum phi^2 = N");
  const double at0 = phi(Site{});
  require(at0 >= 1, "profile must satisfy phi(0) >= 1");
  return at0 / alpha *
         std::exp(-0.5 * dirichlet_energy(phi) + alpha * std::sqrt(double(N) * double(phi.support_size())));
}

// ---------------------------------------------------------------- induced chain

double HittingChain::at(const Site& y, const Site& z) const {
  long r = closure.index_of(y), c = domain.index_of(z);
  if (r < 0 || c < 0) return 0;
  return q[std::size_t(r)][std::size_t(c)];
}

double HittingChain::dirichlet_form(const SiteField& f) const {
  double acc = 0;
  for (std::size_t j = 0; j < domain.size(); ++j) {
    const std::size_t row = std::size_t(closure.index_of(domain[j]));
    const double fy = f(domain[j]);
    for (std::size_t c = 0; c < domain.size(); ++c) {
      double diff = f(domain[c]) - fy;
      acc += q[row][c] * diff * diff;
    }
  }
  return acc;
}

namespace {

// unit-ball Green constant: G(x) ~ a_d |x|^{2-d}
double green_constant(int d) { return 0.5 * d * std::tgamma(0.5 * d - 1) * std::pow(M_PI, -0.5 * d); }

}  // namespace

HittingChain induced_chain(const Domain& D, int box_side) {
  require(!D.empty(), "induced chain of an empty set");
  const int d = D.dim();
  HittingChain ch;
  ch.domain = D;
  ch.closure = closure(D);
  ch.box_side = box_side;
  Site center;
  for (int i = 0; i < d; ++i) {
    double m = 0;
    for (const Site& s : D) m += s.c[i];
    center.c[i] = int(std::lround(m / double(D.size())));
  }
  ch.box_center = center;
  Site lo, hi;
  for (int i = 0; i < d; ++i) {
    lo.c[i] = center.c[i] + box_side / 2 - box_side + 1;
    hi.c[i] = center.c[i] + box_side / 2;
  }
  auto inside = [&](const Site& s) {
    for (int i = 0; i < d; ++i)
      if (s.c[i] < lo.c[i] || s.c[i] > hi.c[i]) return false;
    return true;
  };
  for (const Site& s : ch.closure) require(inside(s), "truncation box must contain the closure of D");

  // dense numbering of the box; D sites are not unknowns
  long total = 1;
  for (int i = 0; i < d; ++i) total *= box_side;
  auto dense = [&](const Site& s) {
    long idx = 0;
    for (int i = d - 1; i >= 0; --i) idx = idx * box_side + (s.c[i] - lo.c[i]);
    return idx;
  };
  std::vector<long> unknown(std::size_t(total), -1);
  std::vector<Site> sites;
  sites.reserve(std::size_t(total));
  {
    Site y = lo;
    while (true) {
      if (!D.contains(y)) {
        unknown[std::size_t(dense(y))] = long(sites.size());
        sites.push_back(y);
      }
      int i = 0;
      for (; i < d; ++i) {
        if (++y.c[i] <= hi.c[i]) break;
        y.c[i] = lo.c[i];
      }
      if (i == d) break;
    }
  }
  auto unknown_of = [&](const Site& s) { return inside(s) ? unknown[std::size_t(dense(s))] : -1L; };

  const double w = 1.0 / (2.0 * d);
  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sites.size() * std::size_t(2 * d + 1));
  for (std::size_t a = 0; a < sites.size(); ++a) {
    trips.emplace_back(long(a), long(a), 1.0);
    for (int c = 0; c < 2 * d; ++c) {
      long b = unknown_of(moved(sites[a], c));
      if (b >= 0) trips.emplace_back(long(a), b, -w);
    }
  }
  const long M = long(sites.size());
  SpMat A(M, M);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
  cg.setTolerance(1e-13);
  cg.setMaxIterations(20000);
  cg.compute(A);
  if (cg.info() != Eigen::Success) throw NumericalFailure("preconditioner setup failed for the hitting solve");

  const std::size_t m = D.size();
  std::vector<Eigen::VectorXd> harmonic(m);
  for (std::size_t z = 0; z < m; ++z) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(M);
    for (int c = 0; c < 2 * d; ++c) {
      long a = unknown_of(moved(D[z], c));
      if (a >= 0) b[a] += w;
    }
    harmonic[z] = cg.solve(b);
    if (cg.info() != Eigen::Success && cg.error() > 1e-10) throw NumericalFailure("hitting solve did not converge");
  }

  double escape_factor = 1;
  if (d >= 3) {
    double acc = 0;
    for (const Site& z : D) {
      int dist = std::numeric_limits<int>::max();
      for (int i = 0; i < d; ++i) dist = std::min({dist, z.c[i] - lo.c[i] + 1, hi.c[i] - z.c[i] + 1});
      acc += 1.5 * green_constant(d) * std::pow(double(dist), 2.0 - d);
    }
    escape_factor = std::min(1.0, acc);
  }

  ch.q.assign(ch.closure.size(), std::vector<double>(m, 0.0));
  ch.defect.resize(ch.closure.size());
  ch.entry_error.resize(ch.closure.size());
  for (std::size_t r = 0; r < ch.closure.size(); ++r) {
    const Site& y = ch.closure[r];
    double row = 0;
    for (std::size_t z = 0; z < m; ++z) {
      double acc = 0;
      for (int c = 0; c < 2 * d; ++c) {
        Site nb = moved(y, c);
        if (nb == D[z]) acc += 1;
        else if (long a = unknown_of(nb); a >= 0) acc += std::max(0.0, harmonic[z][a]);
      }
      ch.q[r][z] = acc * w;
      row += ch.q[r][z];
    }
    ch.defect[r] = std::max(0.0, 1.0 - row);
    ch.entry_error[r] = ch.defect[r] * escape_factor;
  }
  return ch;
}

// ---------------------------------------------------------------- GD bound

double half_energy_of_sqrt(const Domain& D, const std::vector<double>& h) {
  const int d = D.dim();
  double acc = 0;
  for (std::size_t i = 0; i < D.size(); ++i)
    for (int c = 0; c < 2 * d; c += 2) {
      long j = D.index_of(moved(D[i], c));
      if (j < 0) continue;
      double diff = std::sqrt(std::max(0.0, h[i])) - std::sqrt(std::max(0.0, h[std::size_t(j)]));
      acc += diff * diff;
    }
  // unordered edges counted once; E = (1/d) sum over them
  return 0.5 * acc / d;
}

namespace {

std::vector<double> project_simplex(const std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0, theta = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    double t = (css - 1) / double(i + 1);
    if (i + 1 == u.size() || u[i + 1] <= t) {
      theta = t;
      break;
    }
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

std::vector<double> project_l1_ball(const std::vector<double>& v, const std::vector<double>& center, double radius) {
  std::vector<double> y(v.size());
  double norm = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    y[i] = v[i] - center[i];
    norm += std::abs(y[i]);
  }
  if (norm <= radius) return v;
  std::vector<double> a(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) a[i] = std::abs(y[i]);
  std::vector<double> s = project_simplex([&] {
    std::vector<double> sc(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) sc[i] = radius > 0 ? a[i] / radius : 0;
    return sc;
  }());
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = center[i] + (y[i] < 0 ? -1 : 1) * s[i] * radius;
  return out;
}

}  // namespace

std::vector<double> project_feasible(const std::vector<double>& v, const std::vector<double>& center, double radius) {
  if (radius >= 2 + std::accumulate(center.begin(), center.end(), 0.0, [](double a, double b) { return a + std::abs(b); }))
    return project_simplex(v);
  std::vector<double> x = v, p(v.size(), 0.0), q(v.size(), 0.0), y(v.size());
  for (int it = 0; it < 20000; ++it) {
    std::vector<double> tmp(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = x[i] + p[i];
    y = project_simplex(tmp);
    for (std::size_t i = 0; i < v.size(); ++i) {
      p[i] = tmp[i] - y[i];
      tmp[i] = y[i] + q[i];
    }
    std::vector<double> nx = project_l1_ball(tmp, center, radius);
    double change = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      q[i] = tmp[i] - nx[i];
      change = std::max(change, std::abs(nx[i] - x[i]));
    }
    x = std::move(nx);
    if (change < 1e-15 && it > 2) break;
  }
  // tidy onto the simplex; the l1 slack is of the order of the iteration tolerance
  double s = 0;
  for (auto& v2 : x) {
    v2 = std::max(0.0, v2);
    s += v2;
  }
  for (auto& v2 : x) v2 /= s;
  return x;
}

GdBound gd_upper_bound(const Domain& D, const SiteField& g_sq, int t, double radius, std::uint64_t seed) {
  require(!D.empty(), "empty domain");
  require(t >= 1, "t must be positive");
  require(radius >= 0, "radius must be nonnegative");
  const std::size_t m = D.size();
  std::vector<double> target(m);
  double mass = 0;
  for (std::size_t i = 0; i < m; ++i) {
    target[i] = g_sq(D[i]) / t;
    mass += target[i];
  }
  // l1 distance from a nonnegative vector to the simplex is |1 - mass|
  if (std::abs(1 - mass) > radius + 1e-12) throw Infeasible("the l1 ball misses the probability simplex");

  GdBound out;
  out.infimum = std::numeric_limits<double>::infinity();
  Rng rng = make_rng(seed, 0);
  std::vector<std::vector<double>> starts;
  starts.push_back(target);
  starts.emplace_back(m, 1.0 / double(m));
  for (int k = 0; k < 3; ++k) {
    std::vector<double> v(m);
    for (auto& x : v) x = -std::log(1 - uniform01(rng));
    starts.push_back(v);
  }
  for (auto& st : starts) {
    std::vector<double> h = project_feasible(st, target, radius);
    double f = half_energy_of_sqrt(D, h);
    double eta = 0.5;
    const int d = D.dim();
    for (int it = 0; it < 4000 && eta > 1e-13; ++it) {
      std::vector<double> s(m), grad(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) s[i] = std::sqrt(h[i]);
      for (std::size_t i = 0; i < m; ++i)
        for (int c = 0; c < 2 * d; ++c) {
          long j = D.index_of(moved(D[i], c));
          if (j >= 0) grad[i] += (s[i] - s[std::size_t(j)]) / d;
        }
      std::vector<double> trial(m);
      for (std::size_t i = 0; i < m; ++i) {
        double si = std::max(0.0, s[i] - eta * grad[i]);
        trial[i] = si * si;
      }
      trial = project_feasible(trial, target, radius);
      double ft = half_energy_of_sqrt(D, trial);
      if (ft < f - 1e-16) {
        h = std::move(trial);
        f = ft;
        eta *= 1.5;
      } else {
        eta *= 0.5;
      }
    }
    ++out.starts;
    if (f < out.infimum) {
      out.infimum = f;
      out.argmin = h;
    }
  }
  out.bound = std::exp(-double(t) * out.infimum);
  return out;
}

// ---------------------------------------------------------------- occupation events

bool OccupationEvent::contains(const std::vector<int>& counts) const {
  double dist = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) dist += std::abs(double(counts[i]) / t - target[i]);
  return dist <= radius + 1e-12;
}

OccupationEvent make_event(const Domain& D, const SiteField& g_sq, int t, double radius) {
  require(t >= 1, "t must be positive");
  OccupationEvent ev;
  ev.domain = D;
  ev.t = t;
  ev.radius = radius;
  ev.target.resize(D.size());
  for (std::size_t i = 0; i < D.size(); ++i) ev.target[i] = g_sq(D[i]) / t;
  return ev;
}

McEstimate estimate_occupation(const OccupationEvent& ev, const Site& start, long trials, Rng& rng,
                               const McOptions& opt) {
  const Domain& D = ev.domain;
  const int d = D.dim();
  Site lo = D[0], hi = D[0];
  for (const Site& s : D)
    for (int i = 0; i < d; ++i) {
      lo.c[i] = std::min(lo.c[i], s.c[i]);
      hi.c[i] = std::max(hi.c[i], s.c[i]);
    }
  // dense lookup on the bounding box of D
  std::array<int, kMaxDim> ext{}, stride{};
  long cells = 1;
  for (int i = 0; i < d; ++i) {
    ext[i] = hi.c[i] - lo.c[i] + 1;
    stride[i] = int(cells);
    cells *= ext[i];
  }
  std::vector<int> lookup(std::size_t(cells), -1);
  for (std::size_t j = 0; j < D.size(); ++j) {
    long idx = 0;
    for (int i = 0; i < d; ++i) idx += long(D[j].c[i] - lo.c[i]) * stride[i];
    lookup[std::size_t(idx)] = int(j);
  }
  const long cap = opt.cap_factor * ev.t;
  McEstimate est;
  est.trials = trials;
  std::vector<int> counts(D.size());
  for (long n = 0; n < trials; ++n) {
    std::fill(counts.begin(), counts.end(), 0);
    std::array<int, kMaxDim> pos{};
    for (int i = 0; i < d; ++i) pos[i] = start.c[i];
    int visits = 0;
    bool done = false;
    for (long step = 0;; ++step) {
      bool in_box = true, far = false;
      long idx = 0;
      for (int i = 0; i < d; ++i) {
        int off = pos[i] - lo.c[i];
        if (off < 0 || off >= ext[i]) in_box = false;
        if (off < -opt.margin || off >= ext[i] + opt.margin) far = true;
        idx += long(off) * stride[i];
      }
      if (far) {
        ++est.escaped;
        break;
      }
      if (in_box) {
        int j = lookup[std::size_t(idx)];
        if (j >= 0) {
          ++counts[std::size_t(j)];
          if (++visits == ev.t) {
            done = true;
            break;
          }
        }
      }
      if (step >= cap) {
        ++est.capped;
        break;
      }
      int code = int(uniform_index(rng, std::uint64_t(2 * d)));
      pos[code >> 1] += (code & 1) ? -1 : 1;
    }
    if (done && ev.contains(counts)) ++est.hits;
  }
  est.p = double(est.hits) / double(trials);
  est.se = std::sqrt(std::max(est.p * (1 - est.p), 1.0 / double(trials)) / double(trials));
  return est;
}

ChainProbability chain_event_probability(const HittingChain& chain, const OccupationEvent& ev, const Site& start) {
  const std::size_t m = chain.domain.size();
  require(m <= 10, "exact chain probabilities are limited to |D| <= 10");
  require(ev.domain.size() == m, "event and chain domains differ");
  long row0 = chain.closure.index_of(start);
  require(row0 >= 0, "start must lie in the closure of D");
  const std::uint64_t base = std::uint64_t(ev.t) + 1;
  double states = std::pow(double(base), double(m));
  require(states < 1.8e19, "count encoding overflows");
  std::vector<std::uint64_t> pow_base(m, 1);
  for (std::size_t i = 1; i < m; ++i) pow_base[i] = pow_base[i - 1] * base;

  // key: encoded counts, value: probability per current site
  using Level = std::unordered_map<std::uint64_t, std::vector<double>>;
  Level cur;
  long start_col = chain.domain.index_of(start);
  if (start_col >= 0) {
    cur[pow_base[std::size_t(start_col)]] = std::vector<double>(m, 0.0);
    cur.begin()->second[std::size_t(start_col)] = 1.0;
  } else {
    for (std::size_t z = 0; z < m; ++z) {
      auto& v = cur[pow_base[z]];
      v.resize(m, 0.0);
      v[z] = chain.q[std::size_t(row0)][z];
    }
  }
  std::vector<std::size_t> row_of(m);
  double worst = 0;
  for (std::size_t z = 0; z < m; ++z) {
    row_of[z] = std::size_t(chain.closure.index_of(chain.domain[z]));
    worst = std::max(worst, chain.entry_error[row_of[z]]);
  }
  worst = std::max(worst, chain.entry_error[std::size_t(row0)]);
  for (int step = 1; step < ev.t; ++step) {
    Level next;
    next.reserve(cur.size() * 2);
    for (const auto& [key, probs] : cur)
      for (std::size_t y = 0; y < m; ++y) {
        if (probs[y] == 0) continue;
        const auto& qrow = chain.q[row_of[y]];
        for (std::size_t z = 0; z < m; ++z) {
          double p = probs[y] * qrow[z];
          if (p == 0) continue;
          auto& v = next[key + pow_base[z]];
          if (v.empty()) v.assign(m, 0.0);
          v[z] += p;
        }
      }
    cur = std::move(next);
  }
  ChainProbability out;
  std::vector<int> counts(m);
  for (const auto& [key, probs] : cur) {
    std::uint64_t k = key;
    for (std::size_t i = 0; i < m; ++i) {
      counts[i] = int(k % base);
      k /= base;
    }
    if (!ev.contains(counts)) continue;
    for (double p : probs) out.p += p;
  }
  out.error = double(ev.t) * double(m) * worst;
  return out;
}

// ---------------------------------------------------------------- return probabilities

namespace {

struct LogFactorials {
  std::vector<double> v;
  explicit LogFactorials(long long k) : v(std::size_t(k) + 1) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::lgamma(double(i) + 1);
  }
  double choose(long long n, long long r) const {
    return v[std::size_t(n)] - v[std::size_t(r)] - v[std::size_t(n - r)];
  }
};

// ln P_0(S_j = a) for the one-dimensional walk
double log_p1(const LogFactorials& lf, long long j, long long a) {
  a = std::llabs(a);
  if (a > j || ((j + a) & 1)) return -std::numeric_limits<double>::infinity();
  return lf.choose(j, (j + a) / 2) - double(j) * M_LN2;
}

// P_0(S_m = x) for every m in [0, k], dimensions first..d-1 of x
std::vector<double> suffix_probabilities(const LogFactorials& lf, const Site& x, int first, int d, long long k) {
  const int dims = d - first;
  std::vector<double> out(std::size_t(k) + 1, 0.0);
  if (dims == 1) {
    for (long long m = 0; m <= k; ++m) out[std::size_t(m)] = std::exp(log_p1(lf, m, x.c[first]));
    return out;
  }
  if (dims == 2) {
    // rotate by 45 degrees: the two diagonal coordinates are independent walks
    long long u = x.c[first] + x.c[first + 1], v = x.c[first] - x.c[first + 1];
    for (long long m = 0; m <= k; ++m) out[std::size_t(m)] = std::exp(log_p1(lf, m, u) + log_p1(lf, m, v));
    return out;
  }
  auto rest = suffix_probabilities(lf, x, first + 1, d, k);
  const double lp = std::log(1.0 / dims), lq = std::log(1.0 - 1.0 / dims);
  for (long long m = 0; m <= k; ++m) {
    double acc = 0;
    for (long long j = 0; j <= m; ++j) {
      double r = rest[std::size_t(m - j)];
      if (r == 0) continue;
      double l1 = log_p1(lf, j, x.c[first]);
      if (!std::isfinite(l1)) continue;
      acc += std::exp(lf.choose(m, j) + double(j) * lp + double(m - j) * lq + l1) * r;
    }
    out[std::size_t(m)] = acc;
  }
  return out;
}

double point_probability(const LogFactorials& lf, const Site& x, int d, long long k) {
  if (k < 0) return 0;
  if (d <= 2) return suffix_probabilities(lf, x, 0, d, k)[std::size_t(k)];
  // only the top level needs a single m
  auto rest = suffix_probabilities(lf, x, 1, d, k);
  const double lp = std::log(1.0 / d), lq = std::log(1.0 - 1.0 / d);
  double acc = 0;
  for (long long j = 0; j <= k; ++j) {
    double r = rest[std::size_t(k - j)];
    if (r == 0) continue;
    double l1 = log_p1(lf, j, x.c[0]);
    if (!std::isfinite(l1)) continue;
    acc += std::exp(lf.choose(k, j) + double(j) * lp + double(k - j) * lq + l1) * r;
  }
  return acc;
}

}  // namespace

double return_probability(const Site& x, int d, long long k) {
  check_dim(d);
  require(k >= 1 && k <= 10000, "exact return probabilities need 1 <= k <= 10^4");
  require(l1_norm(x) <= 100, "exact return probabilities need |x|_1 <= 100");
  LogFactorials lf(k);
  return point_probability(lf, x, d, k) + point_probability(lf, x, d, k - 1);
}

double return_probability_bound(int d, long long n, long long k, double c_prime) {
  require(k >= 1, "k must be positive");
  return std::exp(-c_prime * std::pow(double(n), 2.0 * d) / double(k));
}

double return_probability_floor(const Site& x, int d, long long k) {
  double r2 = 0;
  for (int i = 0; i < d; ++i) r2 += double(x.c[i]) * x.c[i];
  return std::exp(-double(d) / double(k) * r2 - 2.0 * d * (std::log(double(k)) + 2));
}

// ---------------------------------------------------------------- origin correction

OriginCorrectionReport origin_correction_check(const Domain& D, const SiteField& g_sq, int t, int k, double radius,
                                               long trials, std::uint64_t seed, const McOptions& opt) {
  require(k >= 1 && k < t, "origin correction needs 1 <= k < t");
  OriginCorrectionReport rep;
  const int d = D.dim();
  auto ev = make_event(D, g_sq, t, radius);
  auto wide = make_event(D, g_sq, t, radius + 4.0 * k / double(t - k));
  rep.inflated_radius = wide.radius;

  Rng rng_lhs = make_rng(seed, 0);
  auto lhs = estimate_occupation(ev, Site{}, trials, rng_lhs, opt);
  rep.lhs = lhs.p;
  rep.lhs_se = lhs.se;

  int extent = 0;
  for (int i = 0; i < d; ++i) {
    int lo = D[0].c[i], hi = D[0].c[i];
    for (const Site& s : D) {
      lo = std::min(lo, s.c[i]);
      hi = std::max(hi, s.c[i]);
    }
    extent = std::max(extent, hi - lo + 1);
  }
  auto chain = induced_chain(D, extent + 2 * opt.margin);
  double best = std::numeric_limits<double>::infinity();
  for (const Site& x : chain.closure) {
    double rp = return_probability(x, d, k);
    if (rp <= 0) continue;
    double ratio = 2 * chain_event_probability(chain, wide, x).p / rp;
    if (ratio < best) {
      best = ratio;
      rep.worst_x = x;
      rep.return_prob = rp;
    }
  }
  Rng rng_rhs = make_rng(seed, 1);
  auto rhs = estimate_occupation(wide, rep.worst_x, trials, rng_rhs, opt);
  rep.rhs = 2 * rhs.p / rep.return_prob;
  rep.rhs_se = 2 * rhs.se / rep.return_prob;
  rep.pass = rep.lhs <= rep.rhs + 3 * std::hypot(rep.lhs_se, rep.rhs_se);
  return rep;
}

AprioriTerms apriori_bound_terms(int d, long long n, double c, double kappa, double k1) {
  check_dim(d);
  require(n >= 2, "n must be at least 2");
  AprioriTerms out;
  out.k1 = k1 > 0 ? k1 : continuum_constants(d).chi;
  const double nd = std::pow(double(n), d);
  out.range_tail_log = -(c - 2 * out.k1) * nd;
  const double rate = kappa / 2 - 4.0 * d * c;
  out.energy_vacuous = rate <= 0;
  out.energy_tail_log = out.energy_vacuous ? 0.0 : -rate * nd * std::log(double(n));
  return out;
}

}  // namespace rangewalk
