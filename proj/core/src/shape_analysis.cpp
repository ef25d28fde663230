#include "rangewalk/shape_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace rangewalk {

// ---------------------------------------------------------------- G_loc

namespace {

struct CellRule {
  std::vector<Point> offsets;  // in cell units, inside [0,1]^d
  std::vector<double> weights; // sum to 1
};

CellRule cell_rule(int d, int order) {
  std::vector<double> nodes, w;
  gauss_legendre(order, nodes, w);
  CellRule r;
  int total = 1;
  for (int i = 0; i < d; ++i) total *= order;
  for (int k = 0; k < total; ++k) {
    int rest = k;
    Point p{};
    double weight = 1;
    for (int i = 0; i < d; ++i) {
      const int j = rest % order;
      rest /= order;
      p[i] = 0.5 * (nodes[j] + 1);
      weight *= 0.5 * w[j];
    }
    r.offsets.push_back(p);
    r.weights.push_back(weight);
  }
  return r;
}

double distance_with_rule(const GridField& ell, const Point& center, const RadialEigenfunction& phi,
                          const CellRule& rule) {
  const int d = ell.d;
  const double h = ell.spacing;
  const double vol = std::pow(h, d);
  const double R2 = phi.radius() * phi.radius();
  double abs_part = 0, phi_on_support = 0;
  for (const auto& [cell, v] : ell.values) {
    for (std::size_t q = 0; q < rule.offsets.size(); ++q) {
      double r2 = 0;
      for (int i = 0; i < d; ++i) {
        const double x = (cell[i] + rule.offsets[q][i]) * h - center[i];
        r2 += x * x;
      }
      double p2 = 0;
      if (r2 < R2) {
        const double p = phi.value(std::sqrt(r2));
        p2 = p * p;
      }
      abs_part += rule.weights[q] * vol * std::abs(v - p2);
      phi_on_support += rule.weights[q] * vol * p2;
    }
  }
  return abs_part + std::max(0.0, phi.norm_squared() - phi_on_support);
}

}  // namespace

double gloc_distance(const GridField& ell, const Point& center, const RadialEigenfunction& phi, int order) {
  require(ell.d == phi.dim(), "dimension mismatch");
  require(order >= 1, "quadrature order must be positive");
  return distance_with_rule(ell, center, phi, cell_rule(ell.d, order));
}

GlocResult gloc_test(const GridField& ell, const Point& center, const RadialEigenfunction& phi, double s) {
  GlocResult r;
  r.distance = gloc_distance(ell, center, phi);
  const double n = 1.0 / ell.spacing;
  r.threshold = std::pow(n, -s);
  r.pass = r.distance <= r.threshold;
  return r;
}

GlocFit best_gloc_center(const GridField& ell, const RadialEigenfunction& phi) {
  const int d = ell.d;
  require(!ell.values.empty(), "empty profile");
  std::vector<double> start(d, 0.0);
  double mass = 0;
  for (const auto& [cell, v] : ell.values) {
    const auto c = ell.cell_center(cell);
    for (int i = 0; i < d; ++i) start[i] += v * c[i];
    mass += v;
  }
  for (double& s : start) s /= mass;
  // cheap rule while searching, then the reporting rule
  const CellRule coarse = cell_rule(d, 2);
  auto f = [&](const std::vector<double>& x) {
    Point c{};
    for (int i = 0; i < d; ++i) c[i] = x[i];
    return distance_with_rule(ell, c, phi, coarse);
  };
  auto nm = nelder_mead(f, start, 0.5 * ell.spacing, 1e-6, 60 * d);
  GlocFit fit;
  for (int i = 0; i < d; ++i) fit.center[i] = nm.x[i];
  fit.distance = gloc_distance(ell, fit.center, phi);
  return fit;
}

// ---------------------------------------------------------------- filling

double fill_fraction(const SiteField& L, const Point& center, double radius) {
  require(radius >= 0, "radius must be nonnegative");
  const int d = L.dim();
  Site lo, hi;
  for (int i = 0; i < d; ++i) {
    lo[i] = static_cast<int>(std::floor(center[i] - radius));
    hi[i] = static_cast<int>(std::ceil(center[i] + radius));
  }
  std::size_t inside = 0, filled = 0;
  Site y = lo;
  const double r2 = radius * radius * (1 + 1e-12);
  while (true) {
    double acc = 0;
    for (int i = 0; i < d; ++i) acc += (y[i] - center[i]) * (y[i] - center[i]);
    if (acc <= r2) {
      ++inside;
      if (L(y) > 0) ++filled;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++y[i] <= hi[i]) break;
      y[i] = lo[i];
    }
    if (i == d) break;
  }
  return inside ? double(filled) / double(inside) : 1.0;
}

double fill_test(const WalkPath& walk, const Point& x, double kappa, const ScaleRelation& scale) {
  const double n = double(scale.n);
  Point c{};
  for (int i = 0; i < walk.dim(); ++i) c[i] = n * x[i];
  const double rho = continuum_constants(walk.dim()).rho;
  return fill_fraction(local_time(walk), c, rho * n * (1 - std::pow(n, -kappa)));
}

double range_exponent_fit(int d, const std::map<long, double>& mean_range) {
  require(mean_range.size() >= 3, "range exponent fit needs at least three values of n");
  std::vector<double> x, y;
  for (const auto& [n, r] : mean_range) {
    require(n >= 1 && r > 0, "range means must be positive");
    x.push_back((d + 2) * std::log(double(n)));
    y.push_back(std::log(r));
  }
  return least_squares_slope(x, y);
}

// ---------------------------------------------------------------- mesoscopic balls

long MesoBall::dist2(const Site& y) const {
  long acc = 0;
  for (int i = 0; i < d; ++i) {
    const long t = long(y[i]) - center[i];
    acc += t * t;
  }
  return acc;
}

double MesoBall::boundary_distance(const Site& y) const { return m - std::sqrt(double(dist2(y))); }

MesoBall ball_of_radius(int d, const Site& z, int m) {
  check_dim(d);
  require(m >= 1, "ball radius must be positive");
  MesoBall b;
  b.d = d;
  b.center = z;
  b.m = m;
  b.B = lattice_ball(d, z, m);
  b.core = lattice_ball(d, z, m / 2.0);
  return b;
}

MesoBall meso_ball(int d, const Site& z, long n, double kappa) {
  require(n >= 1 && kappa >= 0 && kappa < 0.5, "need n >= 1 and kappa in [0, 1/2)");
  const double rho = continuum_constants(d).rho;
  const int m = static_cast<int>(std::lround(rho * std::pow(double(n), 1 - 2 * kappa)));
  require(m >= 4, "mesoscopic radius below 4; increase n or decrease kappa");
  MesoBall b = ball_of_radius(d, z, m);
  b.n = n;
  b.kappa = kappa;
  return b;
}

double radial_derivative_constant(int d) {
  const double slope = eigenfunction_profile(d).boundary_slope();
  return slope * slope;
}

CoreTime time_in_core(const SiteField& L, const MesoBall& ball, double C) {
  require(ball.n > 0, "time_in_core needs a ball built from n and kappa");
  const auto K = continuum_constants(ball.d);
  CoreTime r;
  for (const Site& y : ball.core) r.count += L(y);
  r.delta = C * std::pow(K.rho, ball.d + 2) * K.omega / std::pow(2.0, 3 + ball.d);
  r.threshold = r.delta * std::pow(double(ball.m), ball.d) * std::pow(double(ball.n), 2 - 2 * ball.kappa);
  r.pass = r.count >= r.threshold;
  return r;
}

CoreTime time_in_core(const SiteField& L, const MesoBall& ball) {
  return time_in_core(L, ball, radial_derivative_constant(ball.d));
}

// ---------------------------------------------------------------- bridges

std::vector<BridgeRecord> detect_bridges(const WalkPath& walk, const MesoBall& ball) {
  const std::size_t len = walk.length();
  const std::size_t span = std::size_t(ball.m) * ball.m;
  std::vector<BridgeRecord> out;
  std::size_t t = 0;
  while (true) {
    while (t <= len && !ball.in_core(walk.position(t))) ++t;
    if (t + span > len) break;
    std::size_t k = t + 1;
    while (k <= t + span && ball.contains(walk.position(k))) ++k;
    if (k <= t + span) {  // left B
      t = k;
      continue;
    }
    const std::size_t end = t + span;
    if (ball.in_core(walk.position(end))) out.push_back({t, end, walk.position(t), walk.position(end)});
    t = end;
  }
  return out;
}

bool valid_bridge(const WalkPath& walk, const MesoBall& ball, const BridgeRecord& r) {
  if (r.t2 > walk.length() || r.t2 - r.t1 != std::size_t(ball.m) * ball.m) return false;
  if (walk.position(r.t1) != r.a || walk.position(r.t2) != r.b) return false;
  if (!ball.in_core(r.a) || !ball.in_core(r.b)) return false;
  for (std::size_t k = r.t1; k <= r.t2; ++k)
    if (!ball.contains(walk.position(k))) return false;
  return true;
}

int annulus_index(const MesoBall& ball, const Site& y) {
  require(ball.contains(y), "point outside the ball");
  const int levels = std::max(1, static_cast<int>(std::ceil(std::log2(double(ball.m)) - 1e-12)));
  const double dist = ball.boundary_distance(y);
  int j = 0;
  while (j + 1 < levels && dist >= std::ldexp(1.0, j + 1)) ++j;
  return j;
}

AnnuliReport dyadic_annuli(const MesoBall& ball, const std::vector<Site>& points) {
  AnnuliReport r;
  r.levels = std::max(1, static_cast<int>(std::ceil(std::log2(double(ball.m)) - 1e-12)));
  r.groups.assign(r.levels, {});
  for (const Site& y : points) r.groups[annulus_index(ball, y)].push_back(y);
  for (int j = 0; j < r.levels; ++j)
    if (r.groups[j].size() > r.count) {
      r.count = r.groups[j].size();
      r.majority = j;
    }
  return r;
}

// ---------------------------------------------------------------- walk estimates

namespace {

MeanSe bernoulli(long hits, long trials) {
  const double p = trials ? double(hits) / double(trials) : 0.0;
  return {p, trials ? std::sqrt(p * (1 - p) / double(trials)) : 0.0};
}

// walk from x for up to t steps inside the ball; returns the final offset or
// nothing if it left. Offsets are tracked relative to the centre.
bool walk_inside(const MesoBall& ball, const Site& x, long t, Rng& rng, Site& end) {
  const int d = ball.d;
  const long m2 = long(ball.m) * ball.m;
  Site off = x - ball.center;
  long r2 = ball.dist2(x);
  if (r2 > m2) return false;
  for (long k = 0; k < t; ++k) {
    const auto c = uniform_index(rng, 2 * d);
    const int a = int(c >> 1);
    const int s = (c & 1) ? -1 : 1;
    r2 += 2L * s * off[a] + 1;
    off[a] += s;
    if (r2 > m2) return false;
  }
  end = off + ball.center;
  return true;
}

struct KilledStepper {
  const MesoBall& ball;
  std::vector<std::array<long, 2 * kMaxDim>> nb;

  explicit KilledStepper(const MesoBall& b) : ball(b), nb(b.B.size()) {
    for (std::size_t i = 0; i < b.B.size(); ++i)
      for (int c = 0; c < 2 * b.d; ++c) nb[i][c] = b.B.index_of(moved(b.B[i], c));
  }
  std::vector<double> step(const std::vector<double>& p) const {
    std::vector<double> q(p.size(), 0.0);
    const double w = 1.0 / (2 * ball.d);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == 0) continue;
      for (int c = 0; c < 2 * ball.d; ++c)
        if (nb[i][c] >= 0) q[std::size_t(nb[i][c])] += w * p[i];
    }
    return q;
  }
  std::vector<double> start(const Site& s) const {
    std::vector<double> p(ball.B.size(), 0.0);
    const long i = ball.B.index_of(s);
    require(i >= 0, "start outside the ball");
    p[std::size_t(i)] = 1;
    return p;
  }
};

}  // namespace

MeanSe stay_probability(const MesoBall& ball, const Site& x, long s, long trials, std::uint64_t seed) {
  const long m2 = long(ball.m) * ball.m;
  require(2 * s >= m2 && s <= 2 * m2, "stay probability needs s in [m^2/2, 2m^2]");
  require(trials >= 1, "need at least one trial");
  Rng rng = make_rng(seed, 0);
  long hits = 0;
  Site end;
  for (long k = 0; k < trials; ++k) hits += walk_inside(ball, x, s, rng, end);
  return bernoulli(hits, trials);
}

MeanSe stay_and_hit_probability(const MesoBall& ball, const Site& a, const Site& b, long t, long trials,
                                std::uint64_t seed) {
  require(trials >= 1 && t >= 0, "need trials >= 1 and t >= 0");
  Rng rng = make_rng(seed, 0);
  long hits = 0;
  Site end;
  for (long k = 0; k < trials; ++k) hits += walk_inside(ball, a, t, rng, end) && end == b;
  return bernoulli(hits, trials);
}

std::vector<double> killed_distribution(const MesoBall& ball, const Site& start, long t) {
  require(t >= 0, "time must be nonnegative");
  KilledStepper st(ball);
  auto p = st.start(start);
  for (long k = 0; k < t; ++k) p = st.step(p);
  return p;
}

double bridge_heat_kernel(const MesoBall& ball, const Site& a, const Site& b, const Site& x, long tau, long s) {
  require(s >= 0 && s < tau, "need 0 <= s < tau");
  const long ix = ball.B.index_of(x), ib = ball.B.index_of(b);
  require(ix >= 0 && ib >= 0, "points outside the ball");
  KilledStepper st(ball);
  // from a: keep times s, s+1 and tau
  auto p = st.start(a);
  std::vector<double> at_s, at_s1;
  for (long k = 0; k < tau; ++k) {
    if (k == s) at_s = p;
    if (k == s + 1) at_s1 = p;
    p = st.step(p);
  }
  if (s + 1 == tau) at_s1 = p;
  const double total = p[std::size_t(ib)];
  require(total > 0, "b is not reachable from a in tau steps inside the ball (parity)");
  // from b, by symmetry of the killed kernel
  auto q = st.start(b);
  std::vector<double> back_s1, back_s;
  for (long k = 0; k <= tau - s; ++k) {
    if (k == tau - s - 1) back_s1 = q;
    if (k == tau - s) back_s = q;
    if (k < tau - s) q = st.step(q);
  }
  const std::size_t i = std::size_t(ix);
  return (at_s[i] * back_s[i] + at_s1[i] * back_s1[i]) / total;
}

TiltedKernel ball_kernel(const MesoBall& ball) { return tilted_kernel(ball.B, discrete_principal_eigenpair(ball.B)); }

MeanSe bridge_hit_probability(const MesoBall& ball, const TiltedKernel& kernel, const std::vector<Site>& targets,
                              long trials, std::uint64_t seed) {
  for (const Site& y : targets) require(ball.contains(y), "target outside the ball");
  require(trials >= 1, "need at least one trial");
  require(!kernel.degenerate && kernel.ball.size() == ball.B.size(), "kernel does not match the ball");
  if (targets.empty()) return {0.0, 0.0};
  std::unordered_set<Site, SiteHash> T(targets.begin(), targets.end());
  Rng rng = make_rng(seed, 0);
  const long span = long(ball.m) * ball.m;
  long hits = 0;
  for (long k = 0; k < trials; ++k) {
    bool done = false;
    for (int attempt = 0; attempt < 100000 && !done; ++attempt) {
      Site x = ball.core[uniform_index(rng, ball.core.size())];
      bool hit = T.count(x) != 0;
      for (long s = 0; s < span; ++s) {
        x = kernel.sample_next(x, rng);
        hit = hit || T.count(x);
      }
      if (!ball.in_core(x)) continue;
      hits += hit;
      done = true;
    }
    if (!done) throw NumericalFailure("bridge rejection sampler made no progress");
  }
  return bernoulli(hits, trials);
}

// ---------------------------------------------------------------- per-sample summary

ShapeSample analyse_walk(const WalkPath& walk, const ScaleRelation& scale, const RadialEigenfunction& phi,
                         double fill_factor) {
  ShapeSample out;
  const SiteField L = local_time(walk);
  out.range = static_cast<long>(walk.range_size());
  const GridField ell = rescaled_profile(L, scale);
  out.fit = best_gloc_center(ell, phi);
  const double n = double(scale.n);
  out.gloc_pass = out.fit.distance <= std::pow(n, -1.0 / 800);
  // site y carries the cell [y/n, (y+1)/n), so the site cloud sits half a cell below the fitted centre
  Point c{};
  for (int i = 0; i < walk.dim(); ++i) c[i] = n * out.fit.center[i] - 0.5;
  out.fill = fill_fraction(L, c, fill_factor * phi.radius() * n);
  return out;
}

}  // namespace rangewalk
