#include "rangewalk/coarse_grain.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace rangewalk {

namespace {

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Calls fn(offset) for offset in {lo..hi}^d.
template <class F>
void for_each_offset(int d, int lo, int hi, F&& fn) {
  Site off;
  for (int i = 0; i < d; ++i) off[i] = lo;
  while (true) {
    fn(off);
    int i = 0;
    while (i < d && off[i] == hi) off[i++] = lo;
    if (i == d) return;
    ++off[i];
  }
}

std::vector<Site> sorted_unique(std::vector<Site> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double talenti_constant(int d) {
  const double dd = d;
  return std::pow(std::tgamma(dd) / std::tgamma(dd / 2), 1.0 / dd) / std::sqrt(M_PI * dd * (dd - 2));
}

}  // namespace

double FunctionalConstants::averaging(int d) const { return std::sqrt(2.0 * d) * c_pw; }

double FunctionalConstants::low_density(int d) const { return 4.0 * d * c_ups * c_ups; }

FunctionalConstants FunctionalConstants::defaults(int d) {
  check_dim(d);
  FunctionalConstants k;
  k.c_pw = 1.0 / (2.0 * std::sqrt(2.0));
  // constant fields give exactly 1 on a box; sampled maximum over random fields is below that
  k.c_ups = 1.2;
  // continuum optimum over sqrt 2 with 25% headroom; discrete fields run a few percent above it
  const double base = d >= 3 ? std::max(talenti_constant(d) / std::sqrt(2.0), 0.5 / std::sqrt(double(d))) : 1.0;
  k.c_ps = 1.25 * base;
  return k;
}

int block_offset(int n) {
  require(n >= 1, "block side must be positive");
  return -((n + 1) / 2) + 1;
}

Site block_of(const Site& y, int n) {
  const int o = block_offset(n);
  Site b;
  for (int i = 0; i < kMaxDim; ++i) b[i] = static_cast<int>(floor_div(static_cast<long long>(y[i]) - o, n));
  return b;
}

std::vector<Site> block_sites(const Site& block, int d, int n) {
  const int o = block_offset(n);
  Site base;
  for (int i = 0; i < d; ++i) base[i] = n * block[i] + o;
  std::vector<Site> out;
  for_each_offset(d, 0, n - 1, [&](const Site& off) { out.push_back(base + off); });
  return out;
}

std::vector<Site> high_density_blocks(const SiteField& f, int n, double delta) {
  const int d = f.dim();
  require(d >= 3, "high-density blocks need d >= 3");
  require(n >= 1 && delta > 0, "block side and density level must be positive");
  const double p = critical_exponent(d);
  std::unordered_map<Site, double, SiteHash> mass;
  for (const auto& [s, v] : f.values()) mass[block_of(s, n)] += std::pow(v, p);
  const double threshold = std::pow(delta, p) * std::pow(double(n), d + p);
  std::vector<Site> out;
  for (const auto& [b, m] : mass)
    if (m >= threshold) out.push_back(b);
  std::sort(out.begin(), out.end());
  return out;
}

BlockDecomposition enlarge_and_domains(const std::vector<Site>& X, int d, int n, int M) {
  check_dim(d);
  require(n >= 1 && M >= 1 && n % M == 0, "sub-block side must divide the block side");
  BlockDecomposition dec;
  dec.d = d;
  dec.n = n;
  dec.M = M;
  dec.X = sorted_unique(X);
  std::vector<Site> hat;
  for (const Site& x : dec.X) for_each_offset(d, -1, 1, [&](const Site& off) { hat.push_back(x + off); });
  dec.Xhat = sorted_unique(std::move(hat));

  std::vector<Site> dsites, esites;
  for (const Site& b : dec.Xhat) {
    auto s = block_sites(b, d, n);
    dsites.insert(dsites.end(), s.begin(), s.end());
  }
  for (const Site& b : dec.X) {
    auto s = block_sites(b, d, n);
    esites.insert(esites.end(), s.begin(), s.end());
  }
  dec.D = Domain(d, sorted_unique(std::move(dsites)));
  dec.E = Domain(d, sorted_unique(std::move(esites)));

  const int ratio = n / M;
  std::vector<Site> subs;
  for (const Site& b : dec.Xhat)
    for_each_offset(d, 0, ratio - 1, [&](const Site& off) {
      Site s;
      for (int i = 0; i < d; ++i) s[i] = ratio * b[i] + off[i];
      subs.push_back(s);
    });
  dec.sub_blocks = sorted_unique(std::move(subs));
  return dec;
}

SiteField local_average(const SiteField& f, int M, int anchor) {
  require(M >= 1, "averaging side must be positive");
  const int d = f.dim();
  std::unordered_map<Site, double, SiteHash> sums;
  for (const auto& [s, v] : f.values()) {
    Site b;
    for (int i = 0; i < d; ++i) b[i] = static_cast<int>(floor_div(static_cast<long long>(s[i]) - anchor, M));
    sums[b] += v;
  }
  const double vol = std::pow(double(M), d);
  SiteField out(d);
  for (const auto& [b, total] : sums) {
    Site base;
    for (int i = 0; i < d; ++i) base[i] = M * b[i] + anchor;
    const double mean = total / vol;
    for_each_offset(d, 0, M - 1, [&](const Site& off) { out.set(base + off, mean); });
  }
  return out;
}

SiteField local_average(const SiteField& f, int M) { return local_average(f, M, block_offset(M)); }

CoarseProfile discretize(const SiteField& fbar, double eta, const Domain& D, int M) {
  require(eta > 0, "discretisation step must be positive");
  CoarseProfile out;
  out.M = M;
  out.eta = eta;
  out.values = SiteField(fbar.dim());
  for (const Site& s : D) {
    const double v = fbar(s);
    if (v <= 0) continue;
    // values already on the eta grid must not drop a level through rounding
    const double k = std::floor(v / eta + 1e-9);
    if (k > 0) out.values.set(s, k * eta);
  }
  return out;
}

Exponents Exponents::defaults(int d) {
  require(d >= 3, "coarse-graining exponents need d >= 3");
  Exponents e;
  e.alpha = d / 12.0;
  e.beta = 0.75;
  e.gamma = double(d) * d / (12.0 * (d - 2));
  e.rho = 15.0 / 8.0;
  return e;
}

int largest_divisor_at_most(long long n, double bound) {
  require(n >= 1, "n must be positive");
  long long best = 1;
  for (long long i = 1; i * i <= n; ++i) {
    if (n % i) continue;
    if (i <= bound) best = std::max(best, i);
    const long long j = n / i;
    if (j <= bound) best = std::max(best, j);
  }
  return static_cast<int>(best);
}

GammaBudget gamma_budget(long long n, int d, double c, double kappa, const Exponents& e,
                         const FunctionalConstants& k) {
  require(d >= 3, "coarse-graining budget needs d >= 3");
  require(n >= 2, "n must be at least 2");
  require(c > 0 && kappa > 0, "c and kappa must be positive");
  GammaBudget g;
  g.d = d;
  g.n = n;
  g.c = c;
  g.kappa = kappa;
  g.exps = e;
  const double nn = double(n);
  const double p = critical_exponent(d);
  const double nd = std::pow(nn, d);
  const double ln = std::log(nn);
  g.N = std::pow(nn, d + 2);
  g.delta = std::pow(nn, -e.alpha);
  g.eta = std::pow(nn, -e.gamma);
  g.lambda = std::pow(nn, e.rho);
  g.M_raw = std::pow(nn, e.beta);
  g.M = largest_divisor_at_most(n, g.M_raw * (1 + 1e-12));

  const double avg = k.averaging(d);
  const double card = std::pow(g.delta, -p) * std::pow(k.c_ps, p) * std::pow(2.0 * d * kappa * ln, p / 2);
  g.card_x_bound = card;
  g.c0 = std::pow(g.delta, -p) * std::pow(kappa, 4) * std::pow(ln, 5);
  g.gamma0 = g.M * avg * std::sqrt(kappa * nd * ln) + std::sqrt(g.eta * g.eta * std::pow(3.0, d) * card * nd);
  g.gamma1 = g.gamma0 * (2 * std::sqrt(g.N) + g.gamma0);
  // outside the high-density blocks: sum f^{2*} <= c_d thr^{1-2/2*} (n^d + kappa n^d ln n), then Hoelder on a range of c n^d
  const double thr = std::pow(g.delta, p) * std::pow(nn, d + p);
  const double outside = k.low_density(d) * std::pow(thr, 1 - 2 / p) * nd * (1 + kappa * ln);
  g.gamma2 = std::pow(outside, 2 / p) * std::pow(c * nd, 1 - 2 / p);
  g.r = 14 * g.gamma1 / g.N + 8 * g.gamma2 / g.N;
  g.gamma3 = g.gamma2 / g.N + 2 * g.gamma1 / g.N + g.r;
  g.gamma4 = g.gamma3 + 4 * std::sqrt(2 * c * g.lambda / (nn * nn));

  g.constraints = {e.beta < 1,
                   (p / 2) * e.alpha - e.gamma < e.beta,
                   p * e.alpha < d * e.beta,
                   1 + e.beta < e.rho,
                   2 - 4 * e.alpha / d < e.rho,
                   e.rho < 2};
  g.constraints_ok = std::all_of(g.constraints.begin(), g.constraints.end(), [](bool b) { return b; });
  const double sq = std::sqrt(g.N);
  g.size_checks = {g.gamma0 < sq, g.gamma1 < 3 * g.gamma0 * sq, std::pow(nn, d + 1) < g.gamma1,
                   g.gamma1 < std::pow(nn, d + 2), g.gamma2 < g.N / 2};
  g.sizes_ok = std::all_of(g.size_checks.begin(), g.size_checks.end(), [](bool b) { return b; });
  return g;
}

GammaBudget gamma_budget(long long n, int d, double c, double kappa) {
  return gamma_budget(n, d, c, kappa, Exponents::defaults(d), FunctionalConstants::defaults(d));
}

long long size_threshold(int d, double c, double kappa, const Exponents& e, const FunctionalConstants& k,
                         long long n_max) {
  for (long long n = 2; n <= n_max; ++n)
    if (gamma_budget(n, d, c, kappa, e, k).sizes_ok) return n;
  return -1;
}

double cutoff_profile(const std::array<double, kMaxDim>& u, int d) {
  double m = 0;
  for (int i = 0; i < d; ++i) m = std::max(m, std::abs(u[i]));
  return std::clamp(4.0 * (7.0 / 8.0 - m), 0.0, 1.0);
}

SiteField cutoff_function(const BlockDecomposition& dec) {
  SiteField out(dec.d);
  const double n = dec.n;
  for (const Site& y : dec.D) {
    double best = 0;
    for (const Site& x : dec.X) {
      std::array<double, kMaxDim> u{};
      for (int i = 0; i < dec.d; ++i) u[i] = y[i] / n - x[i];
      best = std::max(best, cutoff_profile(u, dec.d));
      if (best >= 1) break;
    }
    if (best > 0) out.set(y, best);
  }
  return out;
}

TruncationCheck truncated_energy_check(const SiteField& f, const BlockDecomposition& dec) {
  const SiteField phi = cutoff_function(dec);
  SiteField prod(dec.d);
  double outer = 0;
  for (const auto& [s, v] : f.values()) {
    if (!dec.D.contains(s)) continue;
    const double w = phi(s);
    if (w > 0) prod.set(s, w * v);
    if (!dec.E.contains(s)) outer += v * v;
  }
  TruncationCheck r;
  r.lhs = dirichlet_energy(f, &dec.D);
  const double root = std::sqrt(dirichlet_energy(prod)) - 4.0 / dec.n * std::sqrt(outer);
  r.rhs = root > 0 ? root * root : 0;
  r.pass = r.lhs >= r.rhs * (1 - 1e-12) - 1e-12;
  return r;
}

double upper_bound_functional(const SiteField& h, double N, long long n) {
  require(n >= 1 && N > 0, "N and n must be positive");
  std::size_t positive = 0;
  for (const auto& [s, v] : h.values()) {
    require(v >= 0, "upper-bound functional needs h >= 0");
    if (v > 0) ++positive;
  }
  const double nn = double(n);
  const double root = std::sqrt(dirichlet_energy(sqrt_field(h))) - std::pow(nn, -9.0 / 8.0);
  const double tail = root > 0 ? root * root : 0;
  return double(positive) + N / 2 * (1 - std::pow(nn, -0.25)) * tail;
}

PipelineReport run_pipeline(const SiteField& local_time, const GammaBudget& budget) {
  require(local_time.dim() == budget.d, "dimension mismatch");
  PipelineReport rep;
  rep.budget = budget;
  const int n = static_cast<int>(budget.n);
  const SiteField f = sqrt_field(local_time);
  rep.energy = dirichlet_energy(f);
  rep.energy_event = rep.energy <= budget.kappa * std::pow(double(n), budget.d) * std::log(double(n));
  rep.dec = enlarge_and_domains(high_density_blocks(f, n, budget.delta), budget.d, n, budget.M);
  const SiteField fbar = local_average(f, budget.M, block_offset(n));
  rep.coarse = discretize(fbar, budget.eta, rep.dec.D, budget.M);
  double sq = 0, l1 = 0;
  for (const Site& s : rep.dec.D) {
    const double g = rep.coarse.values(s);
    const double diff = f(s) - g;
    sq += diff * diff;
    l1 += std::abs(local_time(s) - g * g);
  }
  rep.dist_f = std::sqrt(sq);
  rep.dist_L = l1;
  rep.within_gamma0 = rep.dist_f < budget.gamma0;
  rep.within_gamma1 = rep.dist_L < budget.gamma1;
  return rep;
}

}  // namespace rangewalk
