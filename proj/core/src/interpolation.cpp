#include "rangewalk/interpolation.hpp"

#include <algorithm>
#include <cmath>

namespace rangewalk {

CellwisePolynomial::CellwisePolynomial(SiteField f) : f_(std::move(f)) {
  const int d = f_.dim();
  check_dim(d);
  std::vector<Site> cells;
  cells.reserve(f_.support_size() << d);
  for (const Site& s : f_.support()) {
    for (int e = 0; e < (1 << d); ++e) {
      Site y = s;
      for (int i = 0; i < d; ++i)
        if (e >> i & 1) --y.c[i];
      cells.push_back(y);
    }
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  cells_ = std::move(cells);
}

std::array<double, 1 << kMaxDim> CellwisePolynomial::corners(const Site& cell) const {
  std::array<double, 1 << kMaxDim> out{};
  const int d = dim();
  for (int e = 0; e < (1 << d); ++e) {
    Site y = cell;
    for (int i = 0; i < d; ++i) y.c[i] += e >> i & 1;
    out[e] = f_(y);
  }
  return out;
}

double CellwisePolynomial::operator()(const std::array<double, kMaxDim>& x) const {
  const int d = dim();
  Site cell;
  std::array<double, kMaxDim> u{};
  for (int i = 0; i < d; ++i) {
    double fl = std::floor(x[i]);
    cell.c[i] = static_cast<int>(fl);
    u[i] = x[i] - fl;
  }
  auto c = corners(cell);
  double acc = 0;
  for (int e = 0; e < (1 << d); ++e) {
    double w = c[e];
    if (w == 0) continue;
    for (int i = 0; i < d; ++i) w *= (e >> i & 1) ? u[i] : 1 - u[i];
    acc += w;
  }
  return acc;
}

CellwisePolynomial multilinear_interpolate(const SiteField& f) { return CellwisePolynomial(f); }

IntegralIdentities integral_identities(const CellwisePolynomial& F) {
  const int d = F.dim();
  const int K = 1 << d;
  // mass[e ^ e'] = prod_i (1/3 or 1/6); grad[e ^ e'] = sum_i (+-1) prod_{j != i}
  std::vector<double> mass(K), grad(K);
  for (int x = 0; x < K; ++x) {
    double m = 1;
    for (int i = 0; i < d; ++i) m *= (x >> i & 1) ? 1.0 / 6.0 : 1.0 / 3.0;
    mass[x] = m;
    double g = 0;
    for (int i = 0; i < d; ++i) {
      double t = (x >> i & 1) ? -1.0 : 1.0;
      for (int j = 0; j < d; ++j)
        if (j != i) t *= (x >> j & 1) ? 1.0 / 6.0 : 1.0 / 3.0;
      g += t;
    }
    grad[x] = g;
  }
  IntegralIdentities out;
  for (const Site& cell : F.cells()) {
    auto c = F.corners(cell);
    for (int e = 0; e < K; ++e) {
      if (c[e] == 0) continue;
      out.integral += c[e] / K;
      for (int e2 = 0; e2 < K; ++e2) {
        double p = c[e] * c[e2];
        out.square += p * mass[e ^ e2];
        out.gradient += p * grad[e ^ e2];
      }
    }
  }
  return out;
}

GridField rescale_profile_operator(const SiteField& f, const ScaleRelation& scale) {
  require(f.dim() == scale.d, "dimension mismatch between field and scale");
  GridField g;
  g.d = scale.d;
  g.spacing = 1.0 / double(scale.n);
  const double factor = std::pow(double(scale.n), scale.d) / double(scale.N);
  for (const auto& [s, v] : f.values()) g.values.emplace(s, v * v * factor);
  return g;
}

namespace {

struct BoxNorms {
  double l2 = 0, lcrit = 0, energy = 0, mean = 0;
};

BoxNorms box_norms(const SiteField& f, const Site& center, int n, double p) {
  require(n >= 1, "box side must be positive");
  Domain box = centered_box(f.dim(), center, n);
  BoxNorms out;
  out.l2 = lp_norm(f, 2, &box);
  if (p > 0) out.lcrit = lp_norm(f, p, &box);
  out.energy = dirichlet_energy(f, &box);
  double s = 0;
  for (const Site& y : f.support())
    if (box.contains(y)) s += f(y);
  out.mean = s / double(box.size());
  return out;
}

}  // namespace

double check_poincare_sobolev(const SiteField& f, const Site& center, int n) {
  const int d = f.dim();
  auto b = box_norms(f, center, n, critical_exponent(d));
  if (b.l2 == 0) return 0;
  return b.lcrit / (b.l2 / n + std::sqrt(2.0 * d * b.energy));
}

double check_poincare_wirtinger(const SiteField& f, const Site& center, int n) {
  const int d = f.dim();
  auto b = box_norms(f, center, n, 0);
  Domain box = centered_box(d, center, n);
  double var = 0, sq = 0;
  for (const Site& y : box) {
    var += (f(y) - b.mean) * (f(y) - b.mean);
    sq += f(y) * f(y);
  }
  if (var <= 1e-24 * sq) return 0;
  if (b.energy <= 0) throw InvalidInput("nonconstant field with zero energy on a connected box");
  return std::sqrt(var) / (n * std::sqrt(2.0 * d * b.energy));
}

double sobolev_ratio(const SiteField& f) {
  const int d = f.dim();
  if (f.empty()) return 0;
  return lp_norm(f, critical_exponent(d)) / std::sqrt(2.0 * d * dirichlet_energy(f));
}

}  // namespace rangewalk
