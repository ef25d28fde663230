#include "rangewalk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rangewalk/errors.hpp"

namespace rangewalk {

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  require(order >= 1, "quadrature order must be positive");
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  auto legendre = [order](double x, double& p, double& dp) {
    double p0 = 1, p1 = x;
    for (int k = 2; k <= order; ++k) {
      double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = order * (x * p1 - p0) / (x * x - 1);
  };
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double p = 0, dp = 1;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = weights[order - 1 - i] = 2.0 / ((1 - x * x) * dp * dp);
  }
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order) {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  const double h = (b - a) / panels;
  double acc = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double part = 0;
    for (int i = 0; i < order; ++i) part += w[i] * f(mid + 0.5 * h * x[i]);
    acc += 0.5 * h * part;
  }
  return acc;
}

double golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * (1 + std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double bisect(const std::function<double(double)>& f, double a, double b, double tol) {
  double fa = f(a), fb = f(b);
  require(fa == 0 || fb == 0 || (fa < 0) != (fb < 0), "bisection needs a sign change");
  if (fa == 0) return a;
  if (fb == 0) return b;
  for (int it = 0; it < 400 && b - a > tol; ++it) {
    double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    double fm = f(m);
    if (fm == 0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, double initial_step, double tol, int max_evaluations) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += initial_step;
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    double spread = 0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(pts[i][k] - pts[best][k]));
    if (spread < tol) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / n;
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + t * (pts[worst][k] - centroid[k]);
      return x;
    };
    auto xr = along(-1.0);
    double fr = eval(xr);
    if (fr < vals[best]) {
      auto xe = along(-2.0);
      double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
    } else {
      auto xc = fr < vals[worst] ? along(-0.5) : along(0.5);
      double fc = eval(xc);
      if (fc < std::min(fr, vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          vals[i] = eval(pts[i]);
        }
      }
    }
  }
  std::size_t best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], evals};
}

MeanSe mean_and_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  double m = 0;
  for (double x : xs) m += x;
  m /= double(xs.size());
  double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  r.mean = m;
  r.se = xs.size() > 1 ? std::sqrt(v / double(xs.size() - 1) / double(xs.size())) : 0.0;
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double dmax = 0;
  const double na = double(a.size()), nb = double(b.size());
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    dmax = std::max(dmax, std::abs(double(i) / na - double(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * dmax;
  double p = 0;
  for (int k = 1; k <= 100; ++k) p += 2 * ((k % 2) ? 1 : -1) * std::exp(-2 * k * k * lam * lam);
  return {dmax, std::clamp(p, 0.0, 1.0)};
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs matching samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  require(sxx > 0, "slope fit needs distinct abscissae");
  return sxy / sxx;
}

}  // namespace rangewalk
