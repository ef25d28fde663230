#include <cmath>

#include "doctest.h"
#include "rangewalk/numerics.hpp"
#include "rangewalk/spectral.hpp"

using namespace rangewalk;

namespace {

// RK4 shooting for phi'' + (d-1)/r phi' + lambda phi = 0, phi(0)=1, phi'(0)=0;
// returns the first zero of phi in units where lambda = 1
double shooting_first_zero(int d) {
  double r = 1e-6, y = 1 - r * r / (2.0 * d), v = -r / d;
  const double h = 1e-4;
  auto acc = [d](double rr, double yy, double vv) { return -(d - 1) / rr * vv - yy; };
  while (true) {
    double k1y = v, k1v = acc(r, y, v);
    double k2y = v + 0.5 * h * k1v, k2v = acc(r + 0.5 * h, y + 0.5 * h * k1y, v + 0.5 * h * k1v);
    double k3y = v + 0.5 * h * k2v, k3v = acc(r + 0.5 * h, y + 0.5 * h * k2y, v + 0.5 * h * k2v);
    double k4y = v + h * k3v, k4v = acc(r + h, y + h * k3y, v + h * k3v);
    double ny = y + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    double nv = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    if (ny <= 0) return r + h * y / (y - ny);
    y = ny;
    v = nv;
    r += h;
  }
}

}  // namespace

TEST_CASE("Bessel zeros against the standard library and closed forms") {
  CHECK(bessel_first_zero(0.5) == doctest::Approx(M_PI).epsilon(1e-13));
  CHECK(std::abs(bessel_first_zero(0.0) - 2.404825557695773) < 1e-10);
  CHECK(std::abs(bessel_first_zero(1.0) - 3.831705970207512) < 1e-10);
  CHECK(std::abs(bessel_first_zero(-0.5) - M_PI / 2) < 1e-10);
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    double z = bessel_first_zero(nu);
    CHECK(std::abs(std::cyl_bessel_j(nu, z)) < 1e-11);
    for (double x : {0.3, 1.7, 4.2, 7.9}) CHECK(bessel_j(nu, x) == doctest::Approx(std::cyl_bessel_j(nu, x)).epsilon(1e-12));
  }
}

TEST_CASE("continuum constants, two routes") {
  auto s3 = continuum_constants(3);
  CHECK(s3.lambda == doctest::Approx(M_PI * M_PI).epsilon(1e-13));
  CHECK(s3.omega == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-14));
  CHECK(std::abs(s3.rho - 0.764884) < 1e-5);
  CHECK(std::abs(s3.chi - 4.68608) < 1e-5);
  auto s2 = continuum_constants(2);
  CHECK(std::abs(s2.lambda - 5.783186) < 1e-6);
  CHECK(std::abs(s2.rho - 0.823647) < 1e-5);
  CHECK(std::abs(s2.chi - 4.26244) < 1e-5);
  for (int d = 1; d <= 6; ++d) {
    auto s = continuum_constants(d);
    CHECK(std::abs(chi_closed_form(d) - s.chi) <= 1e-10 * s.chi);
    CHECK(std::abs(psi_minimizer_numeric(d) - s.rho) < 1e-6);
    double h = 1e-5;
    double dpsi = (psi(s.rho + h, d) - psi(s.rho - h, d)) / (2 * h);
    CHECK(std::abs(dpsi) < 1e-8);
    CHECK(psi(1e-3, d) > 10 * s.chi);
    CHECK(psi(1e3, d) > 10 * s.chi);
  }
  CHECK(psi(1.0, 3) == doctest::Approx(4.0 * M_PI / 3.0 + M_PI * M_PI / 6.0).epsilon(1e-13));
  CHECK(psi(1.0, 3) == doctest::Approx(5.83372).epsilon(1e-6));
  CHECK_THROWS_AS(psi(0.0, 3), InvalidInput);
}

TEST_CASE("Brownian normalisation is a rescaling of the same problem") {
  for (int d = 2; d <= 4; ++d) {
    auto s = continuum_constants(d);
    auto b = brownian_normalisation(d);
    // lambda/(2r^2) + omega r^d minimised at r^{d+2} = lambda/(d omega)
    CHECK(std::pow(b.rho, d + 2) == doctest::Approx(s.lambda / (d * s.omega)));
    CHECK(b.chi > 0);
  }
}

TEST_CASE("radial eigenfunction") {
  for (int d = 1; d <= 5; ++d) {
    auto phi = eigenfunction_profile(d, 4000);
    auto s = continuum_constants(d);
    CHECK(std::abs(phi.norm_squared() - 1.0) < 1e-8);
    CHECK(phi.gradient_energy() / (s.lambda / (s.rho * s.rho)) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(phi.boundary_slope() < 0);
    double fd = (phi.exact_value(s.rho) - phi.exact_value(s.rho - 1e-6)) / 1e-6;
    CHECK(fd < 0);
    double prev = phi.value(0.0);
    for (int i = 1; i <= 400; ++i) {
      double r = s.rho * i / 400.0;
      double v = phi.value(r);
      CHECK(v <= prev + 1e-14);
      CHECK(v >= 0);
      CHECK(std::abs(v - phi.exact_value(r)) < 1e-10);
      prev = v;
    }
    CHECK(phi.value(s.rho * 1.5) == 0.0);
    // independent ODE shooting: first zero of the radial solution with unit eigenvalue
    CHECK(shooting_first_zero(d) == doctest::Approx(std::sqrt(s.lambda)).epsilon(1e-5));
  }
  // the three-dimensional solution is A sin(pi r / rho) / r
  auto phi3 = eigenfunction_profile(3, 2000);
  const double rho = phi3.radius();
  const double A = 1.0 / std::sqrt(2 * M_PI * rho);
  for (double r : {0.05, 0.2, 0.5, 0.7}) CHECK(phi3.exact_value(r) == doctest::Approx(A * std::sin(M_PI * r / rho) / r).epsilon(1e-10));
}

TEST_CASE("lattice samplings of phi squared") {
  auto phi = eigenfunction_profile(3, 4000);
  std::array<double, kMaxDim> center{0.11, -0.07, 0.23};
  double prev = 1e9;
  for (long long n : {8, 16, 32}) {
    auto g = phi_squared_on_lattice(phi, center, ScaleRelation::from_n(3, n));
    CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-13));
    Site home;
    for (int i = 0; i < 3; ++i) home.c[i] = int(std::floor(center[i] * n));
    double mx = 0;
    for (const auto& kv : g.values) mx = std::max(mx, kv.second);
    CHECK(g.at(home) == mx);
    // L1 distance to phi^2 by 3-point Gauss per axis inside each cell
    const double h = 1.0 / n;
    std::vector<double> xs, ws;
    gauss_legendre(3, xs, ws);
    double dist = 0;
    int lo = int(std::floor((-1.0) / h)) - 1, hi = int(std::ceil(1.0 / h)) + 1;
    for (int a = lo; a <= hi; ++a)
      for (int b = lo; b <= hi; ++b)
        for (int c = lo; c <= hi; ++c) {
          double cell = g.at(make_site({a, b, c}));
          double acc = 0;
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              for (int k = 0; k < 3; ++k) {
                std::array<double, kMaxDim> x{(a + 0.5 + 0.5 * xs[i]) * h, (b + 0.5 + 0.5 * xs[j]) * h, (c + 0.5 + 0.5 * xs[k]) * h};
                double v = phi.at(x, center);
                acc += ws[i] * ws[j] * ws[k] / 8 * std::abs(cell - v * v);
              }
          dist += acc * h * h * h;
        }
    CHECK(dist < prev);
    CHECK(dist * n < 20.0);
    prev = dist;
  }
}

TEST_CASE("discrete principal eigenpairs") {
  auto single = discrete_principal_eigenpair(Domain(3, {Site{}}));
  CHECK(single.lambda1 == doctest::Approx(1.0).epsilon(1e-12));
  auto two = discrete_principal_eigenpair(Domain(3, {Site{}, unit(0)}));
  CHECK(two.lambda1 == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(two.vector[0] == doctest::Approx(two.vector[1]));
  CHECK_THROWS_AS(discrete_principal_eigenpair(Domain(3, {Site{}, make_site({3})})), InvalidInput);
  CHECK_THROWS_AS(discrete_principal_eigenpair(Domain()), InvalidInput);

  // cube of side m: lambda = 1 - cos(pi/(m+1))
  auto cube = discrete_principal_eigenpair(centered_box(3, Site{}, 6));
  CHECK(cube.lambda1 == doctest::Approx(1 - std::cos(M_PI / 7)).epsilon(1e-10));
  auto r = apply_minus_laplacian(cube.domain, cube.vector);
  double res = 0;
  for (std::size_t i = 0; i < r.size(); ++i) res += std::pow(r[i] - cube.lambda1 * cube.vector[i], 2);
  CHECK(std::sqrt(res) <= 1e-8);
  double l2 = discrete_second_eigenvalue(cube.domain, cube);
  // second level: one axis at 2pi/(m+1)
  double expect2 = 1 - (2 * std::cos(M_PI / 7) + std::cos(2 * M_PI / 7)) / 3;
  CHECK(l2 == doctest::Approx(expect2).epsilon(1e-8));
}

TEST_CASE("lattice ball eigenvalues approach the continuum scaling") {
  const double lam = continuum_constants(3).lambda;
  double prev_err = 1e9;
  for (double R : {10.0, 15.0, 20.0}) {
    auto ball = lattice_ball(3, Site{}, R);
    auto ep = discrete_principal_eigenpair(ball);
    CHECK(ep.lambda1 > 0);
    CHECK(ep.lambda1 <= 1);
    double ratio = 6 * R * R * ep.lambda1 / lam;
    CHECK(std::abs(ratio - 1) < 0.15);
    CHECK(std::abs(ratio - 1) < prev_err);
    prev_err = std::abs(ratio - 1);
    // permutation symmetry of the eigenvector
    for (std::size_t i = 0; i < ball.size(); i += 37) {
      const Site& s = ball[i];
      double v = ep.vector[i];
      double w = ep.at(make_site({s.c[1], s.c[2], s.c[0]}));
      CHECK(std::abs(v - w) <= 1e-6 * v);
    }
  }
}

TEST_CASE("modified eigenfunction") {
  auto phi = eigenfunction_profile(3, 4000);
  for (long long n : {6, 20, 100}) {
    auto sc = ScaleRelation::from_n(3, n);
    const double kappa = 0.3;
    auto mod = modified_eigenfunction(phi, sc, kappa);
    const double a = std::pow(double(n), -kappa);
    const double rho = phi.radius();
    CHECK(mod.value(0) == doctest::Approx(phi.value(0) + a).epsilon(1e-14));
    CHECK(mod.value(rho + 1) == doctest::Approx(a / 2).epsilon(1e-14));
    CHECK(mod.value(rho + 3) == doctest::Approx(a / 2).epsilon(1e-14));
    double h = 1e-4;
    CHECK(std::abs(mod.value(rho + 1) - mod.value(rho + 1 - h)) / h <= 1e-3 * a);
    CHECK(mod.shell_value(0) == doctest::Approx(a));
    // monotone on the shell, bounded curvature
    double prev = mod.value(rho);
    double worst = 0;
    const double dh = 1e-3;
    for (int i = 1; i < 1000; ++i) {
      double r = rho + i * dh;
      double v = mod.value(r);
      CHECK(v <= prev + 1e-15);
      prev = v;
      double second = (mod.value(r + dh) - 2 * v + mod.value(r - dh)) / (dh * dh);
      worst = std::max(worst, second);
    }
    double slope = std::abs(phi.boundary_slope());
    CHECK(worst <= 2 * slope * slope * std::pow(double(n), kappa) * 1.01);
    CHECK(worst <= mod.shell_curvature_bound() * 1.01 + 1e-9);
    // positivity on a box of side 4 rho
    double mn = 1e9;
    for (int x = -2 * int(rho * n); x <= 2 * int(rho * n); ++x)
      for (int y = -2 * int(rho * n); y <= 2 * int(rho * n); y += 3) mn = std::min(mn, mod.at_site(make_site({x, y, 0})));
    CHECK(mn >= a / 2 - 1e-15);
    CHECK(mn > 0);
  }
}
