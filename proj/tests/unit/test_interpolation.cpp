#include <cmath>

#include "doctest.h"
#include "rangewalk/interpolation.hpp"
#include "rangewalk/numerics.hpp"
#include "rangewalk/random.hpp"

using namespace rangewalk;

namespace {

SiteField random_field(Rng& rng, int d, int extent, int count) {
  SiteField f(d);
  for (int k = 0; k < count; ++k) {
    Site s;
    for (int i = 0; i < d; ++i) s.c[i] = int(uniform_index(rng, extent));
    f.set(s, uniform01(rng) * 3 + 0.01);
  }
  return f;
}

// two-point Gauss per axis is exact for F^2 and |grad F|^2 (degree <= 2 per axis)
IntegralIdentities quadrature_oracle(const CellwisePolynomial& F) {
  const int d = F.dim();
  const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  IntegralIdentities out;
  for (const Site& cell : F.cells()) {
    for (int k = 0; k < (1 << d); ++k) {
      std::array<double, kMaxDim> x{};
      for (int i = 0; i < d; ++i) x[i] = cell.c[i] + g[k >> i & 1];
      double w = std::pow(0.5, d);
      double v = F(x);
      out.integral += w * v;
      out.square += w * v * v;
      for (int i = 0; i < d; ++i) {
        // F is affine along axis i inside the cell
        auto corner_a = x, corner_b = x;
        corner_a[i] = cell.c[i] + 0.25;
        corner_b[i] = cell.c[i] + 0.75;
        double slope = (F(corner_b) - F(corner_a)) / 0.5;
        out.gradient += w * slope * slope;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("delta fields") {
  SiteField d1(1);
  d1.set(Site{}, 1.0);
  auto F = multilinear_interpolate(d1);
  auto I = integral_identities(F);
  CHECK(I.integral == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(I.square == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(I.gradient == 2.0);
  CHECK(I.gradient == 1 * dirichlet_energy(d1));
  CHECK(F({-0.5}) == doctest::Approx(0.5));
  CHECK(F({0.25}) == doctest::Approx(0.75));
  CHECK(F({1.0}) == 0.0);

  SiteField d2(2);
  d2.set(Site{}, 1.0);
  auto I2 = integral_identities(multilinear_interpolate(d2));
  CHECK(I2.integral == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(I2.square == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
  CHECK(I2.gradient == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(I2.gradient <= 2 * dirichlet_energy(d2));
}

TEST_CASE("interpolant agrees with the source at lattice points and is a tensor product") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(6), b(5);
    for (auto& v : a) v = uniform01(rng) + 0.1;
    for (auto& v : b) v = uniform01(rng) + 0.1;
    SiteField f(2);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 5; ++j) f.set(make_site({i, j}), a[i] * b[j]);
    auto F = multilinear_interpolate(f);
    auto lin = [](const std::vector<double>& v, double x) {
      int i = int(std::floor(x));
      double t = x - i;
      auto at = [&](int k) { return (k >= 0 && k < int(v.size())) ? v[k] : 0.0; };
      return (1 - t) * at(i) + t * at(i + 1);
    };
    for (int k = 0; k < 50; ++k) {
      double x = uniform01(rng) * 8 - 1, y = uniform01(rng) * 7 - 1;
      CHECK(std::abs(F({x, y}) - lin(a, x) * lin(b, y)) < 1e-12);
    }
    for (int i = 0; i < 6; ++i) CHECK(F({double(i), 2.0}) == doctest::Approx(f(make_site({i, 2}))).epsilon(1e-15));
  }
}

TEST_CASE("constant on a box is constant inside") {
  SiteField f(3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) f.set(make_site({i, j, k}), 2.5);
  auto F = multilinear_interpolate(f);
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    std::array<double, kMaxDim> x{uniform01(rng) * 3, uniform01(rng) * 3, uniform01(rng) * 3};
    CHECK(F(x) == doctest::Approx(2.5).epsilon(1e-14));
  }
}

TEST_CASE("integral identities on 1000 random fields") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    int d = 1 + int(trial % 3);
    auto f = random_field(rng, d, 6, 1 + int(uniform_index(rng, 12)));
    auto F = multilinear_interpolate(f);
    auto I = integral_identities(F);
    double sum = f.sum(), sq = 0;
    for (const auto& kv : f.values()) sq += kv.second * kv.second;
    REQUIRE(std::abs(I.integral - sum) <= 1e-12 * std::max(1.0, sum));
    REQUIRE(I.square <= sq * (1 + 1e-14));
    REQUIRE(I.gradient <= d * dirichlet_energy(f) * (1 + 1e-14));
    // support inflation
    REQUIRE(F.positive_volume() <= (std::pow(3.0, d) + 1) * f.support_size());
    if (trial % 50 == 0) {
      auto Q = quadrature_oracle(F);
      CHECK(I.integral == doctest::Approx(Q.integral).epsilon(1e-12));
      CHECK(I.square == doctest::Approx(Q.square).epsilon(1e-12));
      CHECK(I.gradient == doctest::Approx(Q.gradient).epsilon(1e-10));
    }
  }
}

TEST_CASE("rescale operator matches the rescaled profile") {
  auto sc = ScaleRelation::from_n(2, 3);
  Rng rng(8);
  std::vector<std::uint8_t> steps(sc.N);
  for (auto& c : steps) c = uint8_t(uniform_index(rng, 4));
  auto L = local_time(build_walk(2, Site{}, steps));
  auto a = rescaled_profile(L, sc);
  auto b = rescale_profile_operator(sqrt_field(L), sc);
  CHECK(a.values.size() == b.values.size());
  for (const auto& [s, v] : a.values) CHECK(std::abs(b.at(s) - v) <= 4e-16 * v);
  CHECK(rescale_profile_operator(SiteField(2), sc).values.empty());
  SiteField delta(2);
  delta.set(Site{}, std::sqrt(double(sc.N)));
  CHECK(rescale_profile_operator(delta, sc).at(Site{}) == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("box inequality ratios") {
  for (int n : {8, 16, 32}) {
    SiteField c(3), delta(3), lin(3);
    Domain box = centered_box(3, Site{}, n);
    for (const Site& y : box) {
      c.set(y, 1.7);
      lin.set(y, y.c[0] + n);  // positive shift of x_1
    }
    delta.set(Site{}, 1.0);
    CHECK(check_poincare_sobolev(c, Site{}, n) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(check_poincare_sobolev(delta, Site{}, n) == doctest::Approx(1.0 / (1.0 / n + 2 * std::sqrt(3.0))).epsilon(1e-12));
    CHECK(check_poincare_wirtinger(c, Site{}, n) == 0.0);
    double w = check_poincare_wirtinger(lin, Site{}, n);
    CHECK(w == doctest::Approx(std::sqrt((n + 1.0) / (24.0 * n))).epsilon(1e-10));
    CHECK(std::abs(w / check_poincare_wirtinger(lin, Site{}, 8) - 1) < 0.05);
  }
  CHECK(check_poincare_sobolev(SiteField(3), Site{}, 8) == 0.0);
}

TEST_CASE("empirical box constants are uniform in n") {
  Rng rng(123);
  double worst_ps = 0, worst_pw = 0;
  for (int n : {8, 16, 32}) {
    double ps = 0, pw = 0;
    Domain box = centered_box(3, Site{}, n);
    for (int t = 0; t < 100; ++t) {
      SiteField f(3);
      int kind = t % 3;
      const double k1 = 1 + uniform_index(rng, 3), k2 = uniform_index(rng, 3);
      for (const Site& y : box) {
        double v;
        if (kind == 0) v = uniform01(rng);
        else if (kind == 1) v = 1.5 + std::sin(k1 * M_PI * y.c[0] / n) * std::cos(k2 * M_PI * y.c[1] / n);
        else v = std::exp(-double(l1_norm(y)) / (1 + uniform_index(rng, n)));
        f.set(y, v);
      }
      ps = std::max(ps, check_poincare_sobolev(f, Site{}, n));
      pw = std::max(pw, check_poincare_wirtinger(f, Site{}, n));
    }
    MESSAGE("n=" << n << " max PS ratio " << ps << " max PW ratio " << pw);
    worst_ps = std::max(worst_ps, ps);
    worst_pw = std::max(worst_pw, pw);
  }
  CHECK(worst_ps <= 1.0);
  CHECK(worst_pw <= 1.0 / (2 * std::sqrt(2.0)));
}

TEST_CASE("whole-space Sobolev ratio over 1000 random fields") {
  Rng rng(5);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    SiteField f(3);
    int w = 1 + int(uniform_index(rng, 6));
    for (int i = -w; i <= w; ++i)
      for (int j = -w; j <= w; ++j)
        for (int k = -w; k <= w; ++k) {
          double r = std::sqrt(double(i * i + j * j + k * k));
          double v = std::max(0.0, 1 - r / (w + 0.5)) * (0.5 + uniform01(rng));
          if (v > 0) f.set(make_site({i, j, k}), v);
        }
    worst = std::max(worst, sobolev_ratio(f));
  }
  MESSAGE("max Sobolev ratio " << worst);
  CHECK(worst > 0.1);
  CHECK(worst < 0.5);
}
