#include <cmath>

#include "doctest.h"
#include "rangewalk/random.hpp"
#include "rangewalk/variational.hpp"

using namespace rangewalk;

namespace {

// midpoint rule with q points per axis in every cell, no shortcuts
double brute_overlap(const VoxelDomain& G, const Point& c, double r, int q) {
  const int d = G.d;
  const double h = G.spacing;
  double acc = 0;
  int total = 1;
  for (int i = 0; i < d; ++i) total *= q;
  for (const Site& y : G.cells) {
    for (int k = 0; k < total; ++k) {
      int rest = k;
      double r2 = 0;
      for (int i = 0; i < d; ++i) {
        double x = (y.c[i] + ((rest % q) + 0.5) / q) * h - c[i];
        rest /= q;
        r2 += x * x;
      }
      if (r2 < r * r) acc += 1;
    }
  }
  return acc / total * std::pow(h, d);
}

VoxelDomain translate(const VoxelDomain& G, const Site& t) {
  std::vector<Site> cells;
  for (const Site& y : G.cells) cells.push_back(y + t);
  return VoxelDomain(G.spacing, Domain(G.d, cells));
}

VoxelDomain permute(const VoxelDomain& G) {
  std::vector<Site> cells;
  for (const Site& y : G.cells) cells.push_back(make_site({y.c[2], y.c[0], y.c[1]}));
  return VoxelDomain(G.spacing, Domain(G.d, cells));
}

VoxelDomain perturbed_ball(Rng& rng, int d, double radius, double h) {
  auto G = voxel_ball(d, Point{}, radius, h);
  std::vector<Site> cells(G.cells.begin(), G.cells.end());
  for (int k = 0; k < 12; ++k) {
    // attach a small box on the surface
    const Site& base = G.cells[uniform_index(rng, G.cells.size())];
    int a = 1 + int(uniform_index(rng, 3));
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < a; ++j)
        for (int l = 0; l < a; ++l) cells.push_back(base + make_site({i, j, l}));
  }
  return VoxelDomain(h, Domain(d, cells));
}

}  // namespace

TEST_CASE("overlap against brute force") {
  auto G = voxel_ball(3, Point{0.1, 0.0, -0.2}, 1.0, 0.25);
  for (double r : {0.4, 0.9, 1.3}) {
    Point c{0.3, -0.1, 0.05};
    CHECK(ball_overlap(G, c, r) == doctest::Approx(brute_overlap(G, c, r, 40)).epsilon(2e-3));
  }
  auto line = voxel_ball(1, Point{}, 2.0, 0.5);
  CHECK(ball_overlap(line, Point{0.1}, 0.7) == doctest::Approx(1.4).epsilon(1e-14));
}

TEST_CASE("asymmetry of voxel balls and bounds") {
  for (double h : {0.25, 0.125}) {
    auto G = voxel_ball(3, Point{0.03, 0.0, 0.0}, 1.0, h);
    auto A = fraenkel_asymmetry(G);
    CHECK(A.value >= 0);
    CHECK(A.value <= A.discretisation);
    CHECK(std::abs(A.center[0] - 0.03) < h);
  }
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    std::vector<Site> cells;
    for (int k = 0; k < 40; ++k) cells.push_back(make_site({int(uniform_index(rng, 8)), int(uniform_index(rng, 8)), int(uniform_index(rng, 8))}));
    auto A = fraenkel_asymmetry(VoxelDomain(1.0, Domain(3, cells)));
    CHECK(A.value >= 0);
    CHECK(A.value <= 2);
  }
}

TEST_CASE("asymmetry of two distant balls matches an exhaustive finer search") {
  const double h = 1.0, r = 4.0;
  auto b1 = voxel_ball(2, Point{0.0, 0.0}, r, h);
  auto b2 = voxel_ball(2, Point{40.0, 0.0}, r, h);
  std::vector<Site> cells(b1.cells.begin(), b1.cells.end());
  cells.insert(cells.end(), b2.cells.begin(), b2.cells.end());
  VoxelDomain G(h, Domain(2, cells));
  auto A = fraenkel_asymmetry(G);
  const double R = std::sqrt(G.volume() / M_PI);
  double best = 2;
  for (double cx0 : {0.0, 40.0})
    for (int i = -30; i <= 30; ++i)
      for (int j = -30; j <= 30; ++j) {
        Point c{cx0 + i * h / 3, j * h / 3};
        best = std::min(best, 2 * (1 - brute_overlap(G, c, R, 16) / G.volume()));
      }
  CHECK(std::abs(A.value - best) < 1e-3);
  CHECK(A.value == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("asymmetry is invariant under translation and coordinate permutation") {
  Rng rng(17);
  auto G = perturbed_ball(rng, 3, 1.0, 0.2);
  auto a = fraenkel_asymmetry(G);
  auto b = fraenkel_asymmetry(translate(G, make_site({7, -3, 11})));
  auto c = fraenkel_asymmetry(permute(G));
  CHECK(a.value == b.value);
  CHECK(b.center[0] == doctest::Approx(a.center[0] + 7 * 0.2).epsilon(1e-12));
  CHECK(c.value == doctest::Approx(a.value).epsilon(1e-9));
}

TEST_CASE("Faber-Krahn deficit") {
  SUBCASE("unit cube") {
    std::vector<Site> cells;
    const int m = 20;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) cells.push_back(make_site({i, j, k}));
    auto fk = fk_deficit(VoxelDomain(1.0 / m, Domain(3, cells)));
    const double ball = std::pow(4 * M_PI / 3, 2.0 / 3) * M_PI * M_PI;
    CHECK(fk.ball_value == doctest::Approx(ball).epsilon(1e-12));
    CHECK(fk.ball_value == doctest::Approx(25.646).epsilon(1e-4));
    const double expected = 3 * M_PI * M_PI - ball;
    CHECK(std::abs(fk.deficit - expected) < 0.05 * expected);
  }
  SUBCASE("ball and perturbations") {
    auto B = voxel_ball(3, Point{}, 1.0, 1.0 / 7);
    auto fk = fk_deficit(B);
    CHECK(std::abs(fk.deficit) <= fk.error);
    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
      auto G = perturbed_ball(rng, 3, 1.0, 1.0 / 6);
      auto p = fk_deficit(G);
      CHECK(p.deficit >= -p.error);
    }
  }
  SUBCASE("scale invariance") {
    Rng rng(2);
    auto G = perturbed_ball(rng, 3, 1.0, 1.0 / 5);
    auto a = fk_deficit(G);
    auto b = fk_deficit(G.refined());
    CHECK(std::abs(a.deficit - b.deficit) < a.error);
  }
  std::vector<Site> split{Site{}, make_site({3, 0, 0})};
  CHECK_THROWS_AS(fk_deficit(VoxelDomain(1.0, Domain(3, split))), InvalidInput);
}

TEST_CASE("shape functional") {
  auto phi = eigenfunction_profile(3);
  const double chi = continuum_constants(3).chi;
  double prev = 1;
  for (int m : {16, 32, 64}) {
    GridField g;
    g.d = 3;
    g.spacing = 1.0 / m;
    int R = int(std::ceil(phi.radius() * m)) + 1;
    for (int i = -R; i < R; ++i)
      for (int j = -R; j < R; ++j)
        for (int k = -R; k < R; ++k) {
          Site s = make_site({i, j, k});
          double v = phi.at(g.cell_center(s), Point{});
          if (v > 0) g.values.emplace(s, v);
        }
    double err = std::abs(shape_functional(g) / chi - 1);
    CHECK(err < prev);
    prev = err;
    if (m == 64) CHECK(err < 0.01);
    GridField shifted = g;
    shifted.values.clear();
    for (const auto& [s, v] : g.values) shifted.values.emplace(s + make_site({5, -2, 9}), v);
    CHECK(std::abs(shape_functional(shifted) - shape_functional(g)) < 1e-8);
  }
  GridField zero;
  CHECK(shape_functional(zero) == 0.0);
}

TEST_CASE("distance to the eigenfunction") {
  auto phi = eigenfunction_profile(3);
  const double h = 1.0 / 20;
  auto sample = [&](const Point& x, double scale) {
    GridField g;
    g.d = 3;
    g.spacing = h;
    for (int i = -30; i < 30; ++i)
      for (int j = -30; j < 30; ++j)
        for (int k = -30; k < 30; ++k) {
          Site s = make_site({i, j, k});
          double v = phi.at(g.cell_center(s), x);
          if (v > 0) g.values.emplace(s, scale * v);
        }
    return g;
  };
  auto g0 = sample(Point{}, 1.0);
  auto r0 = l2_distance_to_eigenfunction(g0, phi);
  CHECK(r0.epsilon < 1e-3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r0.center[i]) < 1e-3);

  auto gx = sample(Point{0.3, 0, 0}, 1.0);
  auto rx = l2_distance_to_eigenfunction(gx, phi);
  CHECK(rx.epsilon < 1e-3);
  CHECK(std::abs(rx.center[0] - 0.3) < 1e-3);

  auto g11 = sample(Point{}, 1.1);
  auto r11 = l2_distance_to_eigenfunction(g11, phi);
  double norm = 0;
  for (const auto& kv : g0.values) norm += kv.second * kv.second;
  norm = std::sqrt(norm * h * h * h);
  CHECK(r11.epsilon == doctest::Approx(0.1 * norm).epsilon(1e-6));
  CHECK(r11.epsilon == doctest::Approx(0.1).epsilon(0.02));
  // grid-search oracle over centres
  double grid_best = 1e9;
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b)
      for (int c = -4; c <= 4; ++c)
        grid_best = std::min(grid_best, l2_distance_at(g11, phi, Point{a * h / 8, b * h / 8, c * h / 8}));
  CHECK(r11.epsilon <= grid_best + 1e-12);
}

TEST_CASE("normalised interpolants away from the eigenfunction stay above chi") {
  auto phi = eigenfunction_profile(3);
  const double chi = continuum_constants(3).chi;
  Rng rng(314);
  const double h = 1.0 / 10;
  int tested = 0;
  for (int t = 0; tested < 50 && t < 500; ++t) {
    double ax = 0.6 + uniform01(rng), ay = 0.6 + uniform01(rng), az = 0.6 + uniform01(rng);
    double noise = 0.3 * uniform01(rng);
    SiteField f(3);
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j)
        for (int k = -20; k <= 20; ++k) {
          double r = std::sqrt(std::pow(i * h * ax, 2) + std::pow(j * h * ay, 2) + std::pow(k * h * az, 2));
          double v = phi.value(r);
          if (v > 0) f.set(make_site({i, j, k}), v * (1 + noise * (uniform01(rng) - 0.5)));
        }
    auto F = multilinear_interpolate(f);
    double norm = std::sqrt(integral_identities(F).square * h * h * h);
    SiteField fn = f.map([norm](double v) { return v / norm; });
    GridField g;
    g.d = 3;
    g.spacing = h;
    for (const auto& [s, v] : fn.values()) g.values.emplace(s, v);
    auto eps = l2_distance_to_eigenfunction(g, phi);
    if (eps.epsilon < 0.05) continue;
    ++tested;
    CHECK(shape_functional(multilinear_interpolate(fn), h) > chi);
  }
  CHECK(tested == 50);
}
