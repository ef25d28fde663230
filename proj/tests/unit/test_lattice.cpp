#include <algorithm>
#include <numeric>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "rangewalk/lattice.hpp"
#include "rangewalk/random.hpp"

using namespace rangewalk;

namespace {

std::vector<std::uint8_t> random_steps(Rng& rng, int d, std::size_t N) {
  std::vector<std::uint8_t> s(N);
  for (auto& c : s) c = static_cast<std::uint8_t>(uniform_index(rng, 2 * d));
  return s;
}

// brute-force energy over every ordered neighbour pair in a bounding box
double brute_energy(const SiteField& f) {
  const int d = f.dim();
  auto supp = f.support();
  Site lo = supp.front(), hi = supp.front();
  for (const auto& s : supp)
    for (int i = 0; i < d; ++i) {
      lo.c[i] = std::min(lo.c[i], s.c[i] - 1);
      hi.c[i] = std::max(hi.c[i], s.c[i] + 1);
    }
  double acc = 0;
  Site y = lo;
  while (true) {
    for (int c = 0; c < 2 * d; ++c) {
      double diff = f(y) - f(moved(y, c));
      acc += diff * diff;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++y.c[i] <= hi.c[i]) break;
      y.c[i] = lo.c[i];
    }
    if (i == d) break;
  }
  return acc / (2.0 * d);
}

}  // namespace

TEST_CASE("build_walk examples") {
  auto w = build_walk(3, Site{}, {0, 1});
  CHECK(w.range_size() == 2);
  CHECK(w.position(2) == Site{});
  CHECK(build_walk(3, Site{}, {0, 0, 0}).range_size() == 4);
  CHECK(build_walk(3, Site{}, {}).range_size() == 1);
  CHECK_THROWS_AS(build_walk(3, Site{}, {6}), InvalidInput);
}

TEST_CASE("local time excludes the endpoint") {
  auto w = build_walk(3, Site{}, {0, 0, 0});
  auto L = local_time(w);
  CHECK(L(Site{}) == 1);
  CHECK(L(unit(0)) == 1);
  CHECK(L(make_site({2})) == 1);
  CHECK(L(make_site({3})) == 0);
  auto w2 = build_walk(3, Site{}, {0, 1});
  auto L2 = local_time(w2);
  CHECK(L2(Site{}) == 1);
  CHECK(L2(unit(0)) == 1);
  CHECK(w2.support_size() == 2);
  CHECK(w.support_size() == 3);
}

TEST_CASE("dirichlet energy examples") {
  for (int d = 1; d <= 4; ++d) {
    SiteField f(d);
    f.set(Site{}, 1.0);
    CHECK(dirichlet_energy(f) == doctest::Approx(2.0).epsilon(1e-14));
  }
  SiteField g(3);
  g.set(Site{}, 1.0);
  g.set(unit(0), 1.0);
  CHECK(dirichlet_energy(g) == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  Domain two(3, {Site{}, unit(0)});
  CHECK(dirichlet_energy(g, &two) == 0.0);
}

TEST_CASE("lp norms") {
  SiteField f(3);
  f.set(Site{}, 3.0);
  CHECK(lp_norm(f, 2) == doctest::Approx(3.0));
  SiteField ind(2);
  for (int k = 0; k < 7; ++k) ind.set(make_site({k, 2 * k}), 1.0);
  CHECK(lp_norm(ind, 2) == doctest::Approx(std::sqrt(7.0)));
  Rng rng(5);
  auto w = build_walk(3, Site{}, random_steps(rng, 3, 500));
  CHECK(lp_norm(local_time(w), 1) == doctest::Approx(500.0));
}

TEST_CASE("rescaled profile") {
  auto sc = ScaleRelation::from_n(2, 3);  // N = 81
  SiteField L(2);
  L.set(Site{}, double(sc.N));
  auto g = rescaled_profile(L, sc);
  CHECK(g.at(Site{}) == doctest::Approx(9.0));
  CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-15));

  // n^2 on every site of an n^d box gives the unit box indicator
  SiteField U(2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) U.set(make_site({i, j}), 9.0);
  auto gu = rescaled_profile(U, sc);
  for (const auto& kv : gu.values) CHECK(kv.second == doctest::Approx(1.0));

  SiteField bad(2);
  bad.set(Site{}, 5.0);
  CHECK_THROWS_AS(rescaled_profile(bad, sc), InvalidInput);
}

TEST_CASE("scale relation") {
  auto s = ScaleRelation::from_n(3, 6);
  CHECK(s.N == 7776);
  CHECK(ScaleRelation::from_N(3, 7776).n == 6);
  CHECK_THROWS_AS(ScaleRelation::from_N(3, 7777), InvalidInput);
}

TEST_CASE("range and support bookkeeping on random walks") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    int d = 1 + int(uniform_index(rng, 4));
    auto w = build_walk(d, Site{}, random_steps(rng, d, uniform_index(rng, 60)));
    CHECK(w.range_size() == w.recount_range());
    CHECK(w.range_size() >= 1);
    CHECK(w.range_size() <= w.length() + 1);
    auto L = local_time(w);
    CHECK(L.support_size() == w.support_size());
    long gap = long(w.range_size()) - long(L.support_size());
    CHECK((gap == 0 || gap == 1));
  }
}

TEST_CASE("incremental range matches recount after 1000 mutations") {
  Rng rng(2024);
  const int d = 3;
  auto w = build_walk(d, Site{}, random_steps(rng, d, 300));
  std::vector<std::uint8_t> flip(6);
  for (int it = 0; it < 1000; ++it) {
    std::size_t before = w.range_size();
    long delta = 0;
    if (it % 3 == 2) {
      std::iota(flip.begin(), flip.end(), 0);
      std::swap(flip[0], flip[2 * (1 + int(uniform_index(rng, 2)))]);
      std::swap(flip[1], flip[2 * (1 + int(uniform_index(rng, 2))) + 1]);
      delta = w.remap_suffix(uniform_index(rng, w.length()), flip);
    } else {
      std::size_t len = 1 + uniform_index(rng, 5);
      std::size_t first = uniform_index(rng, w.length() - len + 1);
      auto codes = random_steps(rng, d, len);
      delta = w.rewrite(first, codes);
    }
    REQUIRE(w.range_size() == w.recount_range());
    REQUIRE(long(w.range_size()) - long(before) == delta);
    for (std::size_t k = 0; k < w.length(); ++k) REQUIRE(moved(w.position(k), w.steps()[k]) == w.position(k + 1));
  }
}

TEST_CASE("energy is invariant under translations and coordinate permutations") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    SiteField f(3), shifted(3), permuted(3);
    Site t = make_site({int(uniform_index(rng, 9)) - 4, int(uniform_index(rng, 9)) - 4, 1});
    for (int k = 0; k < 12; ++k) {
      Site s = make_site({int(uniform_index(rng, 5)), int(uniform_index(rng, 5)), int(uniform_index(rng, 5))});
      double v = uniform01(rng) + 0.1;
      f.set(s, v);
    }
    for (const auto& [s, v] : f.values()) {
      shifted.set(s + t, v);
      permuted.set(make_site({s.c[2], s.c[0], s.c[1]}), v);
    }
    double e = dirichlet_energy(f);
    CHECK(e == doctest::Approx(brute_energy(f)).epsilon(1e-12));
    CHECK(dirichlet_energy(shifted) == doctest::Approx(e).epsilon(1e-12));
    CHECK(dirichlet_energy(permuted) == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("rescaled profile integrates to one for 1000 random walks") {
  Rng rng(77);
  auto sc = ScaleRelation::from_n(2, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    auto w = build_walk(2, Site{}, random_steps(rng, 2, std::size_t(sc.N)));
    auto g = rescaled_profile(local_time(w), sc);
    REQUIRE(std::abs(g.integral() - 1.0) < 1e-14);
  }
}

TEST_CASE("snapshot round trip is exact") {
  Rng rng(9);
  for (int d = 1; d <= 4; ++d) {
    Site start;
    for (int i = 0; i < d; ++i) start.c[i] = int(uniform_index(rng, 21)) - 10;
    auto w = build_walk(d, start, random_steps(rng, d, 200));
    std::stringstream ss;
    write_snapshot(ss, w);
    std::string text = ss.str();
    auto back = read_snapshot(ss);
    CHECK(back.steps() == w.steps());
    CHECK(back.start() == w.start());
    std::stringstream again;
    write_snapshot(again, back);
    CHECK(again.str() == text);
  }
  std::stringstream bad("3 2 0 0 0\n0 9\n");
  CHECK_THROWS_AS(read_snapshot(bad), InvalidInput);
}

TEST_CASE("domains") {
  auto box = centered_box(3, Site{}, 4);
  CHECK(box.size() == 64);
  CHECK(box.contains(make_site({2, 2, 2})));
  CHECK(!box.contains(make_site({-2, 0, 0})));
  auto odd = centered_box(2, Site{}, 3);
  CHECK(odd.contains(make_site({-1, -1})));
  CHECK(lattice_ball(3, Site{}, 1.0).size() == 7);
  CHECK(is_connected(lattice_ball(3, Site{}, 3.0)));
  CHECK(!is_connected(Domain(3, {Site{}, make_site({2})})));
  CHECK(closure(Domain(3, {Site{}})).size() == 7);
}

TEST_CASE("path enumeration visits every sequence once") {
  std::size_t count = 0;
  for_each_path(2, 3, [&](const std::vector<std::uint8_t>&) { ++count; });
  CHECK(count == 64);
  count = 0;
  for_each_path(3, 0, [&](const std::vector<std::uint8_t>& s) {
    CHECK(s.empty());
    ++count;
  });
  CHECK(count == 1);
}
