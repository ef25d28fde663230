#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "rangewalk/lattice.hpp"
#include "rangewalk/numerics.hpp"
#include "rangewalk/sampler.hpp"
#include "rangewalk/spectral.hpp"

namespace rangewalk {

using Point = std::array<double, kMaxDim>;

// ---------------------------------------------------------------- G_loc

// ||ell - phi_x^2||_1 with Gauss-Legendre (order^d points) on every cell of
// ell's support; the mass of phi_x^2 off the support is 1 - its integral on it.
double gloc_distance(const GridField& ell, const Point& center, const RadialEigenfunction& phi, int order = 3);

struct GlocResult {
  double distance = 0;
  double threshold = 0;  // n^{-s}
  bool pass = false;
};
GlocResult gloc_test(const GridField& ell, const Point& center, const RadialEigenfunction& phi, double s = 1.0 / 800);

struct GlocFit {
  Point center{};
  double distance = 0;
};
// Centre minimising the distance: weighted centroid, then Nelder-Mead.
GlocFit best_gloc_center(const GridField& ell, const RadialEigenfunction& phi);

// ---------------------------------------------------------------- filling

// fraction of sites y with |y - center| <= radius (lattice units) and L(y) > 0
double fill_fraction(const SiteField& L, const Point& center, double radius);
// ball of radius rho_d n (1 - n^{-kappa}) about n x
double fill_test(const WalkPath& walk, const Point& x, double kappa, const ScaleRelation& scale);

// least-squares slope of log mean|R_N| against log N, N = n^{d+2}
double range_exponent_fit(int d, const std::map<long, double>& mean_range);

// ---------------------------------------------------------------- mesoscopic balls

struct MesoBall {
  int d = 3;
  Site center;
  long n = 0;          // 0 when built directly from a radius
  double kappa = 0;
  int m = 0;
  Domain B;            // |y - z| <= m
  Domain core;         // |y - z| <= m/2

  long dist2(const Site& y) const;
  bool contains(const Site& y) const { return dist2(y) <= long(m) * m; }
  bool in_core(const Site& y) const { return 4 * dist2(y) <= long(m) * m; }
  double boundary_distance(const Site& y) const;  // m - |y - z|
};

// m = round(rho_d n^{1 - 2 kappa}), at least 4
MesoBall meso_ball(int d, const Site& z, long n, double kappa);
MesoBall ball_of_radius(int d, const Site& z, int m);

// C with phi(z)^2 ~ C dist(z, boundary)^2: the squared boundary slope of the profile
double radial_derivative_constant(int d);

struct CoreTime {
  double count = 0;      // L(B core)
  double delta = 0;      // C rho^{d+2} omega / 2^{3+d}
  double threshold = 0;  // delta m^d n^{2 - 2 kappa}
  bool pass = false;
};
CoreTime time_in_core(const SiteField& L, const MesoBall& ball, double C);
CoreTime time_in_core(const SiteField& L, const MesoBall& ball);

// ---------------------------------------------------------------- bridges

struct BridgeRecord {
  std::size_t t1 = 0, t2 = 0;
  Site a, b;
};

// Trials start at each visit to the core after the previous trial ended; a
// trial succeeds when the next m^2 steps stay in B and end in the core.
std::vector<BridgeRecord> detect_bridges(const WalkPath& walk, const MesoBall& ball);
bool valid_bridge(const WalkPath& walk, const MesoBall& ball, const BridgeRecord& r);

struct AnnuliReport {
  int levels = 0;                          // ceil(log2 m)
  std::vector<std::vector<Site>> groups;   // points per annulus
  int majority = 0;
  std::size_t count = 0;
};
// A_j = {dist to boundary in [2^j, 2^{j+1})}; A_0 also takes [0, 1) and the
// top annulus takes everything up to m, so there are exactly ceil(log2 m).
int annulus_index(const MesoBall& ball, const Site& y);
AnnuliReport dyadic_annuli(const MesoBall& ball, const std::vector<Site>& points);

// ---------------------------------------------------------------- walk estimates

// P_x(X[0, s] in B), plain Monte Carlo; s must lie in [m^2/2, 2 m^2]
MeanSe stay_probability(const MesoBall& ball, const Site& x, long s, long trials, std::uint64_t seed);
// P_a(X_t = b, X[0, t] in B)
MeanSe stay_and_hit_probability(const MesoBall& ball, const Site& a, const Site& b, long t, long trials,
                                std::uint64_t seed);

// Law at time t of the walk from `start` killed on leaving B, indexed like ball.B.
std::vector<double> killed_distribution(const MesoBall& ball, const Site& start, long t);
// P^{a->b; tau}(X_u = x) summed over u in {s, s+1} (only one has the right parity); exact
double bridge_heat_kernel(const MesoBall& ball, const Site& a, const Site& b, const Site& x, long tau, long s);

// Tilted kernel of the walk killed outside B.
TiltedKernel ball_kernel(const MesoBall& ball);
// Probability that a bridge of length m^2 visits `targets`. Bridges come from
// the tilted kernel started uniformly in the core, kept when they end in the core.
MeanSe bridge_hit_probability(const MesoBall& ball, const TiltedKernel& kernel, const std::vector<Site>& targets,
                              long trials, std::uint64_t seed);

// ---------------------------------------------------------------- per-sample summary

struct ShapeSample {
  long range = 0;
  GlocFit fit;
  bool gloc_pass = false;
  double fill = 0;   // fill fraction of the ball of radius fill_factor rho_d n about the fitted centre
};

ShapeSample analyse_walk(const WalkPath& walk, const ScaleRelation& scale, const RadialEigenfunction& phi,
                         double fill_factor = 0.8);

}  // namespace rangewalk
