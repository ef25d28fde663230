#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rangewalk/lattice.hpp"
#include "rangewalk/random.hpp"

namespace rangewalk {

// Strictly positive weight: explicit values on a window, `fallback` elsewhere.
class WeightField {
 public:
  WeightField(int d, double fallback);
  int dim() const { return d_; }
  void set(const Site& s, double v);
  double operator()(const Site& s) const;
  // neighbour average (1/2d) sum_e u(x+e)
  double neighbour_average(const Site& s) const;

 private:
  int d_;
  double fallback_;
  std::unordered_map<Site, double, SiteHash> values_;
};

// M_n = prod_{k<n} u(S_k)/V(S_k) * u(S_n), stored in log form
struct MartingaleTrace {
  std::vector<double> log_ratio;   // ln(u/V)(S_k), k < N
  std::vector<double> values;      // M_0..M_N
};

MartingaleTrace dv_martingale_weights(const WeightField& u, const WalkPath& walk);

// phi(0)/alpha exp(-E(phi)/2 + alpha sqrt(N |supp phi|)); requires sum phi^2 = N, phi(0) >= 1
double profile_probability_bound(const SiteField& phi, double alpha, long long N);

// Walk restricted to its visits to D. Rows run over the closure of D, columns over D.
struct HittingChain {
  Domain domain;
  Domain closure;
  int box_side = 0;
  Site box_center;
  std::vector<std::vector<double>> q;   // q[row][col] = P_y(S_{T_1} = z), truncated
  std::vector<double> defect;           // 1 - row sum
  std::vector<double> entry_error;      // q_true - q in [0, entry_error] per row

  double at(const Site& y, const Site& z) const;
  // sum_{y,z in D} q(y,z)(f(z) - f(y))^2, the same ordered-pair convention as E
  double dirichlet_form(const SiteField& f) const;
};

// Harmonic solve on a box of the given side, centred on D, with escape
// through the box boundary.
HittingChain induced_chain(const Domain& D, int box_side);

struct GdBound {
  double infimum = 0;    // best 1/2 E(sqrt h, D) found
  double bound = 1;      // exp(-t infimum)
  std::vector<double> argmin;  // h in domain order
  int starts = 0;
};

// C = {h in simplex(D) : ||h - g_sq/t||_1 <= radius}. The objective is convex
// in h, so the projected-gradient optimum is the global one up to tolerance.
GdBound gd_upper_bound(const Domain& D, const SiteField& g_sq, int t, double radius, std::uint64_t seed = 1);
// 1/2 E(sqrt h, D) for h given in domain order
double half_energy_of_sqrt(const Domain& D, const std::vector<double>& h);
// Euclidean projection onto C (Dykstra over simplex and l1 ball)
std::vector<double> project_feasible(const std::vector<double>& v, const std::vector<double>& center, double radius);

// Event ||L_t^D / t - target||_1 <= radius together with tau(D, t) < infinity.
struct OccupationEvent {
  Domain domain;
  std::vector<double> target;  // domain order
  double radius = 0;
  int t = 1;
  bool contains(const std::vector<int>& counts) const;
};

OccupationEvent make_event(const Domain& D, const SiteField& g_sq, int t, double radius);

struct McEstimate {
  double p = 0;
  double se = 0;
  long hits = 0;
  long trials = 0;
  long escaped = 0;   // left the margin box
  long capped = 0;    // hit the step cap
};

struct McOptions {
  int margin = 24;          // sup-norm margin of the kill box around D's bounding box
  long cap_factor = 1000;   // step cap = cap_factor * t
};

// Simulates the walk from `start` until t visits to D. Walks that leave the
// kill box or exceed the step cap count as tau = infinity.
McEstimate estimate_occupation(const OccupationEvent& ev, const Site& start, long trials, Rng& rng,
                               const McOptions& opt = {});

// Exact probability of the event under the (truncated) induced chain,
// started at a closure site. The truncation makes it an underestimate by at
// most `error`.
struct ChainProbability {
  double p = 0;
  double error = 0;
};
ChainProbability chain_event_probability(const HittingChain& chain, const OccupationEvent& ev, const Site& start);

// P_x(S_k = 0) + P_x(S_{k-1} = 0), exact
double return_probability(const Site& x, int d, long long k);
// exp(-c' n^{2d} / k)
double return_probability_bound(int d, long long n, long long k, double c_prime);
// the explicit single-multinomial-term floor exp(-(d/k)|x|^2 - 2d(ln k + 2))
double return_probability_floor(const Site& x, int d, long long k);

struct OriginCorrectionReport {
  double lhs = 0, lhs_se = 0;
  double rhs = 0, rhs_se = 0;      // 2 P_x(inflated event) / return probability at the worst x
  Site worst_x;
  double inflated_radius = 0;
  double return_prob = 0;
  bool pass = false;
};

OriginCorrectionReport origin_correction_check(const Domain& D, const SiteField& g_sq, int t, int k, double radius,
                                               long trials, std::uint64_t seed, const McOptions& opt = {});

struct AprioriTerms {
  double range_tail_log = 0;    // -(c - 2 k1) n^d
  double energy_tail_log = 0;   // -(kappa/2 - 4 d c) n^d ln n
  bool energy_vacuous = false;
  double k1 = 0;
};

// k1 defaults to chi_d when non-positive
AprioriTerms apriori_bound_terms(int d, long long n, double c, double kappa, double k1 = 0);

}  // namespace rangewalk
