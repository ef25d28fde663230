#pragma once

#include <vector>

#include "rangewalk/lattice.hpp"

namespace rangewalk {

// Ratio bounds of the discrete functional inequalities, in the normalisation
// of check_poincare_wirtinger / check_poincare_sobolev / sobolev_ratio.
struct FunctionalConstants {
  double c_pw = 0;    // box Wirtinger: certified, 1/(2 sqrt 2) from 1 - cos x >= 2x^2/pi^2
  double c_ups = 0;   // box Poincare-Sobolev: empirical
  double c_ps = 0;    // whole-space Sobolev: empirical
  // c in ||f - fbar||_2 <= M c sqrt(E(f)); sqrt(2d) c_pw
  double averaging(int d) const;
  // c_d of the low-density-block estimate, 4 d c_ups^2
  double low_density(int d) const;
  static FunctionalConstants defaults(int d);
};

// B(x) = n x + Lambda(n), Lambda(n) = {-n/2 < y_i <= n/2}; sites n x + o + {0..n-1}^d
int block_offset(int n);
Site block_of(const Site& y, int n);
std::vector<Site> block_sites(const Site& block, int d, int n);

// X(f, delta) = {x : sum_{B(x)} f^{2*} >= delta^{2*} n^{d+2*}}, sorted
std::vector<Site> high_density_blocks(const SiteField& f, int n, double delta);

struct BlockDecomposition {
  int d = 3;
  int n = 1;
  int M = 1;
  std::vector<Site> X;
  std::vector<Site> Xhat;        // X plus sup-norm neighbours
  std::vector<Site> sub_blocks;  // M-blocks inside the blocks of Xhat
  Domain D;                      // union of blocks over Xhat
  Domain E;                      // union of blocks over X
};

BlockDecomposition enlarge_and_domains(const std::vector<Site>& X, int d, int n, int M = 1);

// Mean over the M-blocks anchor + M y + {0..M-1}^d. The default anchor is the
// corner of Lambda(M); the pipeline passes block_offset(n) so M-blocks tile the n-blocks.
SiteField local_average(const SiteField& f, int M, int anchor);
SiteField local_average(const SiteField& f, int M);

struct CoarseProfile {
  int M = 1;
  double eta = 0;
  SiteField values;   // eta * floor(fbar / eta) on D
};

CoarseProfile discretize(const SiteField& fbar, double eta, const Domain& D, int M = 1);

struct Exponents {
  double alpha = 0, beta = 0, gamma = 0, rho = 0;
  static Exponents defaults(int d);
};

struct GammaBudget {
  int d = 3;
  long long n = 0;
  double N = 0;
  double c = 1, kappa = 1;
  Exponents exps;
  double delta = 0, eta = 0, lambda = 0;
  double M_raw = 0;   // n^beta
  int M = 1;          // largest divisor of n not above n^beta
  double gamma0 = 0, gamma1 = 0, gamma2 = 0, gamma3 = 0, gamma4 = 0, r = 0;
  std::vector<bool> constraints;  // the six exponent constraints, in order
  bool constraints_ok = false;
  std::vector<bool> size_checks;  // G0 < sqrt N, G1 < 3 G0 sqrt N, n^{d+1} < G1, G1 < n^{d+2}, G2 < N/2
  bool sizes_ok = false;
  double card_x_bound = 0;        // delta^{-2*} c_ps^{2*} (2 d kappa ln n)^{2*/2}
  double c0 = 0;                  // delta^{-2*} kappa^4 (ln n)^5
};

GammaBudget gamma_budget(long long n, int d, double c, double kappa, const Exponents& exps,
                         const FunctionalConstants& k);
GammaBudget gamma_budget(long long n, int d, double c, double kappa);
int largest_divisor_at_most(long long n, double bound);
// smallest n in [2, n_max] with every size check true, or -1
long long size_threshold(int d, double c, double kappa, const Exponents& exps, const FunctionalConstants& k,
                         long long n_max);

// phi(u) = clamp(4 (7/8 - |u|_inf), 0, 1): 1 on Lambda(5/4), 0 off Lambda(7/4), slope 4
double cutoff_profile(const std::array<double, kMaxDim>& u, int d);
SiteField cutoff_function(const BlockDecomposition& dec);

struct TruncationCheck {
  double lhs = 0;   // E(f, D)
  double rhs = 0;   // max(sqrt E(phi_X f) - (4/n)||f||_{2,D\E}, 0)^2
  bool pass = false;
};

TruncationCheck truncated_energy_check(const SiteField& f, const BlockDecomposition& dec);

// |{h > 0}| + (N/2)(1 - n^{-1/4}) max(sqrt E(sqrt h) - n^{-9/8}, 0)^2
double upper_bound_functional(const SiteField& h, double N, long long n);

struct PipelineReport {
  BlockDecomposition dec;
  CoarseProfile coarse;
  double energy = 0;          // E(f_N)
  bool energy_event = false;  // E(f_N) <= kappa n^d ln n
  double dist_f = 0;          // ||f_N - coarse||_{2,D}
  double dist_L = 0;          // ||L_N - coarse^2||_{1,D}
  GammaBudget budget;
  bool within_gamma0 = false;
  bool within_gamma1 = false;
};

PipelineReport run_pipeline(const SiteField& local_time, const GammaBudget& budget);

}  // namespace rangewalk
