#pragma once

#include <cmath>
#include <array>
#include <cstddef>
#include <vector>

#include "rangewalk/lattice.hpp"

namespace rangewalk {

// J_nu(x) by its power series (long double accumulation); nu > -1, x >= 0.
double bessel_j(double nu, double x);
// First positive zero of J_order, order > -1.
double bessel_first_zero(double order);

// Constants of the ball problem: lambda is the first Dirichlet eigenvalue of
// -Laplacian on the unit ball, omega the unit-ball volume, rho and chi the
// minimiser and minimum of psi(r) = omega r^d + lambda / (2 d r^2).
struct BallSpectrum {
  int d = 3;
  double lambda = 0;
  double omega = 0;
  double rho = 0;
  double chi = 0;
};

BallSpectrum continuum_constants(int d);
double psi(double r, int d);
double chi_closed_form(int d);
// Minimiser of psi found numerically (golden section on [1e-2, 1e2]).
double psi_minimizer_numeric(int d);

// Same problem in the Brownian normalisation lambda/(2 r^2) + omega r^d.
struct BrownianConstants {
  double rho = 0;
  double chi = 0;
};
BrownianConstants brownian_normalisation(int d);

// L2-normalised principal Dirichlet eigenfunction of -Laplacian on B(0, rho_d),
// phi(r) = A (k r)^{-nu} J_nu(k r), nu = d/2 - 1, k = j_nu / rho_d.
class RadialEigenfunction {
 public:
  RadialEigenfunction() = default;
  RadialEigenfunction(int d, std::size_t resolution);

  int dim() const { return d_; }
  double radius() const { return rho_; }
  double amplitude() const { return amp_; }
  double wavenumber() const { return k_; }
  std::size_t resolution() const { return samples_.size() - 1; }
  const std::vector<double>& samples() const { return samples_; }

  // series evaluation
  double exact_value(double r) const;
  double exact_derivative(double r) const;
  // cubic Hermite interpolation of the stored samples (fast path)
  double value(double r) const;
  double derivative(double r) const;
  double boundary_slope() const { return exact_derivative(rho_); }

  template <class Point>
  double at(const Point& x, const Point& center) const {
    double acc = 0;
    for (int i = 0; i < d_; ++i) acc += (x[i] - center[i]) * (x[i] - center[i]);
    return value(std::sqrt(acc));
  }

  double norm_squared() const { return norm2_; }  // integral of phi^2 over the ball, cached
  double gradient_energy() const;    // integral of |grad phi|^2
  double shell_area() const;         // d * omega_d

 private:
  double profile(double x) const;          // x^{-nu} J_nu(x)
  double profile_derivative(double x) const;
  double integrate_norm_squared() const;

  int d_ = 0;
  double nu_ = 0, rho_ = 0, k_ = 0, amp_ = 1, omega_ = 0, dr_ = 0, norm2_ = 1;
  std::vector<double> samples_, slopes_;
};

RadialEigenfunction eigenfunction_profile(int d, std::size_t resolution = 4096);

// (phi_center)^2 sampled at cell centres of the 1/n grid, renormalised to unit mass.
GridField phi_squared_on_lattice(const RadialEigenfunction& phi, const std::array<double, kMaxDim>& center,
                                 const ScaleRelation& scale);

struct DiscreteEigenpair {
  Domain domain;
  double lambda1 = 0;
  std::vector<double> vector;  // unit l2 norm, positive
  int iterations = 0;
  double residual = 0;

  double at(const Site& s) const {
    long i = domain.index_of(s);
    return i < 0 ? 0.0 : vector[static_cast<std::size_t>(i)];
  }
};

// Principal eigenpair of -Delta_1 = I - P with Dirichlet exterior, by inverse
// iteration from the all-ones vector.
DiscreteEigenpair discrete_principal_eigenpair(const Domain& domain);
// Second eigenvalue by deflated inverse iteration.
double discrete_second_eigenvalue(const Domain& domain, const DiscreteEigenpair& first);
// y -> (I - P_D) v, Dirichlet exterior
std::vector<double> apply_minus_laplacian(const Domain& domain, const std::vector<double>& v);

// phi + n^{-kappa} on the ball, a convex decreasing radial shell on
// [rho, rho+1] down to n^{-kappa}/2 with zero slope at rho+1, constant beyond.
class ModifiedEigenfunction {
 public:
  ModifiedEigenfunction(RadialEigenfunction phi, const ScaleRelation& scale, double kappa);

  double floor_level() const { return lift_; }  // n^{-kappa}
  double value(double r) const;
  double shell_value(double s) const;  // s = r - rho in [0, 1]
  double shell_curvature_bound() const;
  bool power_shell() const { return power_ >= 1; }
  // lattice sample phi~(y/n)
  double at_site(const Site& y) const;
  const RadialEigenfunction& base() const { return phi_; }
  long long scale() const { return n_; }

 private:
  RadialEigenfunction phi_;
  long long n_;
  int d_;
  double lift_, slope_, power_;
};

ModifiedEigenfunction modified_eigenfunction(const RadialEigenfunction& phi, const ScaleRelation& scale, double kappa);

}  // namespace rangewalk
