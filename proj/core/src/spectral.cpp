#include "rangewalk/spectral.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rangewalk/numerics.hpp"

namespace rangewalk {

namespace {

// 2^{-nu} sum_k (-x^2/4)^k / (k! Gamma(k+nu+1)) = x^{-nu} J_nu(x)
long double scaled_bessel_series(long double nu, long double x) {
  const long double q = -x * x / 4;
  long double term = std::pow(2.0L, -nu) / std::tgamma(nu + 1);
  long double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    if (k > x && std::abs(term) <= 1e-22L * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

double bessel_j(double nu, double x) {
  require(nu > -1, "Bessel order must exceed -1");
  require(x >= 0, "Bessel argument must be nonnegative");
  if (x == 0) return nu == 0 ? 1.0 : 0.0;
  return static_cast<double>(std::pow(static_cast<long double>(x), nu) * scaled_bessel_series(nu, x));
}

double bessel_first_zero(double order) {
  require(order > -1, "Bessel order must exceed -1");
  auto g = [order](double x) { return static_cast<double>(scaled_bessel_series(order, x)); };
  double a = 0.05, step = 0.05;
  double ga = g(a);
  require(ga > 0, "Bessel series is not positive near the origin");
  for (double b = a + step; b < 200; b += step) {
    double gb = g(b);
    if (gb <= 0) return bisect(g, b - step, b, 1e-15);
    a = b;
  }
  throw NumericalFailure("no Bessel zero found below 200 for order " + std::to_string(order));
}

double psi(double r, int d) {
  require(r > 0, "psi needs r > 0");
  BallSpectrum s = continuum_constants(d);
  return s.omega * std::pow(r, d) + s.lambda / (2.0 * d * r * r);
}

BallSpectrum continuum_constants(int d) {
  check_dim(d);
  BallSpectrum s;
  s.d = d;
  const double j = bessel_first_zero(d / 2.0 - 1.0);
  s.lambda = j * j;
  s.omega = std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  s.rho = std::pow(s.lambda / (double(d) * d * s.omega), 1.0 / (d + 2.0));
  s.chi = s.omega * std::pow(s.rho, d) + s.lambda / (2.0 * d * s.rho * s.rho);
  return s;
}

double chi_closed_form(int d) {
  BallSpectrum s = continuum_constants(d);
  return (d + 2.0) / 2.0 * std::pow(s.lambda / (double(d) * d), d / (d + 2.0)) * std::pow(s.omega, 2.0 / (d + 2.0));
}

double psi_minimizer_numeric(int d) {
  BallSpectrum s = continuum_constants(d);
  auto f = [&](double r) { return s.omega * std::pow(r, d) + s.lambda / (2.0 * d * r * r); };
  return golden_section_minimize(f, 1e-2, 1e2, 1e-13);
}

BrownianConstants brownian_normalisation(int d) {
  BallSpectrum s = continuum_constants(d);
  BrownianConstants b;
  b.rho = std::pow(s.lambda / (d * s.omega), 1.0 / (d + 2.0));
  b.chi = s.lambda / (2 * b.rho * b.rho) + s.omega * std::pow(b.rho, d);
  return b;
}

// ---------------------------------------------------------------- RadialEigenfunction

RadialEigenfunction::RadialEigenfunction(int d, std::size_t resolution) : d_(d) {
  check_dim(d);
  require(resolution >= 1000, "radial resolution must be at least 1000 samples");
  BallSpectrum s = continuum_constants(d);
  nu_ = d / 2.0 - 1.0;
  rho_ = s.rho;
  omega_ = s.omega;
  k_ = std::sqrt(s.lambda) / rho_;
  amp_ = 1.0;
  amp_ = 1.0 / std::sqrt(integrate_norm_squared());
  norm2_ = integrate_norm_squared();
  dr_ = rho_ / double(resolution);
  samples_.resize(resolution + 1);
  slopes_.resize(resolution + 1);
  for (std::size_t i = 0; i <= resolution; ++i) {
    samples_[i] = exact_value(i * dr_);
    slopes_[i] = exact_derivative(i * dr_);
  }
  samples_.back() = 0.0;
}

double RadialEigenfunction::profile(double x) const {
  return static_cast<double>(scaled_bessel_series(nu_, x));
}

double RadialEigenfunction::profile_derivative(double x) const {
  // d/dx [x^{-nu} J_nu] = -x * [x^{-(nu+1)} J_{nu+1}]
  return -x * static_cast<double>(scaled_bessel_series(nu_ + 1, x));
}

double RadialEigenfunction::exact_value(double r) const {
  if (r >= rho_) return 0.0;
  return std::max(0.0, amp_ * profile(k_ * r));
}

double RadialEigenfunction::exact_derivative(double r) const {
  if (r > rho_) return 0.0;
  return amp_ * k_ * profile_derivative(k_ * r);
}

double RadialEigenfunction::value(double r) const {
  if (r >= rho_) return 0.0;
  if (r < 0) r = -r;
  double u = r / dr_;
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(u), samples_.size() - 2);
  double t = u - double(i);
  double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  double v = h00 * samples_[i] + h10 * dr_ * slopes_[i] + h01 * samples_[i + 1] + h11 * dr_ * slopes_[i + 1];
  return std::max(0.0, v);
}

double RadialEigenfunction::derivative(double r) const {
  if (r >= rho_) return 0.0;
  double u = r / dr_;
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(u), samples_.size() - 2);
  double t = u - double(i);
  double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1, d01 = -d00, d11 = 3 * t * t - 2 * t;
  return (d00 * samples_[i] + d01 * samples_[i + 1]) / dr_ + d10 * slopes_[i] + d11 * slopes_[i + 1];
}

double RadialEigenfunction::shell_area() const { return d_ * omega_; }

double RadialEigenfunction::integrate_norm_squared() const {
  auto f = [this](double r) {
    double v = amp_ * profile(k_ * r);
    return v * v * std::pow(r, d_ - 1);
  };
  return shell_area() * integrate(f, 0.0, rho_, 128, 10);
}

double RadialEigenfunction::gradient_energy() const {
  auto f = [this](double r) {
    double v = exact_derivative(r);
    return v * v * std::pow(r, d_ - 1);
  };
  return shell_area() * integrate(f, 0.0, rho_, 128, 10);
}

RadialEigenfunction eigenfunction_profile(int d, std::size_t resolution) { return RadialEigenfunction(d, resolution); }

GridField phi_squared_on_lattice(const RadialEigenfunction& phi, const std::array<double, kMaxDim>& center,
                                 const ScaleRelation& scale) {
  const int d = phi.dim();
  require(scale.d == d, "dimension mismatch between eigenfunction and scale");
  GridField g;
  g.d = d;
  g.spacing = 1.0 / double(scale.n);
  const double h = g.spacing;
  Site lo, hi;
  for (int i = 0; i < d; ++i) {
    lo.c[i] = static_cast<int>(std::floor((center[i] - phi.radius()) / h)) - 1;
    hi.c[i] = static_cast<int>(std::ceil((center[i] + phi.radius()) / h)) + 1;
  }
  double total = 0;
  Site s = lo;
  while (true) {
    auto x = g.cell_center(s);
    double v = phi.at(x, center);
    if (v > 0) {
      g.values.emplace(s, v * v);
      total += v * v;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++s.c[i] <= hi.c[i]) break;
      s.c[i] = lo.c[i];
    }
    if (i == d) break;
  }
  require(total > 0, "lattice too coarse: no cell centre inside the ball");
  const double norm = total * std::pow(h, d);
  for (auto& kv : g.values) kv.second /= norm;
  return g;
}

// ---------------------------------------------------------------- discrete eigenpairs

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat minus_laplacian_matrix(const Domain& D) {
  const int d = D.dim();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(D.size() * (2 * d + 1));
  const double w = 1.0 / (2.0 * d);
  for (std::size_t i = 0; i < D.size(); ++i) {
    trips.emplace_back(int(i), int(i), 1.0);
    for (int c = 0; c < 2 * d; ++c) {
      long j = D.index_of(moved(D[i], c));
      if (j >= 0) trips.emplace_back(int(i), int(j), -w);
    }
  }
  SpMat A(long(D.size()), long(D.size()));
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

double residual_norm(const SpMat& A, const Eigen::VectorXd& v, double lambda) {
  return (A * v - lambda * v).norm() / v.norm();
}

struct InverseIteration {
  Eigen::VectorXd v;
  double lambda = 0;
  int iterations = 0;
  double residual = 0;
};

InverseIteration inverse_iteration(const SpMat& A, Eigen::VectorXd v, const Eigen::VectorXd* deflate) {
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(std::max<long>(1000, 4 * A.rows()));
  cg.compute(A);
  if (cg.info() != Eigen::Success) throw NumericalFailure("preconditioner setup failed");
  auto project = [&](Eigen::VectorXd& x) {
    if (deflate) x -= deflate->dot(x) * (*deflate);
  };
  project(v);
  v.normalize();
  double lambda = v.dot(A * v);
  InverseIteration out;
  for (int it = 1; it <= 2000; ++it) {
    Eigen::VectorXd w = cg.solveWithGuess(v, v / lambda);
    if (cg.info() != Eigen::Success && cg.error() > 1e-10)
      throw NumericalFailure("conjugate gradient did not converge in inverse iteration");
    project(w);
    w.normalize();
    double next = w.dot(A * w);
    v = w;
    bool stagnant = std::abs(next - lambda) <= 1e-13 * std::abs(next);
    lambda = next;
    out.iterations = it;
    if (stagnant) {
      double res = residual_norm(A, v, lambda);
      if (res <= 1e-12) break;
    }
  }
  out.v = v;
  out.lambda = lambda;
  out.residual = residual_norm(A, v, lambda);
  return out;
}

}  // namespace

std::vector<double> apply_minus_laplacian(const Domain& domain, const std::vector<double>& v) {
  require(v.size() == domain.size(), "vector does not match the domain");
  const int d = domain.dim();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < domain.size(); ++i) {
    double acc = 0;
    for (int c = 0; c < 2 * d; ++c) {
      long j = domain.index_of(moved(domain[i], c));
      if (j >= 0) acc += v[static_cast<std::size_t>(j)];
    }
    out[i] = v[i] - acc / (2.0 * d);
  }
  return out;
}

DiscreteEigenpair discrete_principal_eigenpair(const Domain& domain) {
  require(!domain.empty(), "eigenproblem needs a nonempty domain");
  require(is_connected(domain), "eigenproblem domain must be connected");
  SpMat A = minus_laplacian_matrix(domain);
  Eigen::VectorXd start = Eigen::VectorXd::Ones(long(domain.size()));
  InverseIteration r = inverse_iteration(A, start, nullptr);
  if (r.v.sum() < 0) r.v = -r.v;
  DiscreteEigenpair out;
  out.domain = domain;
  out.lambda1 = r.lambda;
  out.iterations = r.iterations;
  out.residual = r.residual;
  out.vector.assign(r.v.data(), r.v.data() + r.v.size());
  if (out.residual > 1e-8) throw NumericalFailure("eigenpair residual above 1e-8");
  for (double& x : out.vector) {
    if (x <= 0) throw NumericalFailure("principal eigenvector is not strictly positive");
  }
  return out;
}

double discrete_second_eigenvalue(const Domain& domain, const DiscreteEigenpair& first) {
  require(domain.size() >= 2, "second eigenvalue needs at least two sites");
  SpMat A = minus_laplacian_matrix(domain);
  Eigen::VectorXd v1 = Eigen::Map<const Eigen::VectorXd>(first.vector.data(), long(first.vector.size()));
  Eigen::VectorXd start(long(domain.size()));
  for (std::size_t i = 0; i < domain.size(); ++i) {
    double acc = 0, w = 1;
    for (int k = 0; k < domain.dim(); ++k, w *= 0.5) acc += w * domain[i].c[k];
    start[long(i)] = acc + 1e-3 * double(i % 7);
  }
  return inverse_iteration(A, start, &v1).lambda;
}

// ---------------------------------------------------------------- modified eigenfunction

ModifiedEigenfunction::ModifiedEigenfunction(RadialEigenfunction phi, const ScaleRelation& scale, double kappa)
    : phi_(std::move(phi)), n_(scale.n), d_(scale.d) {
  require(kappa > 0 && kappa < 1, "kappa must lie in (0, 1)");
  require(scale.d == phi_.dim(), "dimension mismatch between eigenfunction and scale");
  lift_ = std::pow(double(n_), -kappa);
  slope_ = std::abs(phi_.boundary_slope());
  // h'(s) = -slope (1-s)^p integrates to -lift/2 when p = 2 slope/lift - 1
  power_ = 2.0 * slope_ / lift_ - 1.0;
}

double ModifiedEigenfunction::shell_value(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  const double a = lift_;
  if (power_ >= 1) return a / 2 + slope_ / (power_ + 1) * std::pow(1 - s, power_ + 1);
  // shallow boundary slope: monotone cubic Hermite from (a, -slope) to (a/2, 0)
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s), h01 = s * s * (3 - 2 * s);
  return h00 * a + h10 * (-slope_) + h01 * (a / 2);
}

double ModifiedEigenfunction::shell_curvature_bound() const {
  if (power_ >= 1) return slope_ * power_;
  // h'' is affine in s for the cubic; check both ends
  const double a = lift_;
  return std::max(std::abs(4 * slope_ - 3 * a), std::abs(3 * a - 2 * slope_));
}

double ModifiedEigenfunction::value(double r) const {
  r = std::abs(r);
  const double rho = phi_.radius();
  if (r < rho) return phi_.value(r) + lift_;
  if (r < rho + 1) return shell_value(r - rho);
  return lift_ / 2;
}

double ModifiedEigenfunction::at_site(const Site& y) const {
  double acc = 0;
  for (int i = 0; i < d_; ++i) acc += double(y.c[i]) * y.c[i];
  return value(std::sqrt(acc) / double(n_));
}

ModifiedEigenfunction modified_eigenfunction(const RadialEigenfunction& phi, const ScaleRelation& scale, double kappa) {
  return ModifiedEigenfunction(phi, scale, kappa);
}

}  // namespace rangewalk
