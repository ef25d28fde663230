#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace rangewalk {

// Composite Gauss-Legendre rule on [a, b] with `panels` panels of `order` nodes.
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64, int order = 8);

// Nodes and weights of the order-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

double golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

// Root of f on [a, b] given a sign change; bisection to absolute width tol.
double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-15);

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0;
  int evaluations = 0;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, double initial_step, double tol, int max_evaluations);

struct MeanSe {
  double mean = 0;
  double se = 0;
};
MeanSe mean_and_se(const std::vector<double>& xs);

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
  double statistic = 0;
  double p_value = 1;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rangewalk
