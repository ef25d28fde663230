#pragma once

#include <array>
#include <vector>

#include "rangewalk/lattice.hpp"

namespace rangewalk {

// Multilinear interpolant of a lattice field on unit cells. Cell y covers
// y + [0,1]^d and carries the corner values f(y + e), e in {0,1}^d, so shared
// faces agree by construction.
class CellwisePolynomial {
 public:
  explicit CellwisePolynomial(SiteField f);

  int dim() const { return f_.dim(); }
  const SiteField& source() const { return f_; }
  // lower corners of the cells with a nonzero corner value, sorted
  const std::vector<Site>& cells() const { return cells_; }
  std::array<double, 1 << kMaxDim> corners(const Site& cell) const;
  double operator()(const std::array<double, kMaxDim>& x) const;
  // |{F > 0}|: inside a cell every corner weight is positive, so the cell
  // interior is positive as soon as one corner is.
  double positive_volume() const { return double(cells_.size()); }

 private:
  SiteField f_;
  std::vector<Site> cells_;
};

CellwisePolynomial multilinear_interpolate(const SiteField& f);

struct IntegralIdentities {
  double integral = 0;        // int F
  double square = 0;          // int F^2
  double gradient = 0;        // int |grad F|^2
};

// Exact cellwise moments: for corners e, e' the one-dimensional factors are
// int u_e u_e' = 1/3 or 1/6 and int u_e' u_e'' = +1 or -1.
IntegralIdentities integral_identities(const CellwisePolynomial& F);

// Phi_n(f)(x) = n^d/N f(floor(nx))^2 on the 1/n grid.
GridField rescale_profile_operator(const SiteField& f, const ScaleRelation& scale);

// ||f||_{2*,box} / ((1/n)||f||_{2,box} + sqrt(2d E(f,box))) on Lambda(center, n).
double check_poincare_sobolev(const SiteField& f, const Site& center, int n);
// ||f - mean||_{2,box} / (n sqrt(2d E(f,box))).
double check_poincare_wirtinger(const SiteField& f, const Site& center, int n);
// ||f||_{2*} / sqrt(2d E(f)) on all of Z^d.
double sobolev_ratio(const SiteField& f);

}  // namespace rangewalk
