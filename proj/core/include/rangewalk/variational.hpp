#pragma once

#include <array>
#include <iosfwd>

#include "rangewalk/interpolation.hpp"
#include "rangewalk/lattice.hpp"
#include "rangewalk/spectral.hpp"

namespace rangewalk {

using Point = std::array<double, kMaxDim>;

// Union of closed cells spacing*(y + [0,1]^d), y in cells.
struct VoxelDomain {
  int d = 3;
  double spacing = 1.0;
  Domain cells;

  VoxelDomain() = default;
  VoxelDomain(double spacing, Domain cells);
  double volume() const { return std::pow(spacing, d) * double(cells.size()); }
  // same set, each cell split into 2^d
  VoxelDomain refined() const;
  // fraction of cells with a face neighbour outside the set
  double surface_fraction() const;
};

// cells whose centre lies in the ball
VoxelDomain voxel_ball(int d, const Point& center, double radius, double spacing);
// text: spacing on the first line, then one cell index (d integers) per line
VoxelDomain read_voxels(std::istream& is);

// exact chord along one axis, midpoint rule with `samples` points per other axis
double ball_overlap(const VoxelDomain& G, const Point& center, double radius, int samples = 8);

struct Asymmetry {
  double value = 0;           // |G delta B| / |B|
  Point center{};
  double radius = 0;
  double discretisation = 0;  // 2 x surface-cell fraction
};

Asymmetry fraenkel_asymmetry(const VoxelDomain& G);

struct FaberKrahnDeficit {
  double lambda_coarse = 0;   // continuum-rescaled, spacing h
  double lambda_fine = 0;     // spacing h/2
  double lambda = 0;          // Richardson 2 fine - coarse
  double normalised = 0;      // |G|^{2/d} lambda(G)
  double ball_value = 0;      // |B|^{2/d} lambda(B)
  double deficit = 0;
  double error = 0;           // |fine - coarse| |G|^{2/d}
};

FaberKrahnDeficit fk_deficit(const VoxelDomain& G);

// |{g > 0}| + (1/2d) int |grad g|^2 for a cell-sampled g, gradient by forward
// differences across cell faces.
double shape_functional(const GridField& g);
// Same functional for the interpolant F(x/spacing), computed exactly.
double shape_functional(const CellwisePolynomial& F, double spacing);

struct EigenfunctionDistance {
  double epsilon = 0;
  Point center{};
};

// inf_x ||g - phi_x||_2 with both sides sampled at the cell centres of g's grid
EigenfunctionDistance l2_distance_to_eigenfunction(const GridField& g, const RadialEigenfunction& phi);
double l2_distance_at(const GridField& g, const RadialEigenfunction& phi, const Point& center);

}  // namespace rangewalk
