#include "rangewalk/variational.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <string>

#include "rangewalk/numerics.hpp"

namespace rangewalk {

VoxelDomain::VoxelDomain(double h, Domain c) : d(c.dim()), spacing(h), cells(std::move(c)) {
  require(spacing > 0, "voxel spacing must be positive");
  require(!cells.empty(), "voxel domain is empty");
}

VoxelDomain VoxelDomain::refined() const {
  std::vector<Site> out;
  out.reserve(cells.size() << d);
  for (const Site& y : cells)
    for (int e = 0; e < (1 << d); ++e) {
      Site z;
      for (int i = 0; i < d; ++i) z.c[i] = 2 * y.c[i] + (e >> i & 1);
      out.push_back(z);
    }
  return VoxelDomain(spacing / 2, Domain(d, std::move(out)));
}

double VoxelDomain::surface_fraction() const {
  std::size_t surf = 0;
  for (const Site& y : cells)
    for (int c = 0; c < 2 * d; ++c)
      if (!cells.contains(moved(y, c))) {
        ++surf;
        break;
      }
  return double(surf) / double(cells.size());
}

VoxelDomain voxel_ball(int d, const Point& center, double radius, double spacing) {
  check_dim(d);
  require(radius > 0 && spacing > 0, "ball radius and spacing must be positive");
  Site lo, hi;
  for (int i = 0; i < d; ++i) {
    lo.c[i] = int(std::floor((center[i] - radius) / spacing)) - 1;
    hi.c[i] = int(std::ceil((center[i] + radius) / spacing)) + 1;
  }
  std::vector<Site> out;
  Site y = lo;
  while (true) {
    double r2 = 0;
    for (int i = 0; i < d; ++i) {
      double x = (y.c[i] + 0.5) * spacing - center[i];
      r2 += x * x;
    }
    if (r2 < radius * radius) out.push_back(y);
    int i = 0;
    for (; i < d; ++i) {
      if (++y.c[i] <= hi.c[i]) break;
      y.c[i] = lo.c[i];
    }
    if (i == d) break;
  }
  return VoxelDomain(spacing, Domain(d, std::move(out)));
}

VoxelDomain read_voxels(std::istream& is) {
  std::string line;
  double spacing = 0;
  while (std::getline(is, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  {
    std::istringstream ls(line);
    if (!(ls >> spacing) || spacing <= 0) throw InvalidInput("voxel file: first line must hold a positive spacing");
  }
  int d = 0;
  std::vector<Site> cells;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<int> coords;
    int v;
    while (ls >> v) coords.push_back(v);
    if (!ls.eof()) throw InvalidInput("voxel file: bad cell line '" + line + "'");
    if (coords.empty()) continue;
    if (d == 0) d = int(coords.size());
    if (int(coords.size()) != d) throw InvalidInput("voxel file: inconsistent cell dimension");
    check_dim(d);
    Site s;
    for (int i = 0; i < d; ++i) s.c[i] = coords[i];
    cells.push_back(s);
  }
  if (cells.empty()) throw InvalidInput("voxel file: no cells");
  return VoxelDomain(spacing, Domain(d, std::move(cells)));
}

namespace {

// Overlap in cell units: cells are y + [0,1]^d, the ball centre is given
// relative to `anchor` so that integer translations leave every operation
// unchanged.
double overlap_cells(const Domain& cells, const Site& anchor, const Point& rel, double r, int samples) {
  const int d = cells.dim();
  const double r2 = r * r;
  double acc = 0;
  const double sub = 1.0 / samples;
  const double sub_vol = std::pow(sub, d - 1);
  for (const Site& y : cells) {
    double near2 = 0, far2 = 0;
    Point lo{};
    for (int i = 0; i < d; ++i) {
      lo[i] = double(y.c[i] - anchor.c[i]) - rel[i];
      double a = lo[i], b = lo[i] + 1;
      double n = (a > 0) ? a : (b < 0 ? -b : 0.0);
      double f = std::max(std::abs(a), std::abs(b));
      near2 += n * n;
      far2 += f * f;
    }
    if (near2 >= r2) continue;
    if (far2 <= r2) {
      acc += 1;
      continue;
    }
    if (d == 1) {
      double half = std::sqrt(r2);
      double a = std::max(lo[0], -half), b = std::min(lo[0] + 1, half);
      acc += b > a ? b - a : 0.0;
      continue;
    }
    // exact chord along one axis, midpoint samples on the others; averaged
    // over the choice of exact axis so the rule is symmetric in coordinates
    int total = 1;
    for (int i = 0; i < d - 1; ++i) total *= samples;
    double part = 0;
    for (int ax = 0; ax < d; ++ax) {
      for (int k = 0; k < total; ++k) {
        int rest = k;
        double q2 = 0;
        for (int i = 0; i < d; ++i) {
          if (i == ax) continue;
          double x = lo[i] + ((rest % samples) + 0.5) * sub;
          rest /= samples;
          q2 += x * x;
        }
        double rem2 = r2 - q2;
        if (rem2 <= 0) continue;
        double half = std::sqrt(rem2);
        double a = std::max(lo[ax], -half), b = std::min(lo[ax] + 1, half);
        if (b > a) part += b - a;
      }
    }
    part /= d;
    acc += part * sub_vol;
  }
  return acc;
}

Site componentwise_min(const Domain& D) {
  Site m = D[0];
  for (const Site& y : D)
    for (int i = 0; i < D.dim(); ++i) m.c[i] = std::min(m.c[i], y.c[i]);
  return m;
}

}  // namespace

double ball_overlap(const VoxelDomain& G, const Point& center, double radius, int samples) {
  Point rel{};
  for (int i = 0; i < G.d; ++i) rel[i] = center[i] / G.spacing;
  return overlap_cells(G.cells, Site{}, rel, radius / G.spacing, samples) * std::pow(G.spacing, G.d);
}

Asymmetry fraenkel_asymmetry(const VoxelDomain& G) {
  require(!G.cells.empty(), "asymmetry of an empty domain");
  const int d = G.d;
  const double count = double(G.cells.size());
  const BallSpectrum sp = continuum_constants(d);
  const double r = std::pow(count / sp.omega, 1.0 / d);  // cell units
  const Site anchor = componentwise_min(G.cells);
  auto asym = [&](const Point& rel) { return 2.0 * (1.0 - overlap_cells(G.cells, anchor, rel, r, 8) / count); };

  // coarse: cell centres on a sub-lattice of stride s, at most ~400 of them
  const int stride = std::max(1, int(std::ceil(std::pow(count / 400.0, 1.0 / d))));
  std::vector<std::pair<double, Point>> coarse;
  for (const Site& y : G.cells) {
    bool keep = true;
    for (int i = 0; i < d; ++i) keep = keep && ((y.c[i] - anchor.c[i]) % stride == 0);
    if (!keep) continue;
    Point p{};
    for (int i = 0; i < d; ++i) p[i] = y.c[i] - anchor.c[i] + 0.5;
    coarse.emplace_back(asym(p), p);
  }
  Point centroid{};
  for (const Site& y : G.cells)
    for (int i = 0; i < d; ++i) centroid[i] += (y.c[i] - anchor.c[i] + 0.5) / count;
  coarse.emplace_back(asym(centroid), centroid);
  std::sort(coarse.begin(), coarse.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  Asymmetry best;
  best.value = std::numeric_limits<double>::infinity();
  const std::size_t starts = std::min<std::size_t>(3, coarse.size());
  for (std::size_t s = 0; s < starts; ++s) {
    auto [val, p] = coarse[s];
    for (double step = 0.25 * stride; step >= 1.0 / 64 - 1e-15; step /= 2) {
      bool moved_any = true;
      while (moved_any) {
        moved_any = false;
        double best_val = val;
        Point best_p = p;
        for (int i = 0; i < d; ++i)
          for (int sg : {1, -1}) {
            Point q = p;
            q[i] += sg * step;
            double v = asym(q);
            if (v < best_val - 1e-15) {
              best_val = v;
              best_p = q;
            }
          }
        if (best_val < val) {
          val = best_val;
          p = best_p;
          moved_any = true;
        }
      }
    }
    if (val < best.value) {
      best.value = val;
      for (int i = 0; i < d; ++i) best.center[i] = (anchor.c[i] + p[i]) * G.spacing;
    }
  }
  best.value = std::clamp(best.value, 0.0, 2.0);
  best.radius = r * G.spacing;
  best.discretisation = 2.0 * G.surface_fraction();
  return best;
}

FaberKrahnDeficit fk_deficit(const VoxelDomain& G) {
  require(is_connected(G.cells), "Faber-Krahn deficit needs a connected domain");
  const int d = G.d;
  FaberKrahnDeficit out;
  auto continuum = [d](const VoxelDomain& V) {
    auto ep = discrete_principal_eigenpair(V.cells);
    return 2.0 * d * ep.lambda1 / (V.spacing * V.spacing);
  };
  out.lambda_coarse = continuum(G);
  out.lambda_fine = continuum(G.refined());
  out.lambda = 2 * out.lambda_fine - out.lambda_coarse;
  const double vol_factor = std::pow(G.volume(), 2.0 / d);
  const BallSpectrum sp = continuum_constants(d);
  out.normalised = vol_factor * out.lambda;
  out.ball_value = std::pow(sp.omega, 2.0 / d) * sp.lambda;
  out.deficit = out.normalised - out.ball_value;
  out.error = std::abs(out.lambda_fine - out.lambda_coarse) * vol_factor;
  return out;
}

double shape_functional(const GridField& g) {
  const int d = g.d;
  std::vector<std::pair<Site, double>> cells;
  for (const auto& [s, v] : g.values)
    if (v > 0) cells.emplace_back(s, v);
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double grad = 0;
  for (const auto& [y, v] : cells) {
    for (int c = 0; c < 2 * d; ++c) {
      Site z = moved(y, c);
      double w = g.at(z);
      if (w > 0 && code_sign(c) < 0) continue;  // interior faces once
      grad += (v - w) * (v - w);
    }
  }
  const double h = g.spacing;
  return std::pow(h, d) * double(cells.size()) + std::pow(h, d - 2) * grad / (2.0 * d);
}

double shape_functional(const CellwisePolynomial& F, double spacing) {
  const int d = F.dim();
  auto I = integral_identities(F);
  return std::pow(spacing, d) * F.positive_volume() + std::pow(spacing, d - 2) * I.gradient / (2.0 * d);
}

double l2_distance_at(const GridField& g, const RadialEigenfunction& phi, const Point& center) {
  const int d = g.d;
  require(phi.dim() == d, "dimension mismatch between field and eigenfunction");
  const double h = g.spacing;
  const double rho = phi.radius();
  double acc = 0;
  for (const auto& [s, v] : g.values) {
    double p = phi.at(g.cell_center(s), center);
    acc += (v - p) * (v - p);
  }
  Site lo, hi;
  for (int i = 0; i < d; ++i) {
    lo.c[i] = int(std::floor((center[i] - rho) / h)) - 1;
    hi.c[i] = int(std::ceil((center[i] + rho) / h)) + 1;
  }
  Site y = lo;
  while (true) {
    if (!g.values.count(y)) {
      double p = phi.at(g.cell_center(y), center);
      acc += p * p;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++y.c[i] <= hi.c[i]) break;
      y.c[i] = lo.c[i];
    }
    if (i == d) break;
  }
  return std::sqrt(acc * std::pow(h, d));
}

EigenfunctionDistance l2_distance_to_eigenfunction(const GridField& g, const RadialEigenfunction& phi) {
  const int d = g.d;
  const double h = g.spacing;
  EigenfunctionDistance out;
  double mass = 0;
  Point centroid{};
  for (const auto& [s, v] : g.values) {
    auto c = g.cell_center(s);
    mass += v * v;
    for (int i = 0; i < d; ++i) centroid[i] += v * v * c[i];
  }
  if (mass == 0) {
    out.epsilon = l2_distance_at(g, phi, centroid);
    return out;
  }
  for (int i = 0; i < d; ++i) centroid[i] /= mass;

  // coarse: offsets in {-2..2} h/2 around the centroid
  Point best = centroid;
  double best_val = l2_distance_at(g, phi, centroid);
  int total = 1;
  for (int i = 0; i < d; ++i) total *= 5;
  for (int k = 0; k < total; ++k) {
    Point p = centroid;
    int rest = k;
    for (int i = 0; i < d; ++i) {
      p[i] += ((rest % 5) - 2) * 0.5 * h;
      rest /= 5;
    }
    double v = l2_distance_at(g, phi, p);
    if (v < best_val) {
      best_val = v;
      best = p;
    }
  }
  std::vector<double> start(best.begin(), best.begin() + d);
  auto nm = nelder_mead(
      [&](const std::vector<double>& x) {
        Point p{};
        std::copy(x.begin(), x.end(), p.begin());
        return l2_distance_at(g, phi, p);
      },
      start, 0.25 * h, 1e-12, 600);
  if (nm.value < best_val) {
    best_val = nm.value;
    std::copy(nm.x.begin(), nm.x.end(), best.begin());
  }
  out.epsilon = best_val;
  out.center = best;
  return out;
}

}  // namespace rangewalk
