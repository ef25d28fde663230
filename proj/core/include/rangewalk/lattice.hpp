#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "rangewalk/errors.hpp"

namespace rangewalk {

inline constexpr int kMaxDim = 6;

// Integer lattice point. Coordinates past the working dimension stay zero.
struct Site {
  std::array<int, kMaxDim> c{};

  int& operator[](int i) { return c[i]; }
  int operator[](int i) const { return c[i]; }

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;

  Site& operator+=(const Site& o) {
    for (int i = 0; i < kMaxDim; ++i) c[i] += o.c[i];
    return *this;
  }
  Site& operator-=(const Site& o) {
    for (int i = 0; i < kMaxDim; ++i) c[i] -= o.c[i];
    return *this;
  }
  friend Site operator+(Site a, const Site& b) { return a += b; }
  friend Site operator-(Site a, const Site& b) { return a -= b; }
};

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (int v : s.c) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

Site make_site(std::initializer_list<int> coords);
Site unit(int axis, int sign = 1);

void check_dim(int d);
// 2* = 2d/(d-2); only meaningful for d >= 3.
double critical_exponent(int d);

// Direction codes: 0:+e1, 1:-e1, 2:+e2, 3:-e2, ...
inline int code_axis(int code) { return code >> 1; }
inline int code_sign(int code) { return (code & 1) ? -1 : 1; }
inline int opposite(int code) { return code ^ 1; }
inline Site moved(Site s, int code) {
  s.c[code >> 1] += (code & 1) ? -1 : 1;
  return s;
}

double euclidean_norm(const Site& s);
int sup_norm(const Site& s);
int l1_norm(const Site& s);

// N = n^{d+2}.
struct ScaleRelation {
  int d = 3;
  long long n = 1;
  long long N = 1;

  static ScaleRelation from_n(int d, long long n);
  static ScaleRelation from_N(int d, long long N);  // throws unless N is a perfect (d+2)-th power
};

// Finite site set with stable (sorted) iteration order and O(1) lookup.
class Domain {
 public:
  Domain() = default;
  Domain(int d, std::vector<Site> sites);

  int dim() const { return d_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& operator[](std::size_t i) const { return sites_[i]; }
  bool contains(const Site& s) const { return index_.count(s) != 0; }
  // -1 when absent
  long index_of(const Site& s) const;

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

 private:
  int d_ = 0;
  std::vector<Site> sites_;
  std::unordered_map<Site, std::size_t, SiteHash> index_;
};

Domain lattice_ball(int d, const Site& center, double radius);
// Lambda(center, side) = {y : -side/2 < y_i - center_i <= side/2}
Domain centered_box(int d, const Site& center, int side);
// D plus all lattice neighbours of D.
Domain closure(const Domain& D);
bool is_connected(const Domain& D);

// Sparse nonnegative function on sites; absent sites read as zero.
class SiteField {
 public:
  using Map = std::unordered_map<Site, double, SiteHash>;

  SiteField() = default;
  explicit SiteField(int d) : d_(d) {}

  int dim() const { return d_; }
  double operator()(const Site& s) const;
  void set(const Site& s, double v);
  void add(const Site& s, double v);
  std::size_t support_size() const { return values_.size(); }
  std::vector<Site> support() const;  // sorted
  double sum() const;
  bool empty() const { return values_.empty(); }
  const Map& values() const { return values_; }

  template <class F>
  SiteField map(F&& fn) const {
    SiteField out(d_);
    for (const auto& [s, v] : values_) out.set(s, fn(v));
    return out;
  }

 private:
  int d_ = 0;
  Map values_;
};

// Piecewise constant function on cells of side `spacing`; cell i covers
// [i*spacing, (i+1)*spacing) and is sampled at its centre.
struct GridField {
  int d = 3;
  double spacing = 1.0;
  std::unordered_map<Site, double, SiteHash> values;

  double at(const Site& cell) const;
  double integral() const;
  std::array<double, kMaxDim> cell_center(const Site& cell) const;
};

// Open-addressing occupancy counter keyed on packed coordinates.
class OccupancyTable {
 public:
  explicit OccupancyTable(int d = 3);

  // returns the new count
  int increment(const Site& s);
  int decrement(const Site& s);
  int count(const Site& s) const;
  std::size_t distinct() const { return distinct_; }
  void clear();

 private:
  std::uint64_t pack(const Site& s) const;
  std::size_t slot(std::uint64_t key) const;
  void rebuild(std::size_t capacity);

  int d_;
  int bits_;
  long limit_;
  std::vector<std::uint64_t> keys_;
  std::vector<int> counts_;
  std::size_t used_ = 0;
  std::size_t distinct_ = 0;
};

class WalkPath {
 public:
  WalkPath() = default;
  WalkPath(int d, const Site& start, std::vector<std::uint8_t> steps);

  int dim() const { return d_; }
  std::size_t length() const { return steps_.size(); }
  const Site& start() const { return positions_.front(); }
  const Site& end() const { return positions_.back(); }
  const std::vector<std::uint8_t>& steps() const { return steps_; }
  const std::vector<Site>& positions() const { return positions_; }
  const Site& position(std::size_t k) const { return positions_[k]; }

  // |R_N| = |{S_0, ..., S_N}|
  std::size_t range_size() const { return occupancy_.distinct(); }
  // |supp L_N|; differs from the range by one when S_N is visited only at time N
  std::size_t support_size() const;
  int visits(const Site& s) const { return occupancy_.count(s); }

  // Replace steps[first, first+codes.size()); later positions are translated
  // when the displacement changes. Returns the change in |R_N|.
  long rewrite(std::size_t first, std::span<const std::uint8_t> codes);
  // Apply a direction-code permutation to steps[first, N). Returns the change in |R_N|.
  long remap_suffix(std::size_t first, std::span<const std::uint8_t> code_map);

  std::size_t recount_range() const;

 private:
  void occupy(const Site& s, long& delta);
  void vacate(const Site& s, long& delta);

  int d_ = 3;
  std::vector<std::uint8_t> steps_;
  std::vector<Site> positions_;
  OccupancyTable occupancy_;
};

WalkPath build_walk(int d, const Site& start, std::vector<std::uint8_t> steps);

SiteField local_time(const WalkPath& walk);
SiteField sqrt_field(const SiteField& f);

// (1/2d) sum over ordered neighbour pairs (y,z) of (f(y)-f(z))^2, restricted to
// pairs inside `domain` when one is given.
double dirichlet_energy(const SiteField& f, const Domain* domain = nullptr);
double lp_norm(const SiteField& f, double p, const Domain* domain = nullptr);

// l_N(x) = n^d/N L(floor(nx)).
GridField rescaled_profile(const SiteField& L, const ScaleRelation& scale);

void write_snapshot(std::ostream& os, const WalkPath& walk);
WalkPath read_snapshot(std::istream& is);

// Calls fn(steps) for every step sequence of length N, in lexicographic order.
void for_each_path(int d, std::size_t N, const std::function<void(const std::vector<std::uint8_t>&)>& fn);

}  // namespace rangewalk
