#include "rangewalk/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

namespace rangewalk {

Site make_site(std::initializer_list<int> coords) {
  require(coords.size() <= static_cast<std::size_t>(kMaxDim), "too many coordinates");
  Site s;
  int i = 0;
  for (int v : coords) s.c[i++] = v;
  return s;
}

Site unit(int axis, int sign) {
  Site s;
  s.c[axis] = sign;
  return s;
}

void check_dim(int d) {
  require(d >= 1 && d <= kMaxDim, "dimension must be in [1, " + std::to_string(kMaxDim) + "]");
}

double critical_exponent(int d) {
  require(d >= 3, "the Sobolev exponent 2d/(d-2) needs d >= 3");
  return 2.0 * d / (d - 2.0);
}

double euclidean_norm(const Site& s) {
  double acc = 0;
  for (int v : s.c) acc += double(v) * v;
  return std::sqrt(acc);
}

int sup_norm(const Site& s) {
  int m = 0;
  for (int v : s.c) m = std::max(m, std::abs(v));
  return m;
}

int l1_norm(const Site& s) {
  int m = 0;
  for (int v : s.c) m += std::abs(v);
  return m;
}

ScaleRelation ScaleRelation::from_n(int d, long long n) {
  check_dim(d);
  require(n >= 1, "scale n must be positive");
  long double N = std::pow(static_cast<long double>(n), d + 2);
  require(N < 9.0e18L, "N = n^(d+2) overflows");
  long long Ni = 1;
  for (int i = 0; i < d + 2; ++i) Ni *= n;
  return {d, n, Ni};
}

ScaleRelation ScaleRelation::from_N(int d, long long N) {
  check_dim(d);
  require(N >= 1, "N must be positive");
  auto n = static_cast<long long>(std::llround(std::pow(static_cast<double>(N), 1.0 / (d + 2))));
  for (long long cand = std::max(1LL, n - 1); cand <= n + 1; ++cand) {
    ScaleRelation s = from_n(d, cand);
    if (s.N == N) return s;
  }
  throw InvalidInput("N = " + std::to_string(N) + " is not of the form n^(d+2)");
}

// ---------------------------------------------------------------- Domain

Domain::Domain(int d, std::vector<Site> sites) : d_(d), sites_(std::move(sites)) {
  check_dim(d);
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
  index_.reserve(sites_.size() * 2);
  for (std::size_t i = 0; i < sites_.size(); ++i) index_.emplace(sites_[i], i);
}

long Domain::index_of(const Site& s) const {
  auto it = index_.find(s);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

namespace {

// Visit every site of the box [lo, hi] (inclusive) in the first d coordinates.
template <class F>
void for_each_in_box(int d, const Site& lo, const Site& hi, F&& fn) {
  for (int i = 0; i < d; ++i)
    if (lo.c[i] > hi.c[i]) return;
  Site s = lo;
  while (true) {
    fn(s);
    int i = 0;
    for (; i < d; ++i) {
      if (++s.c[i] <= hi.c[i]) break;
      s.c[i] = lo.c[i];
    }
    if (i == d) return;
  }
}

}  // namespace

Domain lattice_ball(int d, const Site& center, double radius) {
  check_dim(d);
  require(radius >= 0, "ball radius must be nonnegative");
  int r = static_cast<int>(std::floor(radius));
  Site lo = center, hi = center;
  for (int i = 0; i < d; ++i) {
    lo.c[i] -= r;
    hi.c[i] += r;
  }
  std::vector<Site> out;
  const double r2 = radius * radius * (1 + 1e-12);
  for_each_in_box(d, lo, hi, [&](const Site& s) {
    double acc = 0;
    for (int i = 0; i < d; ++i) acc += double(s.c[i] - center.c[i]) * (s.c[i] - center.c[i]);
    if (acc <= r2) out.push_back(s);
  });
  return Domain(d, std::move(out));
}

Domain centered_box(int d, const Site& center, int side) {
  check_dim(d);
  require(side >= 1, "box side must be positive");
  // -side/2 < k <= side/2  <=>  k in [floor(side/2) - side + 1, floor(side/2)]
  int hi_off = side / 2;
  int lo_off = hi_off - side + 1;
  Site lo = center, hi = center;
  for (int i = 0; i < d; ++i) {
    lo.c[i] += lo_off;
    hi.c[i] += hi_off;
  }
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(std::pow(side, d)));
  for_each_in_box(d, lo, hi, [&](const Site& s) { out.push_back(s); });
  return Domain(d, std::move(out));
}

Domain closure(const Domain& D) {
  std::vector<Site> out(D.begin(), D.end());
  for (const Site& s : D)
    for (int c = 0; c < 2 * D.dim(); ++c) out.push_back(moved(s, c));
  return Domain(D.dim(), std::move(out));
}

bool is_connected(const Domain& D) {
  if (D.size() <= 1) return true;
  std::vector<char> seen(D.size(), 0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    auto i = q.front();
    q.pop();
    for (int c = 0; c < 2 * D.dim(); ++c) {
      long j = D.index_of(moved(D[i], c));
      if (j >= 0 && !seen[j]) {
        seen[j] = 1;
        ++reached;
        q.push(static_cast<std::size_t>(j));
      }
    }
  }
  return reached == D.size();
}

// ---------------------------------------------------------------- SiteField

double SiteField::operator()(const Site& s) const {
  auto it = values_.find(s);
  return it == values_.end() ? 0.0 : it->second;
}

void SiteField::set(const Site& s, double v) {
  require(std::isfinite(v) && v >= 0, "site field values must be finite and nonnegative");
  if (v > 0)
    values_[s] = v;
  else
    values_.erase(s);
}

void SiteField::add(const Site& s, double v) { set(s, (*this)(s) + v); }

std::vector<Site> SiteField::support() const {
  std::vector<Site> out;
  out.reserve(values_.size());
  for (const auto& kv : values_) out.push_back(kv.first);
  std::sort(out.begin(), out.end());
  return out;
}

double SiteField::sum() const {
  // sorted order keeps the floating sum reproducible
  double acc = 0;
  for (const Site& s : support()) acc += values_.at(s);
  return acc;
}

// ---------------------------------------------------------------- GridField

double GridField::at(const Site& cell) const {
  auto it = values.find(cell);
  return it == values.end() ? 0.0 : it->second;
}

double GridField::integral() const {
  std::vector<std::pair<Site, double>> items(values.begin(), values.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double acc = 0;
  for (const auto& kv : items) acc += kv.second;
  return acc * std::pow(spacing, d);
}

std::array<double, kMaxDim> GridField::cell_center(const Site& cell) const {
  std::array<double, kMaxDim> x{};
  for (int i = 0; i < d; ++i) x[i] = (cell.c[i] + 0.5) * spacing;
  return x;
}

// ---------------------------------------------------------------- OccupancyTable

namespace {
constexpr std::uint64_t kEmpty = std::numeric_limits<std::uint64_t>::max();
}

OccupancyTable::OccupancyTable(int d) : d_(d) {
  check_dim(d);
  bits_ = 64 / d;
  limit_ = (1L << (bits_ - 1)) - 2;
  rebuild(64);
}

std::uint64_t OccupancyTable::pack(const Site& s) const {
  std::uint64_t key = 0;
  for (int i = 0; i < d_; ++i) {
    long v = s.c[i];
    if (v > limit_ || v < -limit_) throw InvalidInput("walk coordinate exceeds the occupancy table range");
    key = (key << bits_) | static_cast<std::uint64_t>(v + limit_ + 1);
  }
  return key;
}

std::size_t OccupancyTable::slot(std::uint64_t key) const {
  std::uint64_t h = key * 0x9e3779b97f4a7c15ULL;
  h ^= h >> 29;
  return static_cast<std::size_t>(h) & (keys_.size() - 1);
}

void OccupancyTable::rebuild(std::size_t capacity) {
  std::vector<std::uint64_t> old_keys = std::move(keys_);
  std::vector<int> old_counts = std::move(counts_);
  keys_.assign(capacity, kEmpty);
  counts_.assign(capacity, 0);
  used_ = 0;
  for (std::size_t i = 0; i < old_keys.size(); ++i) {
    if (old_keys[i] == kEmpty || old_counts[i] == 0) continue;
    std::size_t j = slot(old_keys[i]);
    while (keys_[j] != kEmpty) j = (j + 1) & (capacity - 1);
    keys_[j] = old_keys[i];
    counts_[j] = old_counts[i];
    ++used_;
  }
}

int OccupancyTable::increment(const Site& s) {
  std::uint64_t key = pack(s);
  std::size_t j = slot(key);
  while (keys_[j] != kEmpty && keys_[j] != key) j = (j + 1) & (keys_.size() - 1);
  if (keys_[j] == kEmpty) {
    keys_[j] = key;
    ++used_;
  }
  int c = ++counts_[j];
  if (c == 1) ++distinct_;
  if (used_ * 10 > keys_.size() * 6) {
    // zero-count entries are dropped on rebuild
    std::size_t cap = keys_.size();
    while (distinct_ * 10 > cap * 3) cap *= 2;
    rebuild(cap);
  }
  return c;
}

int OccupancyTable::decrement(const Site& s) {
  std::uint64_t key = pack(s);
  std::size_t j = slot(key);
  while (keys_[j] != kEmpty && keys_[j] != key) j = (j + 1) & (keys_.size() - 1);
  if (keys_[j] == kEmpty || counts_[j] == 0) throw InvalidInput("occupancy underflow");
  int c = --counts_[j];
  if (c == 0) --distinct_;
  return c;
}

int OccupancyTable::count(const Site& s) const {
  std::uint64_t key = pack(s);
  std::size_t j = slot(key);
  while (keys_[j] != kEmpty && keys_[j] != key) j = (j + 1) & (keys_.size() - 1);
  return keys_[j] == kEmpty ? 0 : counts_[j];
}

void OccupancyTable::clear() {
  keys_.assign(64, kEmpty);
  counts_.assign(64, 0);
  used_ = distinct_ = 0;
}

// ---------------------------------------------------------------- WalkPath

WalkPath::WalkPath(int d, const Site& start, std::vector<std::uint8_t> steps)
    : d_(d), steps_(std::move(steps)), occupancy_(d) {
  check_dim(d);
  for (int i = d; i < kMaxDim; ++i) require(start.c[i] == 0, "start has coordinates beyond the dimension");
  positions_.reserve(steps_.size() + 1);
  positions_.push_back(start);
  occupancy_.increment(start);
  for (std::uint8_t code : steps_) {
    require(code < 2 * d, "direction code out of range");
    positions_.push_back(moved(positions_.back(), code));
    occupancy_.increment(positions_.back());
  }
}

std::size_t WalkPath::support_size() const {
  return range_size() - (occupancy_.count(end()) == 1 ? 1 : 0);
}

void WalkPath::occupy(const Site& s, long& delta) {
  if (occupancy_.increment(s) == 1) ++delta;
}

void WalkPath::vacate(const Site& s, long& delta) {
  if (occupancy_.decrement(s) == 0) --delta;
}

long WalkPath::rewrite(std::size_t first, std::span<const std::uint8_t> codes) {
  require(first + codes.size() <= steps_.size(), "rewrite window out of range");
  long delta = 0;
  Site shift;
  std::size_t last = first + codes.size();
  Site pos = positions_[first];
  for (std::size_t k = first; k < last; ++k) {
    require(codes[k - first] < 2 * d_, "direction code out of range");
    steps_[k] = codes[k - first];
    pos = moved(pos, steps_[k]);
    if (pos != positions_[k + 1]) {
      vacate(positions_[k + 1], delta);
      occupy(pos, delta);
      positions_[k + 1] = pos;
    }
  }
  // positions_[last] was already updated in the loop; compare against the old
  // endpoint by re-deriving it from the unchanged suffix
  if (last < steps_.size()) {
    Site old_next = positions_[last + 1];
    Site want_next = moved(positions_[last], steps_[last]);
    shift = want_next - old_next;
    if (shift != Site{}) {
      for (std::size_t k = last + 1; k < positions_.size(); ++k) {
        vacate(positions_[k], delta);
        positions_[k] += shift;
      }
      for (std::size_t k = last + 1; k < positions_.size(); ++k) occupy(positions_[k], delta);
    }
  }
  return delta;
}

long WalkPath::remap_suffix(std::size_t first, std::span<const std::uint8_t> code_map) {
  require(first <= steps_.size(), "pivot index out of range");
  require(code_map.size() == static_cast<std::size_t>(2 * d_), "code map has the wrong size");
  long delta = 0;
  for (std::size_t k = first + 1; k < positions_.size(); ++k) vacate(positions_[k], delta);
  for (std::size_t k = first; k < steps_.size(); ++k) {
    steps_[k] = code_map[steps_[k]];
    positions_[k + 1] = moved(positions_[k], steps_[k]);
    occupy(positions_[k + 1], delta);
  }
  return delta;
}

std::size_t WalkPath::recount_range() const {
  std::vector<Site> all(positions_);
  std::sort(all.begin(), all.end());
  return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
}

WalkPath build_walk(int d, const Site& start, std::vector<std::uint8_t> steps) {
  return WalkPath(d, start, std::move(steps));
}

// ---------------------------------------------------------------- fields

SiteField local_time(const WalkPath& walk) {
  SiteField L(walk.dim());
  const auto& pos = walk.positions();
  for (std::size_t k = 0; k + 1 < pos.size(); ++k) L.add(pos[k], 1.0);
  return L;
}

SiteField sqrt_field(const SiteField& f) {
  return f.map([](double v) { return std::sqrt(v); });
}

double dirichlet_energy(const SiteField& f, const Domain* domain) {
  const int d = f.dim();
  double acc = 0;
  // Each ordered pair with at least one endpoint in the support is visited
  // from its support endpoints; pairs with both endpoints in the support are
  // reached twice, as ordered pairs should be.
  for (const Site& y : f.support()) {
    if (domain && !domain->contains(y)) continue;
    const double fy = f(y);
    for (int c = 0; c < 2 * d; ++c) {
      Site z = moved(y, c);
      if (domain && !domain->contains(z)) continue;
      double fz = f(z);
      double diff = fy - fz;
      acc += (fz > 0 ? 1.0 : 2.0) * diff * diff;
    }
  }
  return acc / (2.0 * d);
}

double lp_norm(const SiteField& f, double p, const Domain* domain) {
  require(p >= 1, "lp_norm needs p >= 1");
  double acc = 0;
  for (const Site& s : f.support()) {
    if (domain && !domain->contains(s)) continue;
    acc += std::pow(f(s), p);
  }
  return std::pow(acc, 1.0 / p);
}

GridField rescaled_profile(const SiteField& L, const ScaleRelation& scale) {
  require(L.dim() == scale.d, "dimension mismatch between field and scale");
  double total = L.sum();
  require(std::abs(total - double(scale.N)) <= 1e-9 * double(scale.N), "local time mass differs from N");
  GridField g;
  g.d = scale.d;
  g.spacing = 1.0 / double(scale.n);
  const double factor = std::pow(double(scale.n), scale.d) / double(scale.N);
  for (const auto& [s, v] : L.values()) g.values.emplace(s, v * factor);
  return g;
}

// ---------------------------------------------------------------- snapshots

void write_snapshot(std::ostream& os, const WalkPath& walk) {
  os << walk.dim() << ' ' << walk.length();
  for (int i = 0; i < walk.dim(); ++i) os << ' ' << walk.start().c[i];
  os << '\n';
  const auto& st = walk.steps();
  for (std::size_t k = 0; k < st.size(); ++k) {
    os << int(st[k]);
    os << (((k + 1) % 64 == 0 || k + 1 == st.size()) ? '\n' : ' ');
  }
}

WalkPath read_snapshot(std::istream& is) {
  int d = 0;
  long long N = -1;
  if (!(is >> d >> N)) throw InvalidInput("snapshot header is malformed");
  check_dim(d);
  require(N >= 0, "snapshot step count is negative");
  Site start;
  for (int i = 0; i < d; ++i)
    if (!(is >> start.c[i])) throw InvalidInput("snapshot start coordinates are malformed");
  std::vector<std::uint8_t> steps;
  steps.reserve(static_cast<std::size_t>(N));
  for (long long k = 0; k < N; ++k) {
    int code;
    if (!(is >> code)) throw InvalidInput("snapshot ended after " + std::to_string(k) + " steps");
    require(code >= 0 && code < 2 * d, "snapshot direction code out of range");
    steps.push_back(static_cast<std::uint8_t>(code));
  }
  return WalkPath(d, start, std::move(steps));
}

void for_each_path(int d, std::size_t N, const std::function<void(const std::vector<std::uint8_t>&)>& fn) {
  check_dim(d);
  std::vector<std::uint8_t> steps(N, 0);
  const int q = 2 * d;
  while (true) {
    fn(steps);
    std::size_t i = N;
    while (i > 0) {
      --i;
      if (++steps[i] < q) break;
      steps[i] = 0;
      if (i == 0) return;
    }
    if (N == 0) return;
  }
}

}  // namespace rangewalk
