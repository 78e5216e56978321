#include "quasidiff/measures.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "quasidiff/cell_grid.hpp"
#include "quasidiff/error.hpp"

namespace quasidiff {

namespace {

using Key = std::array<std::int64_t, kMaxDim>;

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 0x100000001b3ull;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Accumulates difference vectors into representatives that are pairwise at
// least tol apart. The first vector landing near no representative becomes one.
class Bucketer {
 public:
  Bucketer(int dim, double tol) : d_(static_cast<std::size_t>(dim)), tol_(tol) {}

  void add(const double* v) {
    Key k{};
    if (tol_ == 0.0) {
      for (std::size_t a = 0; a < d_; ++a) {
        const double c = v[a] == 0.0 ? 0.0 : v[a];  // fold -0 into +0
        k[a] = std::bit_cast<std::int64_t>(c);
      }
      auto& bucket = cells_[k];
      if (bucket.empty()) bucket.push_back(new_rep(v));
      counts_[bucket.front()] += 1.0;
      return;
    }
    for (std::size_t a = 0; a < d_; ++a) k[a] = static_cast<std::int64_t>(std::floor(v[a] / tol_));
    std::size_t best = SIZE_MAX;
    double best_dist = 0.0;
    Key off{};
    for (std::size_t a = 0; a < d_; ++a) off[a] = -1;
    while (true) {
      Key nk = k;
      for (std::size_t a = 0; a < d_; ++a) nk[a] += off[a];
      if (auto it = cells_.find(nk); it != cells_.end()) {
        for (std::uint32_t idx : it->second) {
          const double dd = distance(std::span<const double>(v, d_),
                                     std::span<const double>(reps_.data() + idx * d_, d_));
          if (dd < tol_ && (best == SIZE_MAX || idx < best)) {
            best = idx;
            best_dist = dd;
          }
        }
      }
      std::size_t a = 0;
      while (a < d_ && ++off[a] > 1) off[a++] = -1;
      if (a == d_) break;
    }
    if (best == SIZE_MAX) {
      cells_[k].push_back(new_rep(v));
      counts_.back() += 1.0;
      return;
    }
    counts_[best] += 1.0;
    if (best_dist > 0.0) ++merges_;
  }

  AtomicMeasure finish(int dim, double scale) && {
    std::vector<cplx> w(counts_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = counts_[i] * scale;
    return AtomicMeasure(dim, std::move(reps_), std::move(w), tol_, merges_);
  }

 private:
  std::uint32_t new_rep(const double* v) {
    reps_.insert(reps_.end(), v, v + d_);
    counts_.push_back(0.0);
    return static_cast<std::uint32_t>(counts_.size() - 1);
  }

  std::size_t d_;
  double tol_;
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
  std::vector<double> reps_;
  std::vector<double> counts_;
  std::size_t merges_ = 0;
};

double real_mass(const AtomicMeasure& mu, const Ball& b, bool closed) {
  double m = 0.0;
  auto [lo, hi] = mu.first_axis_range(b.center[0] - b.radius, b.center[0] + b.radius);
  for (std::size_t i = lo; i < hi; ++i) {
    const double dd = distance(mu.location(i), b.center);
    if (closed ? dd <= b.radius : dd < b.radius) m += mu.weight(i).real();
  }
  return m;
}

}  // namespace

AtomicMeasure::AtomicMeasure(int dim, std::vector<double> locations, std::vector<cplx> weights,
                             double bucket_tol, std::size_t merges)
    : dim_(dim), bucket_tol_(bucket_tol), merges_(merges) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::invalid_argument, "unsupported dimension");
  const auto d = static_cast<std::size_t>(dim);
  require(locations.size() == weights.size() * d, ErrorCode::invalid_argument,
          "locations and weights disagree in length");
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less({locations.data() + a * d, d}, {locations.data() + b * d, d});
  });
  for (std::size_t i : order) {
    const double* loc = locations.data() + i * d;
    if (!weights_.empty() &&
        std::equal(loc, loc + d, locations_.end() - static_cast<std::ptrdiff_t>(d))) {
      weights_.back() += weights[i];
    } else {
      locations_.insert(locations_.end(), loc, loc + d);
      weights_.push_back(weights[i]);
    }
  }
  // Drop atoms whose weight is exactly zero.
  std::size_t out = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] == cplx(0.0)) continue;
    std::copy_n(locations_.begin() + static_cast<std::ptrdiff_t>(i * d), d,
                locations_.begin() + static_cast<std::ptrdiff_t>(out * d));
    weights_[out++] = weights_[i];
  }
  weights_.resize(out);
  locations_.resize(out * d);
}

cplx AtomicMeasure::total_mass() const {
  cplx s = 0.0;
  for (auto w : weights_) s += w;
  return s;
}

AtomicMeasure AtomicMeasure::scaled(cplx c) const {
  std::vector<cplx> w(weights_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = weights_[i] * c;
  return AtomicMeasure(dim_, locations_, std::move(w), bucket_tol_, merges_);
}

std::pair<std::size_t, std::size_t> AtomicMeasure::first_axis_range(double lo, double hi) const {
  const auto d = static_cast<std::size_t>(dim_);
  const std::size_t n = size();
  auto first = [&](std::size_t i) { return locations_[i * d]; };
  std::size_t a = 0, b = n;
  while (a < b) {
    const std::size_t m = (a + b) / 2;
    if (first(m) < lo) a = m + 1; else b = m;
  }
  std::size_t c = a, e = n;
  while (c < e) {
    const std::size_t m = (c + e) / 2;
    if (first(m) <= hi) c = m + 1; else e = m;
  }
  return {a, c};
}

cplx AtomicMeasure::weight_at(std::span<const double> loc, double tol) const {
  auto [lo, hi] = first_axis_range(loc[0] - tol, loc[0] + tol);
  cplx s = 0.0;
  for (std::size_t i = lo; i < hi; ++i)
    if (distance(location(i), loc) <= tol) s += weights_[i];
  return s;
}

TestFunction::TestFunction(std::vector<double> c, double r, double amp)
    : center(std::move(c)), radius(r), amplitude(amp) {
  require(!center.empty() && center.size() <= static_cast<std::size_t>(kMaxDim),
          ErrorCode::invalid_argument, "tent centre has unsupported dimension");
  require(radius > 0.0 && std::isfinite(radius), ErrorCode::invalid_argument,
          "tent radius must be positive");
}

double TestFunction::operator()(std::span<const double> x) const {
  return amplitude * std::max(0.0, 1.0 - distance(x, center) / radius);
}

TestFamily TestFamily::tent_grid(std::vector<double> lo, std::vector<double> hi, int count,
                                 double radius, double amplitude) {
  require(!lo.empty() && lo.size() == hi.size() && lo.size() <= static_cast<std::size_t>(kMaxDim),
          ErrorCode::invalid_argument, "region corners must share a supported dimension");
  require(count >= 1, ErrorCode::invalid_argument, "need at least one tent per axis");
  const std::size_t d = lo.size();
  for (std::size_t a = 0; a < d; ++a)
    require(hi[a] - lo[a] >= 2 * radius, ErrorCode::invalid_argument,
            "region too narrow for the tent radius");
  TestFamily fam;
  fam.region_lo = lo;
  fam.region_hi = hi;
  const double width = hi[0] - lo[0] - 2 * radius;
  fam.resolution = count > 1 ? width / (count - 1) : 0.0;
  std::vector<int> idx(d, 0);
  while (true) {
    std::vector<double> c(d);
    for (std::size_t a = 0; a < d; ++a) {
      const double span = hi[a] - lo[a] - 2 * radius;
      c[a] = count > 1 ? lo[a] + radius + span * idx[a] / (count - 1) : 0.5 * (lo[a] + hi[a]);
    }
    fam.members.emplace_back(std::move(c), radius, amplitude);
    std::size_t a = 0;
    while (a < d && ++idx[a] == count) idx[a++] = 0;
    if (a == d) break;
  }
  return fam;
}

TestFamily TestFamily::at_points(int dim, std::span<const double> centers, double radius,
                                 double amplitude) {
  const auto d = static_cast<std::size_t>(dim);
  require(!centers.empty() && centers.size() % d == 0, ErrorCode::invalid_argument,
          "need at least one tent centre");
  TestFamily fam;
  fam.region_lo.assign(d, INFINITY);
  fam.region_hi.assign(d, -INFINITY);
  for (std::size_t i = 0; i < centers.size() / d; ++i) {
    std::vector<double> c(centers.begin() + static_cast<std::ptrdiff_t>(i * d),
                          centers.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    for (std::size_t a = 0; a < d; ++a) {
      fam.region_lo[a] = std::min(fam.region_lo[a], c[a] - radius);
      fam.region_hi[a] = std::max(fam.region_hi[a], c[a] + radius);
    }
    fam.members.emplace_back(std::move(c), radius, amplitude);
  }
  return fam;
}

std::string TestFamily::describe() const {
  std::ostringstream os;
  os << members.size() << " tents of radius " << (members.empty() ? 0.0 : members[0].radius)
     << " on [";
  for (std::size_t a = 0; a < region_lo.size(); ++a) os << (a ? "," : "") << region_lo[a];
  os << "]..[";
  for (std::size_t a = 0; a < region_hi.size(); ++a) os << (a ? "," : "") << region_hi[a];
  os << "]";
  if (resolution > 0) os << " spacing " << resolution;
  return os.str();
}

AtomicMeasure dirac_comb(const PointSet& x) {
  return AtomicMeasure(x.dim(), std::vector<double>(x.coords().begin(), x.coords().end()),
                       std::vector<cplx>(x.size(), 1.0), 0.0);
}

AtomicMeasure autocorrelation(const PointSet& x, double L, double bucket_tol,
                              std::optional<double> max_lag) {
  require(L > 0.0, ErrorCode::invalid_argument, "L must be positive");
  require(bucket_tol >= 0.0, ErrorCode::invalid_argument, "bucket_tol must be nonnegative");
  if (x.sep_radius() > 0.0)
    require(bucket_tol <= x.sep_radius() / 4, ErrorCode::invalid_argument,
            "bucket_tol exceeds r0/4");
  if (max_lag) require(*max_lag >= 0.0, ErrorCode::invalid_argument, "max_lag must be >= 0");
  const PointSet w = window(x, L);
  const int dim = x.dim();
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t n = w.size();
  Bucketer acc(dim, bucket_tol);
  std::array<double, kMaxDim> diff{};
  auto emit = [&](std::size_t i, std::size_t j) {
    for (std::size_t a = 0; a < d; ++a) diff[a] = w[i][a] - w[j][a];
    acc.add(diff.data());
  };
  if (!max_lag) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) emit(i, j);
  } else if (dim == 1) {
    // Rows are sorted, so the partners of i form a contiguous run.
    std::size_t lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (w[i][0] - w[lo][0] > *max_lag) ++lo;
      for (std::size_t j = lo; j < n && w[j][0] - w[i][0] <= *max_lag; ++j) emit(i, j);
    }
  } else {
    CellGrid grid(dim, w.coords(), std::max(*max_lag, CellGrid::suggest_cell_size(dim, w.coords())));
    std::vector<std::size_t> partners;
    for (std::size_t i = 0; i < n; ++i) {
      partners.clear();
      grid.for_each_in_ball(w[i], *max_lag, [&](std::size_t j, double) { partners.push_back(j); });
      std::sort(partners.begin(), partners.end());
      for (std::size_t j : partners) emit(i, j);
    }
  }
  return std::move(acc).finish(dim, 1.0 / std::pow(L, dim));
}

cplx pair(const AtomicMeasure& mu, const TestFunction& f) {
  if (mu.empty()) return 0.0;
  require(f.center.size() == static_cast<std::size_t>(mu.dim()), ErrorCode::invalid_argument,
          "test function and measure differ in dimension");
  auto [lo, hi] = mu.first_axis_range(f.center[0] - f.radius, f.center[0] + f.radius);
  cplx s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double v = f(mu.location(i));
    if (v != 0.0) s += mu.weight(i) * v;
  }
  return s;
}

cplx fourier_sum(const AtomicMeasure& mu, std::span<const double> lambda) {
  require(lambda.size() == static_cast<std::size_t>(mu.dim()), ErrorCode::invalid_argument,
          "frequency and measure differ in dimension");
  constexpr double kTwoPi = 6.283185307179586476925;
  double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0;
  auto add = [](double& sum, double& comp, double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto v = mu.location(i);
    double x = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a) x += v[a] * lambda[a];
    const double r = x - std::round(x);
    const cplx term = mu.weight(i) * cplx(std::cos(kTwoPi * r), -std::sin(kTwoPi * r));
    add(re, cre, term.real());
    add(im, cim, term.imag());
  }
  return {re, im};
}

double tv_on_ball(const AtomicMeasure& mu, std::span<const double> center, double radius) {
  if (mu.empty()) return 0.0;
  auto [lo, hi] = mu.first_axis_range(center[0] - radius, center[0] + radius);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i)
    if (distance(mu.location(i), center) <= radius) s += std::abs(mu.weight(i));
  return s;
}

double vague_gap(const AtomicMeasure& mu, const AtomicMeasure& nu, const TestFamily& family) {
  require(!family.members.empty(), ErrorCode::invalid_argument, "test family is empty");
  double gap = 0.0;
  for (const auto& f : family.members) gap = std::max(gap, std::abs(pair(mu, f) - pair(nu, f)));
  return gap;
}

double uniform_tv_bound(int dim, double r0, double radius) {
  require(r0 > 0.0, ErrorCode::not_uniformly_discrete, "bound needs a positive separation");
  // Disjoint r0/2 balls around the points fit inside B(radius + r0/2).
  return std::pow((2.0 * radius + r0) / r0, dim);
}

bool PortmanteauReport::all_pass() const {
  for (const auto& e : compacts) if (!e.pass) return false;
  for (const auto& e : opens) if (!e.pass) return false;
  return true;
}

PortmanteauReport portmanteau_check(const std::vector<AtomicMeasure>& seq,
                                    const AtomicMeasure& limit, const std::vector<Ball>& compacts,
                                    const std::vector<Ball>& opens, double tol) {
  require(seq.size() >= 2, ErrorCode::invalid_argument, "sequence needs at least two measures");
  PortmanteauReport rep;
  rep.tail_start = seq.size() / 2;
  for (const auto& k : compacts) {
    PortmanteauReport::Entry e{k, real_mass(limit, k, true), -INFINITY, false};
    for (std::size_t n = rep.tail_start; n < seq.size(); ++n)
      e.tail_extreme = std::max(e.tail_extreme, real_mass(seq[n], k, true));
    e.pass = e.tail_extreme <= e.limit_mass + tol;
    rep.compacts.push_back(std::move(e));
  }
  for (const auto& g : opens) {
    PortmanteauReport::Entry e{g, real_mass(limit, g, false), INFINITY, false};
    for (std::size_t n = rep.tail_start; n < seq.size(); ++n)
      e.tail_extreme = std::min(e.tail_extreme, real_mass(seq[n], g, false));
    e.pass = e.limit_mass <= e.tail_extreme + tol;
    rep.opens.push_back(std::move(e));
  }
  return rep;
}

}  // namespace quasidiff
