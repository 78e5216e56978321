#include "quasidiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "quasidiff/cell_grid.hpp"
#include "quasidiff/error.hpp"

namespace quasidiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_extent(const PointSet& x, const PointSet& y, double radius) {
  require(radius <= x.extent() && radius <= y.extent(), ErrorCode::insufficient_extent,
          "radius " + std::to_string(radius) + " exceeds the extent of '" + x.label() + "' or '" +
              y.label() + "'");
}

void require_same_dim(const PointSet& x, const PointSet& y) {
  require(x.dim() == y.dim(), ErrorCode::invalid_argument, "dimension mismatch");
}

double grid_cell(const PointSet& s) {
  return s.sep_radius() > 0.0 ? s.sep_radius() : CellGrid::suggest_cell_size(s.dim(), s.coords());
}

// For one direction (points of `from` against windows of `to`): point p is
// mismatched at radius L exactly when |p| <= L < T_p, where T_p is the
// smallest norm of a point of `to` strictly closer than eps to p (eps == 0:
// equal to p). Stores the interval [|p|, max(|p|, T_p)) per point.
class DirectedMismatch {
 public:
  DirectedMismatch(const PointSet& from, const PointSet& to, double cell)
      : from_(from), to_(to), to_norms_(to.size()) {
    for (std::size_t i = 0; i < to.size(); ++i) to_norms_[i] = norm(to[i]);
    if (!to.empty()) grid_.emplace(to.dim(), to.coords(), cell);
  }

  void intervals(double eps, double max_radius, std::vector<double>& starts,
                 std::vector<double>& ends) const {
    for (std::size_t i = 0; i < from_.size(); ++i) {
      auto p = from_[i];
      const double s = norm(p);
      if (s > max_radius) continue;
      double t = kInf;
      if (grid_) {
        grid_->for_each_in_ball(p, eps, [&](std::size_t j, double dd) {
          if (eps == 0.0 ? dd == 0.0 : dd < eps) t = std::min(t, to_norms_[j]);
        });
      }
      starts.push_back(s);
      ends.push_back(std::max(s, t));
    }
  }

 private:
  const PointSet& from_;
  const PointSet& to_;
  std::vector<double> to_norms_;
  std::optional<CellGrid> grid_;
};

// Symmetric mismatch counts #A_XY + #A_YX for every radius of a grid.
class MismatchCounter {
 public:
  MismatchCounter(const PointSet& x, const PointSet& y, double cell)
      : xy_(x, y, cell), yx_(y, x, cell) {}

  std::vector<std::size_t> counts(double eps, const std::vector<double>& radii) const {
    std::vector<double> starts, ends;
    const double max_radius = radii.empty() ? 0.0 : radii.back();
    xy_.intervals(eps, max_radius, starts, ends);
    yx_.intervals(eps, max_radius, starts, ends);
    std::sort(starts.begin(), starts.end());
    std::sort(ends.begin(), ends.end());
    std::vector<std::size_t> out;
    out.reserve(radii.size());
    for (double r : radii) {
      const auto opened = std::upper_bound(starts.begin(), starts.end(), r) - starts.begin();
      const auto closed = std::upper_bound(ends.begin(), ends.end(), r) - ends.begin();
      out.push_back(static_cast<std::size_t>(opened - closed));
    }
    return out;
  }

 private:
  DirectedMismatch xy_;
  DirectedMismatch yx_;
};

MetricResult sup_ratio(const std::vector<std::size_t>& counts, const LGrid& grid, double exponent) {
  MetricResult r;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double L = grid.values()[i];
    const double v = static_cast<double>(counts[i]) / std::pow(L, exponent);
    if (!r.attained_L || v > r.value) {
      r.value = v;
      r.attained_L = L;
    }
  }
  return r;
}

// Points of s sorted by norm, as a row-major array plus the sorted norms.
struct NormOrdered {
  std::vector<double> coords;
  std::vector<double> norms;

  explicit NormOrdered(const PointSet& s) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> n(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) n[i] = norm(s[i]);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return n[a] < n[b]; });
    for (std::size_t i : order) {
      norms.push_back(n[i]);
      auto p = s[i];
      coords.insert(coords.end(), p.begin(), p.end());
    }
  }

  std::span<const double> window(double radius, int dim) const {
    const auto k = static_cast<std::size_t>(std::upper_bound(norms.begin(), norms.end(), radius) -
                                            norms.begin());
    return std::span<const double>(coords).first(k * static_cast<std::size_t>(dim));
  }
};

double directed_hausdorff(int dim, std::span<const double> from, std::span<const double> to) {
  const auto d = static_cast<std::size_t>(dim);
  CellGrid grid(dim, to, CellGrid::suggest_cell_size(dim, to));
  double worst = 0.0;
  for (std::size_t i = 0; i < from.size() / d; ++i) {
    auto nb = grid.nearest(from.subspan(i * d, d));
    worst = std::max(worst, nb->dist);
  }
  return worst;
}

}  // namespace

LGrid::LGrid(std::vector<double> values, double l_min) : values_(std::move(values)) {
  require(!values_.empty(), ErrorCode::invalid_argument, "L grid must be nonempty");
  require(values_.front() >= l_min, ErrorCode::invalid_argument,
          "L grid starts below L_min = " + std::to_string(l_min));
  for (std::size_t i = 1; i < values_.size(); ++i) {
    require(values_[i] > values_[i - 1], ErrorCode::invalid_argument,
            "L grid must be strictly increasing");
  }
}

LGrid LGrid::integers(long lo, long hi) {
  require(lo >= 1 && hi >= lo, ErrorCode::invalid_argument, "need 1 <= lo <= hi");
  std::vector<double> v;
  for (long k = lo; k <= hi; ++k) v.push_back(static_cast<double>(k));
  return LGrid(std::move(v), static_cast<double>(lo));
}

std::size_t MismatchSets::count_xy() const { return xy.size() / static_cast<std::size_t>(dim); }
std::size_t MismatchSets::count_yx() const { return yx.size() / static_cast<std::size_t>(dim); }

MismatchSets mismatch_sets(const PointSet& x, const PointSet& y, double radius, double eps) {
  require_same_dim(x, y);
  require_extent(x, y, radius);
  require(eps > 0.0, ErrorCode::invalid_argument, "eps must be positive");
  MismatchSets out;
  out.dim = x.dim();
  auto one_way = [&](const PointSet& from, const PointSet& to, std::vector<double>& sink) {
    const PointSet tw = window(to, radius);
    std::optional<CellGrid> grid;
    if (!tw.empty()) grid.emplace(tw.dim(), tw.coords(), std::max(eps, grid_cell(to)));
    for (std::size_t i = 0; i < from.size(); ++i) {
      auto p = from[i];
      if (norm(p) > radius) continue;
      bool matched = false;
      if (grid) {
        grid->for_each_in_ball(p, eps, [&](std::size_t, double dd) { matched |= dd < eps; });
      }
      if (!matched) sink.insert(sink.end(), p.begin(), p.end());
    }
  };
  one_way(x, y, out.xy);
  one_way(y, x, out.yx);
  return out;
}

MetricResult ratio_sup(const PointSet& x, const PointSet& y, double eps, double exponent,
                       const LGrid& grid) {
  require_same_dim(x, y);
  require_extent(x, y, grid.back());
  require(eps > 0.0, ErrorCode::invalid_argument, "eps must be positive");
  require(exponent > 0.0 && exponent <= x.dim(), ErrorCode::invalid_argument,
          "exponent must lie in (0, d]");
  const double cell = std::max(eps, std::max(grid_cell(x), grid_cell(y)));
  MismatchCounter counter(x, y, cell);
  auto r = sup_ratio(counter.counts(eps, grid.values()), grid, exponent);
  r.attained_eps = eps;
  return r;
}

MetricResult rho_stat(const PointSet& x, const PointSet& y, const LGrid& grid, double exponent,
                      double eps_tol) {
  require_same_dim(x, y);
  require(x.sep_radius() > 0.0 && y.sep_radius() > 0.0, ErrorCode::not_uniformly_discrete,
          "rho_stat needs positive separation radii");
  require_extent(x, y, grid.back());
  require(eps_tol > 0.0, ErrorCode::invalid_argument, "eps_tol must be positive");
  require(exponent > 0.0 && exponent <= x.dim(), ErrorCode::invalid_argument,
          "exponent must lie in (0, d]");

  const double cap = 0.5 * std::min(x.sep_radius(), y.sep_radius());
  MismatchCounter counter(x, y, std::max(grid_cell(x), grid_cell(y)));
  auto at = [&](double eps) { return sup_ratio(counter.counts(eps, grid.values()), grid, exponent); };
  // Feasibility "sup ratio < eps" is monotone: the ratio never increases with eps.
  auto feasible = [&](double eps) { return at(eps).value < eps; };

  const MetricResult exact = at(0.0);
  if (exact.value == 0.0) {
    MetricResult r;
    r.attained_L = exact.attained_L;
    r.attained_eps = 0.0;
    return r;
  }
  if (!feasible(cap)) {
    MetricResult r = at(cap);
    r.value = cap;
    r.attained_eps = cap;
    r.capped = true;
    return r;
  }
  double lo = 0.0, hi = cap;
  while (hi - lo > eps_tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  MetricResult r = at(hi);
  r.value = hi;
  r.attained_eps = hi;
  return r;
}

double hausdorff_distance(int dim, std::span<const double> a, std::span<const double> b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return kInf;
  return std::max(directed_hausdorff(dim, a, b), directed_hausdorff(dim, b, a));
}

double hausdorff_distance(const PointSet& a, const PointSet& b) {
  require_same_dim(a, b);
  return hausdorff_distance(a.dim(), a.coords(), b.coords());
}

MetricResult rho_gh(const PointSet& x, const PointSet& y, double eps_tol) {
  require_same_dim(x, y);
  require(eps_tol > 0.0 && eps_tol <= 0.25, ErrorCode::invalid_argument,
          "eps_tol must lie in (0, 1/4]");
  const double widest = 1.0 / eps_tol;
  require_extent(x, y, widest);

  const int d = x.dim();
  const NormOrdered xs(x), ys(y);
  MetricResult r;
  // Identical data on the common extent: every window agrees.
  const double common = std::min(x.extent(), y.extent());
  {
    auto a = xs.window(common, d), b = ys.window(common, d);
    if (a.size() == b.size() && hausdorff_distance(d, a, b) == 0.0) {
      r.attained_eps = 0.0;
      return r;
    }
  }
  // Feasibility in eps is not monotone, so scan every grid value upward.
  const auto steps = static_cast<long>(std::floor(0.25 / eps_tol + 1e-9));
  for (long k = 1; k <= steps; ++k) {
    const double eps = static_cast<double>(k) * eps_tol;
    const double radius = 1.0 / eps;
    const double dh = hausdorff_distance(d, xs.window(radius, d), ys.window(radius, d));
    if (dh <= eps) {
      r.value = std::min(0.25, eps);
      r.attained_eps = eps;
      r.attained_L = radius;
      return r;
    }
  }
  r.value = 0.25;
  r.capped = true;
  return r;
}

MetricResult rho_aut(const PointSet& x, const PointSet& y, const LGrid& grid, AutMode mode,
                     double tail_start) {
  require_same_dim(x, y);
  require_extent(x, y, grid.back());
  // Norms of the symmetric difference, by sorted merge of the canonical orders.
  std::vector<double> diff;
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && lex_less(x[i], y[j]))) {
      diff.push_back(norm(x[i++]));
    } else if (i == x.size() || lex_less(y[j], x[i])) {
      diff.push_back(norm(y[j++]));
    } else {
      ++i, ++j;
    }
  }
  std::sort(diff.begin(), diff.end());
  std::vector<double> radii, ratios;
  for (double L : grid.values()) {
    if (mode == AutMode::tail_limsup && L < tail_start) continue;
    const auto c = std::upper_bound(diff.begin(), diff.end(), L) - diff.begin();
    radii.push_back(L);
    ratios.push_back(static_cast<double>(c) / std::pow(L, x.dim()));
  }
  require(!radii.empty(), ErrorCode::invalid_argument, "no grid values at or beyond tail_start");
  MetricResult r;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!r.attained_L || ratios[k] > r.value) {
      r.value = ratios[k];
      r.attained_L = radii[k];
    }
  }
  if (mode == AutMode::tail_limsup) {
    // Compare the running maxima of the two halves of the tail.
    const std::size_t half = radii.size() / 2;
    const double first = *std::max_element(ratios.begin(), ratios.begin() + std::max<std::size_t>(half, 1));
    const double second = *std::max_element(ratios.begin() + half, ratios.end());
    r.trend = second < first ? "decreasing" : (second > first ? "increasing" : "flat");
  }
  return r;
}

}  // namespace quasidiff
