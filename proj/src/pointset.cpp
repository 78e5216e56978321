#include "quasidiff/pointset.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "quasidiff/cell_grid.hpp"
#include "quasidiff/error.hpp"
#include "quasidiff/rng.hpp"

namespace quasidiff {

namespace {

constexpr double kTau = 1.6180339887498948482;

// Sorts rows of a row-major array lexicographically.
std::vector<double> sorted_rows(int dim, const std::vector<double>& coords) {
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t n = coords.size() / d;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row = [&](std::size_t i) { return std::span<const double>(coords.data() + i * d, d); };
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return lex_less(row(a), row(b)); });
  std::vector<double> out;
  out.reserve(coords.size());
  for (std::size_t i : order) {
    auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

std::string fmt(double v) { return std::to_string(v); }

// Calls visit(z) for every integer vector z with (z - c)^T G (z - c) <= r2.
// G must be symmetric positive definite.
void enumerate_ellipsoid(const Eigen::MatrixXd& gram, const Eigen::VectorXd& center, double r2,
                         const std::function<void(const std::vector<long>&)>& visit) {
  const int n = static_cast<int>(gram.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  require(llt.info() == Eigen::Success, ErrorCode::invalid_argument,
          "projection matrix is degenerate");
  const Eigen::MatrixXd u = llt.matrixU();
  std::vector<long> z(static_cast<std::size_t>(n), 0);

  std::function<void(int, double)> descend = [&](int i, double used) {
    double shift = 0.0;
    for (int j = i + 1; j < n; ++j) shift += u(i, j) * (static_cast<double>(z[j]) - center(j));
    shift /= u(i, i);
    const double room = r2 - used;
    if (room < 0.0) return;
    const double half = std::sqrt(room) / u(i, i);
    const double mid = center(i) - shift;
    const long lo = static_cast<long>(std::ceil(mid - half));
    const long hi = static_cast<long>(std::floor(mid + half));
    for (long v = lo; v <= hi; ++v) {
      z[static_cast<std::size_t>(i)] = v;
      const double t = u(i, i) * (static_cast<double>(v) - center(i) + shift);
      if (i == 0) {
        visit(z);
      } else {
        descend(i - 1, used + t * t);
      }
    }
  };
  descend(n - 1, 0.0);
}

bool inside_window(const InternalWindow& w, const Eigen::VectorXd& y) {
  if (const auto* box = std::get_if<BoxWindow>(&w)) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!(box->lo[k] <= y(i) && y(i) < box->hi[k])) return false;
    }
    return true;
  }
  const auto& poly = std::get<PolygonWindow>(w).vertices;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    const double cross = (b[0] - a[0]) * (y(1) - a[1]) - (b[1] - a[1]) * (y(0) - a[0]);
    if (cross < 0.0) return false;
  }
  return true;
}

// Center and circumradius of the window.
std::pair<Eigen::VectorXd, double> window_ball(const InternalWindow& w, int m) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  double radius = 0.0;
  if (const auto* box = std::get_if<BoxWindow>(&w)) {
    for (int i = 0; i < m; ++i) {
      const auto k = static_cast<std::size_t>(i);
      c(i) = 0.5 * (box->lo[k] + box->hi[k]);
      radius += 0.25 * (box->hi[k] - box->lo[k]) * (box->hi[k] - box->lo[k]);
    }
    return {c, std::sqrt(radius)};
  }
  const auto& poly = std::get<PolygonWindow>(w).vertices;
  for (const auto& v : poly) {
    c(0) += v[0] / static_cast<double>(poly.size());
    c(1) += v[1] / static_cast<double>(poly.size());
  }
  for (const auto& v : poly) radius = std::max(radius, std::hypot(v[0] - c(0), v[1] - c(1)));
  return {c, radius};
}

void validate_window(const InternalWindow& w, int m) {
  if (const auto* box = std::get_if<BoxWindow>(&w)) {
    require(static_cast<int>(box->lo.size()) == m && static_cast<int>(box->hi.size()) == m,
            ErrorCode::invalid_argument, "window box dimension does not match internal space");
    for (int i = 0; i < m; ++i) {
      const auto k = static_cast<std::size_t>(i);
      require(box->hi[k] > box->lo[k], ErrorCode::invalid_argument,
              "window must have positive volume");
    }
    return;
  }
  const auto& poly = std::get<PolygonWindow>(w).vertices;
  require(m == 2, ErrorCode::invalid_argument, "polygon windows need a 2-D internal space");
  require(poly.size() >= 3, ErrorCode::invalid_argument, "polygon window needs 3+ vertices");
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    area += a[0] * b[1] - a[1] * b[0];
  }
  require(area > 0.0, ErrorCode::invalid_argument,
          "polygon window must be counter-clockwise with positive area");
}

}  // namespace

PointSet::PointSet(int dim, std::vector<double> coords, double sep_radius, double extent,
                   std::string label)
    : dim_(dim), sep_radius_(sep_radius), extent_(extent), label_(std::move(label)) {
  require(dim >= 1, ErrorCode::invalid_argument, "dimension must be positive");
  require(coords.size() % static_cast<std::size_t>(dim) == 0, ErrorCode::invalid_argument,
          "coordinate count is not a multiple of the dimension");
  require(sep_radius >= 0.0 && std::isfinite(sep_radius), ErrorCode::invalid_argument,
          "separation radius must be finite and nonnegative");
  require(extent >= 0.0, ErrorCode::invalid_argument, "extent must be nonnegative");
  coords_ = sorted_rows(dim, coords);
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    require(norm((*this)[i]) <= extent_, ErrorCode::invalid_argument,
            "point outside the extent ball in set '" + label_ + "'");
    if (i > 0) {
      require(lex_less((*this)[i - 1], (*this)[i]), ErrorCode::duplicate_point,
              "repeated point in set '" + label_ + "'");
    }
  }
}

PointSet PointSet::relabeled(std::string label) const {
  PointSet out = *this;
  out.label_ = std::move(label);
  return out;
}

PointSet PointSet::with_sep_radius(double r0) const {
  require(r0 >= 0.0, ErrorCode::invalid_argument, "separation radius must be nonnegative");
  PointSet out = *this;
  out.sep_radius_ = r0;
  return out;
}

CutProjectConfig CutProjectConfig::lattice(int dim, double extent) {
  CutProjectConfig cfg;
  cfg.physical_rows = Eigen::MatrixXd::Identity(dim, dim);
  cfg.internal_rows = Eigen::MatrixXd(0, dim);
  cfg.window = BoxWindow{};
  cfg.offset = Eigen::VectorXd::Zero(dim);
  cfg.extent = extent;
  cfg.label = "cps-lattice";
  return cfg;
}

CutProjectConfig CutProjectConfig::fibonacci(double extent) {
  CutProjectConfig cfg;
  cfg.physical_rows = Eigen::MatrixXd(1, 2);
  cfg.physical_rows << kTau, 1.0;
  cfg.internal_rows = Eigen::MatrixXd(1, 2);
  cfg.internal_rows << -1.0, kTau;
  // Internal image of the unit square.
  cfg.window = BoxWindow{{-1.0}, {kTau}};
  cfg.offset = Eigen::VectorXd::Zero(2);
  cfg.extent = extent;
  cfg.label = "cps-fibonacci";
  return cfg;
}

CutProjectConfig CutProjectConfig::ammann_beenker(double extent) {
  const double c = std::sqrt(0.5);
  CutProjectConfig cfg;
  cfg.physical_rows = Eigen::MatrixXd(2, 4);
  cfg.physical_rows << 1.0, c, 0.0, -c,
                       0.0, c, 1.0, c;
  cfg.internal_rows = Eigen::MatrixXd(2, 4);
  cfg.internal_rows << 1.0, -c, 0.0, c,
                       0.0, c, -1.0, c;
  // Regular octagon with unit edges centred at the origin.
  PolygonWindow oct;
  const double radius = 0.5 / std::sin(M_PI / 8.0);
  for (int k = 0; k < 8; ++k) {
    const double a = M_PI / 8.0 + k * M_PI / 4.0;
    oct.vertices.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  cfg.window = oct;
  // Purely internal shift, keeps the origin a point and avoids window edges.
  const Eigen::Vector2d shift(1.234567e-3, 2.345678e-3);
  cfg.offset = 0.5 * cfg.internal_rows.transpose() * shift;
  cfg.extent = extent;
  cfg.label = "ammann-beenker";
  return cfg;
}

PointSet gen_lattice(int dim, double spacing, double extent) {
  require(dim >= 1, ErrorCode::invalid_argument, "dimension must be positive");
  require(spacing > 0.0, ErrorCode::invalid_argument, "spacing must be positive");
  require(extent > 0.0, ErrorCode::invalid_argument, "extent must be positive");
  const auto m = static_cast<long>(std::floor(extent / spacing));
  std::vector<double> coords;
  std::vector<long> idx(static_cast<std::size_t>(dim), -m);
  std::vector<double> p(static_cast<std::size_t>(dim));
  while (true) {
    for (std::size_t i = 0; i < idx.size(); ++i) p[i] = spacing * static_cast<double>(idx[i]);
    if (norm(p) <= extent) coords.insert(coords.end(), p.begin(), p.end());
    std::size_t axis = 0;
    while (axis < idx.size() && ++idx[axis] > m) {
      idx[axis] = -m;
      ++axis;
    }
    if (axis == idx.size()) break;
  }
  return PointSet(dim, std::move(coords), spacing, extent, "lattice");
}

PointSet gen_cut_project(const CutProjectConfig& cfg) {
  const int n = cfg.total_dim();
  const int d = cfg.dim();
  const int m = static_cast<int>(cfg.internal_rows.rows());
  require(d >= 1 && n >= d, ErrorCode::invalid_argument, "need n >= d >= 1");
  require(m == n - d && (m == 0 || cfg.internal_rows.cols() == n), ErrorCode::invalid_argument,
          "internal projection must be (n-d) x n");
  require(cfg.offset.size() == n, ErrorCode::invalid_argument, "offset must have n entries");
  require(cfg.extent > 0.0, ErrorCode::invalid_argument, "extent must be positive");

  Eigen::MatrixXd stacked(n, n);
  stacked.topRows(d) = cfg.physical_rows;
  if (m > 0) stacked.bottomRows(m) = cfg.internal_rows;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const auto& sv = svd.singularValues();
  require(sv(n - 1) > 0.0 && sv(0) / sv(n - 1) < 1e12, ErrorCode::invalid_argument,
          "projection matrix is degenerate");
  if (m > 0) validate_window(cfg.window, m);

  // Bounding ellipsoid of { u : |P u| <= R, Q u in W }.
  const double r = cfg.extent;
  Eigen::MatrixXd gram = cfg.physical_rows.transpose() * cfg.physical_rows / (r * r);
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(n);
  double constant = 0.0;
  if (m > 0) {
    const auto [wc, wr] = window_ball(cfg.window, m);
    gram += cfg.internal_rows.transpose() * cfg.internal_rows / (wr * wr);
    lin = cfg.internal_rows.transpose() * wc / (wr * wr);
    constant = wc.squaredNorm() / (wr * wr);
  }
  const Eigen::VectorXd u0 = gram.ldlt().solve(lin);
  const double r2 = 2.0 - constant + lin.dot(u0) + 1e-9;
  const Eigen::VectorXd z0 = u0 - cfg.offset;

  std::vector<double> coords;
  Eigen::VectorXd u(n);
  std::vector<double> x(static_cast<std::size_t>(d));
  enumerate_ellipsoid(gram, z0, r2, [&](const std::vector<long>& z) {
    for (int i = 0; i < n; ++i) u(i) = static_cast<double>(z[static_cast<std::size_t>(i)]) + cfg.offset(i);
    if (m > 0 && !inside_window(cfg.window, cfg.internal_rows * u)) return;
    const Eigen::VectorXd px = cfg.physical_rows * u;
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = px(i);
    if (norm(x) <= cfg.extent) coords.insert(coords.end(), x.begin(), x.end());
  });
  const double gap = min_gap(d, coords);
  return PointSet(d, std::move(coords), std::isfinite(gap) ? gap : 0.0, cfg.extent, cfg.label);
}

PointSet gen_fibonacci(double extent) {
  require(extent > 0.0, ErrorCode::invalid_argument, "extent must be positive");
  // Right half: fixed point of a->ab, b->a. Left half: left-infinite fixed
  // point of the squared substitution, which ends in a (legal seed a|a).
  auto substitute = [](const std::string& w) {
    std::string out;
    out.reserve(w.size() * 2);
    for (char c : w) out += (c == 'a') ? "ab" : "a";
    return out;
  };
  const auto needed = static_cast<std::size_t>(std::ceil(extent)) + 2;
  std::string right = "a";
  while (right.size() < needed) right = substitute(right);
  std::string left = "a";
  while (left.size() < needed) left = substitute(substitute(left));

  std::vector<double> coords{0.0};
  long na = 0, nb = 0;
  for (char c : right) {
    (c == 'a' ? na : nb) += 1;
    const double x = kTau * static_cast<double>(na) + static_cast<double>(nb);
    if (x > extent) break;
    coords.push_back(x);
  }
  na = nb = 0;
  for (auto it = left.rbegin(); it != left.rend(); ++it) {
    (*it == 'a' ? na : nb) += 1;
    const double x = -(kTau * static_cast<double>(na) + static_cast<double>(nb));
    if (-x > extent) break;
    coords.push_back(x);
  }
  return PointSet(1, std::move(coords), 1.0, extent, "fibonacci");
}

PointSet gen_visible(double extent) {
  require(extent > 0.0, ErrorCode::invalid_argument, "extent must be positive");
  const auto m = static_cast<long>(std::floor(extent));
  std::vector<double> coords;
  for (long a = -m; a <= m; ++a) {
    for (long b = -m; b <= m; ++b) {
      if (std::gcd(a, b) != 1) continue;
      const double p[2] = {static_cast<double>(a), static_cast<double>(b)};
      if (norm(p) <= extent) coords.insert(coords.end(), p, p + 2);
    }
  }
  return PointSet(2, std::move(coords), 1.0, extent, "visible");
}

PointSet gen_poisson(double intensity, int dim, double extent, std::uint64_t seed) {
  require(intensity > 0.0, ErrorCode::invalid_argument, "intensity must be positive");
  require(dim >= 1, ErrorCode::invalid_argument, "dimension must be positive");
  require(extent > 0.0, ErrorCode::invalid_argument, "extent must be positive");
  // Poisson process on the cube [-R, R]^d: first coordinates form a 1-D
  // process of intensity lambda (2R)^(d-1), remaining ones are uniform.
  Stream rng(seed, "poisson", 0);
  const double side = 2.0 * extent;
  const double rate = intensity * std::pow(side, dim - 1);
  std::vector<double> coords;
  std::vector<double> p(static_cast<std::size_t>(dim));
  double t = -extent;
  while (true) {
    t += rng.exponential(rate);
    if (t > extent) break;
    p[0] = t;
    for (std::size_t i = 1; i < p.size(); ++i) p[i] = -extent + side * rng.uniform();
    if (norm(p) <= extent) coords.insert(coords.end(), p.begin(), p.end());
  }
  return PointSet(dim, std::move(coords), 0.0, extent, "poisson");
}

std::size_t count_within(const PointSet& x, double radius) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (norm(x[i]) <= radius) ++c;
  }
  return c;
}

PointSet window(const PointSet& x, double radius) {
  require(radius <= x.extent(), ErrorCode::insufficient_extent,
          "window radius " + fmt(radius) + " exceeds extent " + fmt(x.extent()) + " of '" +
              x.label() + "'");
  require(radius >= 0.0, ErrorCode::invalid_argument, "window radius must be nonnegative");
  std::vector<double> coords;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto p = x[i];
    if (norm(p) <= radius) coords.insert(coords.end(), p.begin(), p.end());
  }
  return PointSet(x.dim(), std::move(coords), x.sep_radius(), radius, x.label());
}

PointSet splice(const PointSet& inner, const PointSet& outer, double radius,
                bool allow_smaller_gap) {
  require(inner.dim() == outer.dim(), ErrorCode::invalid_argument, "dimension mismatch");
  require(radius <= inner.extent() && radius <= outer.extent(), ErrorCode::insufficient_extent,
          "splice radius exceeds an operand extent");
  std::vector<double> coords;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    auto p = inner[i];
    if (norm(p) <= radius) coords.insert(coords.end(), p.begin(), p.end());
  }
  for (std::size_t i = 0; i < outer.size(); ++i) {
    auto p = outer[i];
    if (norm(p) > radius) coords.insert(coords.end(), p.begin(), p.end());
  }
  const double gap = min_gap(inner.dim(), coords);
  const double declared = std::min(inner.sep_radius(), outer.sep_radius());
  if (!allow_smaller_gap) {
    require(gap >= declared * (1.0 - 1e-9), ErrorCode::seam_violation,
            "measured gap " + fmt(gap) + " below declared " + fmt(declared));
  }
  return PointSet(inner.dim(), std::move(coords), std::isfinite(gap) ? gap : declared,
                  outer.extent(), "splice(" + inner.label() + "," + outer.label() + ")");
}

SparseUnion sparse_union(const PointSet& x, const PointSet& extra) {
  require(x.dim() == extra.dim(), ErrorCode::invalid_argument, "dimension mismatch");
  const double ext = std::min(x.extent(), extra.extent());
  std::vector<double> coords;
  std::size_t n_extra = 0;
  for (const PointSet* s : {&x, &extra}) {
    for (std::size_t i = 0; i < s->size(); ++i) {
      auto p = (*s)[i];
      if (norm(p) > ext) continue;
      coords.insert(coords.end(), p.begin(), p.end());
      if (s == &extra) ++n_extra;
    }
  }
  const double gap = min_gap(x.dim(), coords);
  SparseUnion out{PointSet(x.dim(), std::move(coords), std::isfinite(gap) ? gap : x.sep_radius(),
                           ext, x.label() + "+" + extra.label()),
                  0.0};
  out.extra_density = ext > 0.0 ? static_cast<double>(n_extra) / std::pow(ext, x.dim()) : 0.0;
  return out;
}

Removal remove_near(const PointSet& x, std::span<const double> targets, double tol) {
  const auto d = static_cast<std::size_t>(x.dim());
  require(targets.size() % d == 0, ErrorCode::invalid_argument, "target dimension mismatch");
  require(tol > 0.0 && tol < 0.5 * x.sep_radius(), ErrorCode::invalid_argument,
          "tolerance must lie in (0, sep_radius/2)");
  std::vector<char> drop(x.size(), 0);
  Removal out;
  if (!x.empty()) {
    CellGrid grid(x.dim(), x.coords(), std::max(tol, x.sep_radius()));
    for (std::size_t t = 0; t < targets.size() / d; ++t) {
      auto q = targets.subspan(t * d, d);
      grid.for_each_in_ball(q, tol, [&](std::size_t idx, double) {
        require(!drop[idx], ErrorCode::ambiguous_removal,
                "two targets match the same point");
        drop[idx] = 1;
        ++out.removed;
      });
    }
  }
  std::vector<double> coords;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (drop[i]) continue;
    auto p = x[i];
    coords.insert(coords.end(), p.begin(), p.end());
  }
  out.set = PointSet(x.dim(), std::move(coords), x.sep_radius(), x.extent(), x.label());
  return out;
}

double min_gap(int dim, std::span<const double> coords) {
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t n = coords.size() / d;
  double best = std::numeric_limits<double>::infinity();
  if (n < 2) return best;
  if (dim == 1) {
    std::vector<double> v(coords.begin(), coords.end());
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < n; ++i) best = std::min(best, v[i] - v[i - 1]);
    return best;
  }
  const double cell = CellGrid::suggest_cell_size(dim, coords);
  CellGrid grid(dim, coords, cell);
  for (std::size_t i = 0; i < n; ++i) {
    auto nb = grid.nearest(coords.subspan(i * d, d), i);
    if (nb) best = std::min(best, nb->dist);
  }
  return best;
}

double min_gap(const PointSet& x) { return min_gap(x.dim(), x.coords()); }

SetStats set_stats(const PointSet& x, std::span<const double> radii) {
  SetStats st;
  for (double r : radii) {
    require(r <= x.extent(), ErrorCode::insufficient_extent,
            "radius " + fmt(r) + " exceeds extent " + fmt(x.extent()));
  }
  const double gap = min_gap(x);
  if (std::isfinite(gap)) st.min_gap = gap;
  std::vector<double> norms(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) norms[i] = norm(x[i]);
  std::sort(norms.begin(), norms.end());
  for (double r : radii) {
    const auto c = static_cast<std::size_t>(std::upper_bound(norms.begin(), norms.end(), r) - norms.begin());
    st.radii.push_back(r);
    st.counts.push_back(c);
    st.density.push_back(r > 0.0 ? static_cast<double>(c) / std::pow(r, x.dim()) : 0.0);
  }
  return st;
}

}  // namespace quasidiff
