#include "quasidiff/cell_grid.hpp"

#include <algorithm>
#include <cmath>

#include "quasidiff/error.hpp"

namespace quasidiff {

std::size_t CellGrid::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = 0x9E3779B97F4A7C15ull;
  for (std::int64_t v : k) {
    h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

CellGrid::CellGrid(int dim, std::span<const double> coords, double cell_size)
    : dim_(dim), coords_(coords), cell_(cell_size) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::invalid_argument,
          "spatial index supports dimensions 1.." + std::to_string(kMaxDim));
  require(std::isfinite(cell_size) && cell_size > 0.0, ErrorCode::invalid_argument,
          "cell size must be positive");
  const std::size_t n = size();
  cells_.reserve(n);
  for (int i = 0; i < kMaxDim; ++i) {
    lo_[i] = std::numeric_limits<std::int64_t>::max();
    hi_[i] = std::numeric_limits<std::int64_t>::min();
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Key k = key_of(point(i));
    cells_[k].push_back(static_cast<std::uint32_t>(i));
    for (int a = 0; a < dim_; ++a) {
      lo_[a] = std::min(lo_[a], k[a]);
      hi_[a] = std::max(hi_[a], k[a]);
    }
  }
}

double CellGrid::suggest_cell_size(int dim, std::span<const double> coords) {
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t n = coords.size() / d;
  if (n == 0) return 1.0;
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], coords[i * d + a]);
      hi[a] = std::max(hi[a], coords[i * d + a]);
    }
  }
  double vol = 1.0, span = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    vol *= std::max(hi[a] - lo[a], 1e-300);
    span = std::max(span, hi[a] - lo[a]);
  }
  if (!(span > 0.0)) return 1.0;
  double cell = std::pow(vol / static_cast<double>(n), 1.0 / static_cast<double>(dim));
  // Flat boxes (collinear data in 2-D, say) fall back to the 1-D spacing.
  if (!(cell > 1e-9 * span) || !std::isfinite(cell)) cell = span / static_cast<double>(n);
  return std::max(cell, 1e-9 * span);
}

CellGrid::Key CellGrid::key_of(std::span<const double> q) const {
  Key k{};
  for (int i = 0; i < dim_; ++i) {
    // Clamp so far-away queries cannot overflow the key arithmetic.
    k[i] = static_cast<std::int64_t>(std::clamp(std::floor(q[i] / cell_), -0x1p52, 0x1p52));
  }
  return k;
}

std::optional<Neighbor> CellGrid::nearest(std::span<const double> q,
                                          std::optional<std::size_t> exclude) const {
  const std::size_t n = size();
  std::optional<Neighbor> best;
  auto consider = [&](std::size_t idx) {
    if (exclude && *exclude == idx) return;
    const double dd = distance(q, point(idx));
    if (!best || dd < best->dist || (dd == best->dist && idx < best->index)) {
      best = Neighbor{idx, dd};
    }
  };
  if (n == 0) return best;

  const Key center = key_of(q);
  // Rings beyond this Chebyshev radius contain no occupied cells.
  std::int64_t max_ring = 0;
  for (int a = 0; a < dim_; ++a) {
    max_ring = std::max(max_ring, static_cast<std::int64_t>(std::llabs(center[a] - lo_[a])));
    max_ring = std::max(max_ring, static_cast<std::int64_t>(std::llabs(center[a] - hi_[a])));
  }

  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    const double cells_in_cube = std::pow(2.0 * static_cast<double>(ring) + 1.0, dim_);
    if (cells_in_cube > 4.0 * static_cast<double>(n) + 64.0) {
      for (std::size_t i = 0; i < n; ++i) consider(i);
      return best;
    }
    visit_shell(center, ring, [&](const Key& k) {
      auto it = cells_.find(k);
      if (it == cells_.end()) return;
      for (std::uint32_t idx : it->second) consider(idx);
    });
    // Cells in ring+1 are at least ring*cell away from q.
    if (best && best->dist <= static_cast<double>(ring) * cell_) break;
  }
  return best;
}

}  // namespace quasidiff
