#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "quasidiff/geometry.hpp"

namespace quasidiff {

struct Neighbor {
  std::size_t index;
  double dist;
};

// Uniform cell hash over a borrowed row-major coordinate array. The caller
// keeps the coordinates alive for the lifetime of the grid.
class CellGrid {
 public:
  CellGrid(int dim, std::span<const double> coords, double cell_size);

  // Cell side of roughly one point per cell over the bounding box.
  static double suggest_cell_size(int dim, std::span<const double> coords);

  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  double cell_size() const { return cell_; }

  // Nearest indexed point to q, optionally skipping one index.
  std::optional<Neighbor> nearest(std::span<const double> q,
                                  std::optional<std::size_t> exclude = {}) const;

  // Calls f(index, dist) for every indexed point with dist <= radius.
  template <class F>
  void for_each_in_ball(std::span<const double> q, double radius, F&& f) const {
    if (size() == 0) return;
    const Key center = key_of(q);
    const auto reach = static_cast<std::int64_t>(std::ceil(radius / cell_)) + 1;
    visit_cube(center, reach, [&](const Key& k) {
      auto it = cells_.find(k);
      if (it == cells_.end()) return;
      for (std::uint32_t idx : it->second) {
        const double dd = distance(q, point(idx));
        if (dd <= radius) f(static_cast<std::size_t>(idx), dd);
      }
    });
  }

 private:
  using Key = std::array<std::int64_t, kMaxDim>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  std::span<const double> point(std::size_t i) const {
    return coords_.subspan(i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
  }
  Key key_of(std::span<const double> q) const;

  template <class F>
  void visit_cube(const Key& center, std::int64_t reach, F&& f) const {
    Key off{};
    for (int i = 0; i < dim_; ++i) off[i] = -reach;
    while (true) {
      Key k{};
      for (int i = 0; i < dim_; ++i) k[i] = center[i] + off[i];
      f(k);
      int axis = 0;
      while (axis < dim_ && ++off[axis] > reach) {
        off[axis] = -reach;
        ++axis;
      }
      if (axis == dim_) break;
    }
  }

  template <class F>
  void visit_shell(const Key& center, std::int64_t ring, F&& f) const {
    visit_cube(center, ring, [&](const Key& k) {
      std::int64_t cheb = 0;
      for (int i = 0; i < dim_; ++i) cheb = std::max(cheb, static_cast<std::int64_t>(std::llabs(k[i] - center[i])));
      if (cheb == ring) f(k);
    });
  }

  int dim_;
  std::span<const double> coords_;
  double cell_;
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
  Key lo_{};
  Key hi_{};
};

}  // namespace quasidiff
