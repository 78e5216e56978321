#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "quasidiff/geometry.hpp"

namespace quasidiff {

// Finite window of a uniformly discrete set: the points of the set inside the
// closed ball of radius `extent` around the origin, in lexicographic order.
// A separation radius of 0 marks a set that is not uniformly discrete.
class PointSet {
 public:
  PointSet() = default;

  // Sorts the rows lexicographically. Throws duplicate-point on repeated rows
  // and invalid-argument on rows outside the closed extent ball.
  PointSet(int dim, std::vector<double> coords, double sep_radius, double extent,
           std::string label);

  int dim() const { return dim_; }
  double sep_radius() const { return sep_radius_; }
  double extent() const { return extent_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const { return coords_; }

  PointSet relabeled(std::string label) const;
  PointSet with_sep_radius(double r0) const;

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.dim_ == b.dim_ && a.coords_ == b.coords_;
  }

 private:
  int dim_ = 1;
  double sep_radius_ = 0.0;
  double extent_ = 0.0;
  std::string label_;
  std::vector<double> coords_;
};

// Half-open axis-aligned box [lo, hi) in internal space.
struct BoxWindow {
  std::vector<double> lo;
  std::vector<double> hi;
};

// Closed convex polygon in a 2-D internal space, vertices counter-clockwise.
struct PolygonWindow {
  std::vector<std::array<double, 2>> vertices;
};

using InternalWindow = std::variant<BoxWindow, PolygonWindow>;

struct CutProjectConfig {
  Eigen::MatrixXd physical_rows;  // d x n
  Eigen::MatrixXd internal_rows;  // (n - d) x n
  InternalWindow window;
  Eigen::VectorXd offset;         // n
  double extent = 0.0;
  std::string label = "cut-project";

  int total_dim() const { return static_cast<int>(physical_rows.cols()); }
  int dim() const { return static_cast<int>(physical_rows.rows()); }

  // Z^n with identity projection and an empty internal space.
  static CutProjectConfig lattice(int dim, double extent);
  // Z^2 projected on the line of slope 1/tau; tiles tau and 1.
  static CutProjectConfig fibonacci(double extent);
  // Z^4 with the eightfold projection and a unit-edge octagonal window.
  static CutProjectConfig ammann_beenker(double extent);
};

PointSet gen_lattice(int dim, double spacing, double extent);
PointSet gen_cut_project(const CutProjectConfig& cfg);
PointSet gen_fibonacci(double extent);
PointSet gen_visible(double extent);
PointSet gen_poisson(double intensity, int dim, double extent, std::uint64_t seed);

// X ∩ B_L. Throws insufficient-extent when L exceeds the stored extent.
PointSet window(const PointSet& x, double radius);

// (inner ∩ B_R) ∪ (outer \ B_R).
PointSet splice(const PointSet& inner, const PointSet& outer, double radius,
                bool allow_smaller_gap = false);

struct SparseUnion {
  PointSet set;
  double extra_density = 0.0;  // #extra / extent^d
};
SparseUnion sparse_union(const PointSet& x, const PointSet& extra);

struct Removal {
  PointSet set;
  std::size_t removed = 0;
};
// targets is row-major with x.dim() columns.
Removal remove_near(const PointSet& x, std::span<const double> targets, double tol);

struct SetStats {
  std::optional<double> min_gap;  // empty for fewer than two points
  std::vector<double> radii;
  std::vector<std::size_t> counts;
  std::vector<double> density;
};
SetStats set_stats(const PointSet& x, std::span<const double> radii);

// Smallest pairwise distance; +inf for fewer than two points.
double min_gap(const PointSet& x);
double min_gap(int dim, std::span<const double> coords);

// Closed-ball count #(X ∩ B_L), using the same norm as window().
std::size_t count_within(const PointSet& x, double radius);

}  // namespace quasidiff
