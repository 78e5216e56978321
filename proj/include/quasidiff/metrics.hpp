#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quasidiff/pointset.hpp"

namespace quasidiff {

// Finite surrogate for the index set "L > 0" in the windowed suprema.
class LGrid {
 public:
  explicit LGrid(std::vector<double> values, double l_min = 1.0);

  // {lo, lo + 1, ..., hi}
  static LGrid integers(long lo, long hi);

  const std::vector<double>& values() const { return values_; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

struct MetricResult {
  double value = 0.0;
  std::optional<double> attained_L;
  std::optional<double> attained_eps;
  bool capped = false;
  std::string trend;  // tail_limsup mode only: "decreasing", "increasing" or "flat"
};

struct MismatchSets {
  std::vector<double> xy;  // points of X^(L) at distance >= eps from Y^(L), row-major
  std::vector<double> yx;
  std::size_t count_xy() const;
  std::size_t count_yx() const;
  int dim = 1;
};

MismatchSets mismatch_sets(const PointSet& x, const PointSet& y, double radius, double eps);

// max over the grid of (#A_XY + #A_YX) / L^exponent.
MetricResult ratio_sup(const PointSet& x, const PointSet& y, double eps, double exponent,
                       const LGrid& grid);

// Windowed statistical distance, capped at r0/2 with r0 the smaller of the
// two declared separation radii.
MetricResult rho_stat(const PointSet& x, const PointSet& y, const LGrid& grid, double exponent,
                      double eps_tol = 1e-6);

// Hausdorff distance of two finite sets (row-major, same dimension).
// +inf when exactly one side is empty, 0 when both are.
double hausdorff_distance(int dim, std::span<const double> a, std::span<const double> b);
double hausdorff_distance(const PointSet& a, const PointSet& b);

// min{1/4, inf{eps : d_H(X^(1/eps), Y^(1/eps)) <= eps}} by a full scan of
// eps = k * eps_tol over [eps_tol, 1/4].
MetricResult rho_gh(const PointSet& x, const PointSet& y, double eps_tol = 1e-4);

enum class AutMode { sup, tail_limsup };

MetricResult rho_aut(const PointSet& x, const PointSet& y, const LGrid& grid, AutMode mode,
                     double tail_start = 0.0);

}  // namespace quasidiff
