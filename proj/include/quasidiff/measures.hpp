#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quasidiff/pointset.hpp"

namespace quasidiff {

using cplx = std::complex<double>;

// Finitely supported measure. Atoms are kept in lexicographic order of
// location with nonzero weights; bucket_tol = 0 marks exact locations.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  explicit AtomicMeasure(int dim) : dim_(dim) {}
  // Sorts atoms, drops zero weights and adds weights at identical locations.
  AtomicMeasure(int dim, std::vector<double> locations, std::vector<cplx> weights,
                double bucket_tol = 0.0, std::size_t merges = 0);

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }
  std::span<const double> location(std::size_t i) const {
    return {locations_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  cplx weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& locations() const { return locations_; }
  const std::vector<cplx>& weights() const { return weights_; }
  double bucket_tol() const { return bucket_tol_; }
  // Number of differences folded into an atom at a different location.
  std::size_t merges() const { return merges_; }

  cplx total_mass() const;
  AtomicMeasure scaled(cplx c) const;
  // Weight of the atom at exactly this location, 0 if none.
  cplx weight_at(std::span<const double> loc, double tol = 0.0) const;

  // Index range of atoms whose first coordinate lies in [lo, hi].
  std::pair<std::size_t, std::size_t> first_axis_range(double lo, double hi) const;

 private:
  int dim_ = 1;
  std::vector<double> locations_;
  std::vector<cplx> weights_;
  double bucket_tol_ = 0.0;
  std::size_t merges_ = 0;
};

// amplitude * max(0, 1 - |x - center| / radius)
struct TestFunction {
  std::vector<double> center;
  double radius = 1.0;
  double amplitude = 1.0;

  TestFunction() = default;
  TestFunction(std::vector<double> c, double r, double amp = 1.0);
  double operator()(std::span<const double> x) const;
  double sup_norm() const { return std::abs(amplitude); }
};

// Tents covering the box [lo, hi] with every support inside it.
struct TestFamily {
  std::vector<TestFunction> members;
  std::vector<double> region_lo, region_hi;
  double resolution = 0.0;  // spacing of the centres

  // count centres per axis, evenly spaced in [lo + radius, hi - radius].
  static TestFamily tent_grid(std::vector<double> lo, std::vector<double> hi, int count,
                              double radius, double amplitude = 1.0);
  // Tents at the given centres; the region is their bounding box grown by the radius.
  static TestFamily at_points(int dim, std::span<const double> centers, double radius,
                              double amplitude = 1.0);
  std::string describe() const;
};

AtomicMeasure dirac_comb(const PointSet& x);

// gamma_{X,L}: differences p - q of X^(L), weight multiplicity / L^d. Optional
// max_lag keeps only differences of norm <= max_lag.
AtomicMeasure autocorrelation(const PointSet& x, double L, double bucket_tol = 1e-9,
                              std::optional<double> max_lag = std::nullopt);

cplx pair(const AtomicMeasure& mu, const TestFunction& f);

// sum of w e^{-2 pi i <v, lambda>} over the atoms, compensated summation.
cplx fourier_sum(const AtomicMeasure& mu, std::span<const double> lambda);
double tv_on_ball(const AtomicMeasure& mu, std::span<const double> center, double radius);
double vague_gap(const AtomicMeasure& mu, const AtomicMeasure& nu, const TestFamily& family);

// Largest total variation an r0-separated set can put in a ball of the given radius.
double uniform_tv_bound(int dim, double r0, double radius);

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

struct PortmanteauReport {
  struct Entry {
    Ball ball;
    double limit_mass = 0.0;
    double tail_extreme = 0.0;  // sup over tail for compacts, inf for opens
    bool pass = false;
  };
  std::vector<Entry> compacts;
  std::vector<Entry> opens;
  std::size_t tail_start = 0;
  bool all_pass() const;
};

PortmanteauReport portmanteau_check(const std::vector<AtomicMeasure>& seq,
                                    const AtomicMeasure& limit, const std::vector<Ball>& compacts,
                                    const std::vector<Ball>& opens, double tol = 1e-9);

}  // namespace quasidiff
