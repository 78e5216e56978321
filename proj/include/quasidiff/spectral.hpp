#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quasidiff/pointset.hpp"

namespace quasidiff {

using cplx = std::complex<double>;

struct AxisRange {
  double min = 0.0;
  double max = 0.0;
  double step = 0.0;
};

// Rectangular grid of frequencies, last axis fastest in node order.
class FrequencyGrid {
 public:
  static constexpr std::size_t kDefaultBudget = std::size_t{1} << 26;

  FrequencyGrid() = default;
  explicit FrequencyGrid(std::vector<AxisRange> axes, std::size_t budget = kDefaultBudget);
  // Symmetric 1-D grid [-half_width, half_width].
  static FrequencyGrid symmetric(double half_width, double step);

  int dim() const { return static_cast<int>(axes_.size()); }
  const std::vector<AxisRange>& axes() const { return axes_; }
  std::size_t axis_count(int a) const { return counts_[static_cast<std::size_t>(a)]; }
  std::size_t size() const { return total_; }
  // Coordinate of node k along axis a; values within 1e-9 steps of 0 snap to 0.
  double axis_value(int a, std::size_t k) const;
  std::vector<double> node(std::size_t flat) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const std::size_t> idx) const;

 private:
  std::vector<AxisRange> axes_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

struct Spectrum {
  FrequencyGrid grid;
  std::vector<cplx> amplitude;    // L^-d * sum_p e(-<p, lambda>)
  std::vector<double> power;      // L^d * |amplitude|^2
  std::vector<std::uint8_t> valid;  // 0 where a later operation could not define the value
  double window_radius = 0.0;
  std::string label;

  std::size_t size() const { return power.size(); }
};

// Sum of e^{-2 pi i <p, lambda>} over all points, in canonical point order.
cplx exp_sum(const PointSet& x, std::span<const double> lambda);

// Both fill amplitude and power; threads = 0 uses the hardware count.
// Node results do not depend on the thread count.
Spectrum amplitude_spectrum(const PointSet& x, double L, const FrequencyGrid& grid,
                            unsigned threads = 1);
Spectrum periodogram(const PointSet& x, double L, const FrequencyGrid& grid, unsigned threads = 1);

class AtomicMeasure;
// Sum of w e^{-2 pi i <v, lambda>} over the atoms at every grid node.
std::vector<cplx> fourier_transform(const AtomicMeasure& mu, const FrequencyGrid& grid,
                                    unsigned threads = 1);

struct Peak {
  std::vector<double> node;      // grid node of the local maximum
  std::vector<double> location;  // quadratic refinement
  double height = 0.0;
  double mass = 0.0;
};

struct Box {
  std::vector<double> lo, hi;
  bool contains(std::span<const double> p, double pad = 0.0) const;
  bool intersects(const Box& o, double pad = 0.0) const;
};

struct PeakReport {
  std::vector<Peak> peaks;  // descending height
  // Median power outside all peak windows divided by ln 2, which is the mean
  // of an exponentially distributed periodogram.
  double background_level = 0.0;
  double background_median = 0.0;
  std::vector<Box> support_boxes;
  double window_width = 0.0;
  double threshold_ratio = 0.0;
  double total_mass = 0.0;  // integral of power over the whole grid
};

PeakReport analyze_peaks(const Spectrum& spec, double peak_window_width, double threshold_ratio);

// Trapezoid integral of the linear interpolant of power over a box, clipped
// to the grid.
double integrate_power(const Spectrum& spec, const Box& box);

struct DiagnosticRow {
  double L = 0.0;
  std::size_t peak_count = 0;
  double peak_mass = 0.0;
  double off_zero_mass = 0.0;  // peaks farther than one window width from 0
  // Mass in windows at the off-zero peaks of the largest L; drives peak stability.
  double tracked_mass = 0.0;
  double max_off_zero_height = 0.0;
  double background = 0.0;
  double background_ratio = 0.0;  // background / max_off_zero_height (inf without such peaks)
  double pure_point_fraction = 0.0;
};

struct DiagnosticThresholds {
  double background_ratio = 0.01;
  double mass_drift = 0.05;
  double background_drift = 0.25;
  double threshold_ratio = 0.1;
};

struct DiagnosticReport {
  std::vector<DiagnosticRow> rows;
  bool peaks_stable = false;
  bool background_stable = false;
  std::string verdict;  // "singular-dominant", "AC-dominant" or "mixed"
  DiagnosticThresholds thresholds;
};

// peak_window_width defaults to 4/L for each L.
DiagnosticReport singularity_diagnostic(const PointSet& x, const std::vector<double>& L_list,
                                        const FrequencyGrid& grid,
                                        std::optional<double> peak_window_width = std::nullopt,
                                        const DiagnosticThresholds& th = {}, unsigned threads = 1);

}  // namespace quasidiff
