#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quasidiff/pointset.hpp"
#include "quasidiff/rng.hpp"
#include "quasidiff/spectral.hpp"

namespace quasidiff {

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> sigma;
};

struct NoiseModel {
  enum class Kind { gaussian, uniform, gaussian_mixture, pareto_radial };

  Kind kind = Kind::gaussian;
  int dim = 1;
  std::vector<double> sigma;        // gaussian, per axis
  std::vector<double> half_width;   // uniform, per axis
  std::vector<MixtureComponent> components;
  double alpha = 0.0;               // pareto_radial tail index
  double scale = 0.0;               // pareto_radial minimum radius
  double moment_eps = 0.1;          // declared eps of the moment condition

  static NoiseModel gaussian(int dim, double sigma);
  static NoiseModel gaussian(std::vector<double> sigma);
  static NoiseModel uniform(int dim, double half_width);
  static NoiseModel uniform(std::vector<double> half_width);
  static NoiseModel mixture(int dim, std::vector<MixtureComponent> components);
  static NoiseModel pareto_radial(int dim, double alpha, double scale, double moment_eps = 0.1);

  // Throws invalid_argument on a malformed model.
  void validate() const;
  // E|xi|^(d + eps) < infinity.
  bool finite_moment() const;
  std::vector<std::string> warnings() const;
  bool is_zero() const;
  std::string describe() const;

  // One displacement, written to out[0..dim).
  void sample(Stream& rng, double* out) const;
};

std::string to_string(NoiseModel::Kind k);

struct PerturbationRecord {
  std::string base_label;
  std::uint64_t seed = 0;
  NoiseModel model;
};

// 99.9th percentile of |xi|, estimated from a fixed stream so it depends on
// the model alone.
double perturbation_margin(const NoiseModel& model);

// Point i is moved by a draw from Stream(seed, label, i). The result keeps the
// points inside the ball of radius extent - margin.
PointSet perturb(const PointSet& x, const NoiseModel& model, std::uint64_t seed);

struct CharValue {
  cplx value;
  double std_error = 0.0;  // 0 for closed forms
  bool monte_carlo = false;
};

// Closed forms where available; mc_samples forces Monte Carlo. pareto_radial
// always uses Monte Carlo (100000 samples by default).
CharValue char_fn(const NoiseModel& model, std::span<const double> lambda,
                  std::optional<std::size_t> mc_samples = std::nullopt, std::uint64_t seed = 0);

// amplitude / psi where |psi| >= guard; other nodes are flagged invalid with
// zero amplitude and power.
Spectrum recover(const Spectrum& spec, const NoiseModel& model, double guard = 1e-3,
                 std::optional<std::size_t> mc_samples = std::nullopt);

struct BoundaryRecord {
  double L = 0.0;
  std::size_t exits = 0;    // E_L
  std::size_t entries = 0;  // F_L
  double ratio = 0.0;       // (E_L + F_L) / L^d
};

struct BoundaryReport {
  std::vector<BoundaryRecord> rows;
  double margin = 0.0;
};

BoundaryReport boundary_crossings(const PointSet& x, const NoiseModel& model, std::uint64_t seed,
                                  const std::vector<double>& L_list);

struct RecoveryRow {
  std::vector<double> lambda;
  cplx psi;
  bool valid = false;
  cplx true_amplitude;
  std::vector<cplx> recovered;  // one per seed; empty when invalid
  double median_abs_error = 0.0;
};

struct RecoveryReport {
  std::vector<RecoveryRow> rows;
  double margin = 0.0;
  double L = 0.0;
};

RecoveryReport recovery_trial(const PointSet& x, const NoiseModel& model,
                              const std::vector<std::uint64_t>& seeds,
                              const std::vector<std::vector<double>>& lambdas, double L,
                              double guard = 1e-3);

}  // namespace quasidiff
