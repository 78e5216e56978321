#include "quasidiff/perturb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "quasidiff/error.hpp"

namespace quasidiff {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMarginSamples = 200000;
constexpr std::size_t kParetoDefaultSamples = 100000;

double sinc(double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; }

cplx gaussian_factor(std::span<const double> sigma, std::span<const double> mean,
                     std::span<const double> lambda) {
  double e = 0.0, shift = 0.0;
  for (std::size_t a = 0; a < lambda.size(); ++a) {
    e += sigma[a] * sigma[a] * lambda[a] * lambda[a];
    if (!mean.empty()) shift += mean[a] * lambda[a];
  }
  const double mag = std::exp(-2.0 * std::numbers::pi * std::numbers::pi * e);
  if (shift == 0.0) return mag;
  const double r = shift - std::nearbyint(shift);
  return mag * cplx(std::cos(kTwoPi * r), -std::sin(kTwoPi * r));
}

std::string join(std::span<const double> v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

std::string to_string(NoiseModel::Kind k) {
  switch (k) {
    case NoiseModel::Kind::gaussian: return "gaussian";
    case NoiseModel::Kind::uniform: return "uniform";
    case NoiseModel::Kind::gaussian_mixture: return "gaussian_mixture";
    case NoiseModel::Kind::pareto_radial: return "pareto_radial";
  }
  return "unknown";
}

NoiseModel NoiseModel::gaussian(int dim, double sigma) {
  return gaussian(std::vector<double>(static_cast<std::size_t>(std::max(dim, 0)), sigma));
}

NoiseModel NoiseModel::gaussian(std::vector<double> sigma) {
  NoiseModel m;
  m.kind = Kind::gaussian;
  m.dim = static_cast<int>(sigma.size());
  m.sigma = std::move(sigma);
  m.validate();
  return m;
}

NoiseModel NoiseModel::uniform(int dim, double half_width) {
  return uniform(std::vector<double>(static_cast<std::size_t>(std::max(dim, 0)), half_width));
}

NoiseModel NoiseModel::uniform(std::vector<double> half_width) {
  NoiseModel m;
  m.kind = Kind::uniform;
  m.dim = static_cast<int>(half_width.size());
  m.half_width = std::move(half_width);
  m.validate();
  return m;
}

NoiseModel NoiseModel::mixture(int dim, std::vector<MixtureComponent> components) {
  NoiseModel m;
  m.kind = Kind::gaussian_mixture;
  m.dim = dim;
  m.components = std::move(components);
  m.validate();
  return m;
}

NoiseModel NoiseModel::pareto_radial(int dim, double alpha, double scale, double moment_eps) {
  NoiseModel m;
  m.kind = Kind::pareto_radial;
  m.dim = dim;
  m.alpha = alpha;
  m.scale = scale;
  m.moment_eps = moment_eps;
  m.validate();
  return m;
}

void NoiseModel::validate() const {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::invalid_argument, "noise dimension must be 1..4");
  const auto d = static_cast<std::size_t>(dim);
  auto nonneg = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double s) { return s >= 0.0 && std::isfinite(s); });
  };
  switch (kind) {
    case Kind::gaussian:
      require(sigma.size() == d && nonneg(sigma), ErrorCode::invalid_argument,
              "gaussian needs one nonnegative sigma per axis");
      break;
    case Kind::uniform:
      require(half_width.size() == d && nonneg(half_width), ErrorCode::invalid_argument,
              "uniform needs one nonnegative half-width per axis");
      break;
    case Kind::gaussian_mixture: {
      require(!components.empty(), ErrorCode::invalid_argument, "mixture has no components");
      double total = 0.0;
      for (const auto& c : components) {
        require(c.weight > 0.0, ErrorCode::invalid_argument, "mixture weights must be positive");
        require(c.mean.size() == d && c.sigma.size() == d && nonneg(c.sigma),
                ErrorCode::invalid_argument, "mixture component has the wrong dimension");
        total += c.weight;
      }
      require(std::fabs(total - 1.0) <= 1e-9, ErrorCode::invalid_argument,
              "mixture weights must sum to 1");
      break;
    }
    case Kind::pareto_radial:
      require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::invalid_argument,
              "pareto index must be positive");
      require(scale > 0.0 && std::isfinite(scale), ErrorCode::invalid_argument,
              "pareto scale must be positive");
      require(moment_eps > 0.0, ErrorCode::invalid_argument, "moment eps must be positive");
      break;
  }
}

bool NoiseModel::finite_moment() const {
  // Pareto radii have E r^k < inf exactly for k < alpha; the others have all moments.
  return kind != Kind::pareto_radial || alpha > dim + moment_eps;
}

std::vector<std::string> NoiseModel::warnings() const {
  std::vector<std::string> w;
  if (!finite_moment()) {
    std::ostringstream os;
    os << "pareto index " << alpha << " <= d + eps = " << dim + moment_eps
       << ": E|xi|^(d+eps) is infinite, recovery is not covered";
    w.push_back(os.str());
  }
  return w;
}

bool NoiseModel::is_zero() const {
  auto zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double s) { return s == 0.0; });
  };
  switch (kind) {
    case Kind::gaussian: return zero(sigma);
    case Kind::uniform: return zero(half_width);
    case Kind::gaussian_mixture:
      return std::all_of(components.begin(), components.end(),
                         [&](const MixtureComponent& c) { return zero(c.sigma) && zero(c.mean); });
    case Kind::pareto_radial: return false;
  }
  return false;
}

std::string NoiseModel::describe() const {
  std::ostringstream os;
  os << to_string(kind) << " d=" << dim;
  switch (kind) {
    case Kind::gaussian: os << " sigma=" << join(sigma); break;
    case Kind::uniform: os << " a=" << join(half_width); break;
    case Kind::gaussian_mixture:
      for (const auto& c : components)
        os << " [w=" << c.weight << " mean=" << join(c.mean) << " sigma=" << join(c.sigma) << "]";
      break;
    case Kind::pareto_radial:
      os << " alpha=" << alpha << " scale=" << scale << " eps=" << moment_eps; break;
  }
  return os.str();
}

void NoiseModel::sample(Stream& rng, double* out) const {
  const auto d = static_cast<std::size_t>(dim);
  switch (kind) {
    case Kind::gaussian:
      for (std::size_t a = 0; a < d; ++a) out[a] = sigma[a] * rng.normal();
      return;
    case Kind::uniform:
      for (std::size_t a = 0; a < d; ++a) out[a] = half_width[a] * (2.0 * rng.uniform() - 1.0);
      return;
    case Kind::gaussian_mixture: {
      double u = rng.uniform();
      std::size_t k = 0;
      while (k + 1 < components.size() && u >= components[k].weight) u -= components[k++].weight;
      const auto& c = components[k];
      for (std::size_t a = 0; a < d; ++a) out[a] = c.mean[a] + c.sigma[a] * rng.normal();
      return;
    }
    case Kind::pareto_radial: {
      const double r = scale * std::pow(rng.uniform_open0(), -1.0 / alpha);
      if (d == 1) {
        out[0] = rng.uniform() < 0.5 ? -r : r;
        return;
      }
      double len = 0.0;
      do {
        len = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
          out[a] = rng.normal();
          len += out[a] * out[a];
        }
      } while (len == 0.0);
      len = std::sqrt(len);
      for (std::size_t a = 0; a < d; ++a) out[a] *= r / len;
      return;
    }
  }
}

double perturbation_margin(const NoiseModel& model) {
  model.validate();
  if (model.is_zero()) return 0.0;
  Stream rng(0x6d617267696eull, "margin", 0);
  std::vector<double> r(kMarginSamples);
  std::array<double, kMaxDim> xi{};
  for (auto& v : r) {
    model.sample(rng, xi.data());
    v = norm(std::span<const double>(xi.data(), static_cast<std::size_t>(model.dim)));
  }
  const auto k = static_cast<std::size_t>(std::ceil(0.999 * kMarginSamples)) - 1;
  std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k), r.end());
  return r[k];
}

PointSet perturb(const PointSet& x, const NoiseModel& model, std::uint64_t seed) {
  model.validate();
  require(model.dim == x.dim(), ErrorCode::invalid_argument,
          "noise model and point set differ in dimension");
  if (model.is_zero()) return x;
  const double margin = perturbation_margin(model);
  const double extent = x.extent() - margin;
  require(extent > 0.0, ErrorCode::insufficient_extent,
          "perturbation margin " + std::to_string(margin) + " exceeds the extent");
  const auto d = static_cast<std::size_t>(x.dim());
  std::vector<double> out;
  out.reserve(x.coords().size());
  std::array<double, kMaxDim> q{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    Stream rng(seed, x.label(), i);
    model.sample(rng, q.data());
    for (std::size_t a = 0; a < d; ++a) q[a] += x[i][a];
    if (norm(std::span<const double>(q.data(), d)) <= extent) out.insert(out.end(), q.begin(), q.begin() + static_cast<std::ptrdiff_t>(d));
  }
  const double gap = min_gap(x.dim(), out);
  return PointSet(x.dim(), std::move(out), std::isfinite(gap) ? gap : 0.0, extent,
                  x.label() + "~" + std::to_string(seed));
}

CharValue char_fn(const NoiseModel& model, std::span<const double> lambda,
                  std::optional<std::size_t> mc_samples, std::uint64_t seed) {
  model.validate();
  require(lambda.size() == static_cast<std::size_t>(model.dim), ErrorCode::invalid_argument,
          "frequency and noise model differ in dimension");
  if (mc_samples)
    require(*mc_samples > 0, ErrorCode::invalid_argument, "Monte Carlo needs at least one sample");
  CharValue out;
  if (std::all_of(lambda.begin(), lambda.end(), [](double v) { return v == 0.0; })) {
    out.value = 1.0;
    return out;
  }
  if (!mc_samples && model.kind != NoiseModel::Kind::pareto_radial) {
    switch (model.kind) {
      case NoiseModel::Kind::gaussian:
        out.value = gaussian_factor(model.sigma, {}, lambda);
        break;
      case NoiseModel::Kind::uniform: {
        double v = 1.0;
        for (std::size_t a = 0; a < lambda.size(); ++a)
          v *= sinc(kTwoPi * model.half_width[a] * lambda[a]);
        out.value = v;
        break;
      }
      case NoiseModel::Kind::gaussian_mixture:
        for (const auto& c : model.components)
          out.value += c.weight * gaussian_factor(c.sigma, c.mean, lambda);
        break;
      case NoiseModel::Kind::pareto_radial: break;
    }
    return out;
  }
  const std::size_t n = mc_samples.value_or(kParetoDefaultSamples);
  Stream rng(seed, "char_fn", 0);
  std::array<double, kMaxDim> xi{};
  double sr = 0, si = 0, sr2 = 0, si2 = 0;
  for (std::size_t s = 0; s < n; ++s) {
    model.sample(rng, xi.data());
    const double t = dot(std::span<const double>(xi.data(), lambda.size()), lambda);
    const double r = t - std::nearbyint(t);
    const double c = std::cos(kTwoPi * r), sn = -std::sin(kTwoPi * r);
    sr += c;
    si += sn;
    sr2 += c * c;
    si2 += sn * sn;
  }
  const double nd = static_cast<double>(n);
  const double mr = sr / nd, mi = si / nd;
  const double var = std::max(0.0, sr2 / nd - mr * mr) + std::max(0.0, si2 / nd - mi * mi);
  out.value = cplx(mr, mi);
  out.std_error = std::sqrt(var / nd);
  out.monte_carlo = true;
  return out;
}

Spectrum recover(const Spectrum& spec, const NoiseModel& model, double guard,
                 std::optional<std::size_t> mc_samples) {
  require(guard > 0.0, ErrorCode::invalid_argument, "guard must be positive");
  require(model.dim == spec.grid.dim(), ErrorCode::invalid_argument,
          "noise model and spectrum differ in dimension");
  Spectrum out = spec;
  out.label = spec.label + "/recovered";
  if (out.valid.size() != spec.size()) out.valid.assign(spec.size(), 1);
  const double vol = std::pow(spec.window_radius, spec.grid.dim());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (!out.valid[k]) continue;
    const auto lam = spec.grid.node(k);
    const cplx psi = char_fn(model, lam, mc_samples, k).value;
    if (std::abs(psi) < guard) {
      out.valid[k] = 0;
      out.amplitude[k] = 0.0;
      out.power[k] = 0.0;
      continue;
    }
    out.amplitude[k] = spec.amplitude[k] / psi;
    out.power[k] = vol * std::norm(out.amplitude[k]);
  }
  return out;
}

BoundaryReport boundary_crossings(const PointSet& x, const NoiseModel& model, std::uint64_t seed,
                                  const std::vector<double>& L_list) {
  model.validate();
  require(model.dim == x.dim(), ErrorCode::invalid_argument,
          "noise model and point set differ in dimension");
  require(!L_list.empty(), ErrorCode::invalid_argument, "need at least one window radius");
  BoundaryReport rep;
  rep.margin = perturbation_margin(model);
  const double lmax = *std::max_element(L_list.begin(), L_list.end());
  require(lmax + rep.margin <= x.extent(), ErrorCode::insufficient_extent,
          "largest radius plus margin exceeds the extent");
  for (double L : L_list) {
    require(L > 0.0, ErrorCode::invalid_argument, "window radii must be positive");
    rep.rows.push_back(BoundaryRecord{L, 0, 0, 0.0});
  }
  if (model.is_zero()) return rep;
  const auto d = static_cast<std::size_t>(x.dim());
  std::array<double, kMaxDim> q{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    Stream rng(seed, x.label(), i);
    model.sample(rng, q.data());
    for (std::size_t a = 0; a < d; ++a) q[a] += x[i][a];
    const double before = norm(x[i]);
    const double after = norm(std::span<const double>(q.data(), d));
    for (auto& row : rep.rows) {
      if (before <= row.L && after > row.L) ++row.exits;
      if (before > row.L && after <= row.L) ++row.entries;
    }
  }
  for (auto& row : rep.rows)
    row.ratio = static_cast<double>(row.exits + row.entries) / std::pow(row.L, x.dim());
  return rep;
}

RecoveryReport recovery_trial(const PointSet& x, const NoiseModel& model,
                              const std::vector<std::uint64_t>& seeds,
                              const std::vector<std::vector<double>>& lambdas, double L,
                              double guard) {
  model.validate();
  require(!seeds.empty() && !lambdas.empty(), ErrorCode::invalid_argument,
          "need at least one seed and one frequency");
  RecoveryReport rep;
  rep.margin = perturbation_margin(model);
  rep.L = L;
  require(L <= x.extent() - rep.margin, ErrorCode::insufficient_extent,
          "L exceeds extent minus the perturbation margin");
  const double vol = std::pow(L, x.dim());
  const PointSet base = window(x, L);
  bool any_valid = false;
  for (const auto& lam : lambdas) {
    RecoveryRow row;
    row.lambda = lam;
    row.psi = char_fn(model, lam).value;
    row.valid = std::abs(row.psi) >= guard;
    row.true_amplitude = exp_sum(base, lam) / vol;
    any_valid = any_valid || row.valid;
    rep.rows.push_back(std::move(row));
  }
  require(any_valid, ErrorCode::degenerate_trial, "every frequency falls below the guard");
  for (std::uint64_t seed : seeds) {
    const PointSet w = window(perturb(x, model, seed), L);
    for (auto& row : rep.rows) {
      if (!row.valid) continue;
      row.recovered.push_back(exp_sum(w, row.lambda) / vol / row.psi);
    }
  }
  for (auto& row : rep.rows) {
    if (!row.valid) continue;
    std::vector<double> err;
    for (const auto& r : row.recovered) err.push_back(std::abs(r - row.true_amplitude));
    std::sort(err.begin(), err.end());
    const std::size_t m = err.size();
    row.median_abs_error = m % 2 ? err[m / 2] : 0.5 * (err[m / 2 - 1] + err[m / 2]);
  }
  return rep;
}

}  // namespace quasidiff
