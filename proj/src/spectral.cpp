#include "quasidiff/spectral.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "quasidiff/error.hpp"
#include "quasidiff/measures.hpp"

namespace quasidiff {

namespace {

constexpr std::size_t kAnchorStride = 64;  // nodes between exact phase evaluations
constexpr std::size_t kChunk = 128;        // points summed sequentially before tree merging

// e^{-2 pi i x} with the argument reduced to [-1/2, 1/2] first.
cplx phase(double x) {
  const double r = x - std::nearbyint(x);
  if (r == 0.0) return {1.0, 0.0};
  const double a = 2.0 * std::numbers::pi * r;
  return {std::cos(a), -std::sin(a)};
}

using Block = std::array<cplx, kAnchorStride>;

// Pairwise combination of chunk sums, as a binary counter.
class TreeSum {
 public:
  void push(const Block& b) {
    Block carry = b;
    std::size_t level = 0;
    while (level < levels_.size() && used_[level]) {
      for (std::size_t j = 0; j < kAnchorStride; ++j) carry[j] = levels_[level][j] + carry[j];
      used_[level] = false;
      ++level;
    }
    if (level == levels_.size()) {
      levels_.emplace_back();
      used_.push_back(false);
    }
    levels_[level] = carry;
    used_[level] = true;
  }
  Block total() const {
    Block s{};
    bool any = false;
    for (std::size_t l = 0; l < levels_.size(); ++l) {
      if (!used_[l]) continue;
      if (!any) {
        s = levels_[l];
        any = true;
      } else {
        for (std::size_t j = 0; j < kAnchorStride; ++j) s[j] = levels_[l][j] + s[j];
      }
    }
    return s;
  }

 private:
  std::vector<Block> levels_;
  std::vector<bool> used_;
};

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  }
}

// Unnormalized sums of weight(i) e(-<row(i), lambda>) at every grid node.
// Rows are visited in index order, so results do not depend on threads.
template <class Row, class Weight>
std::vector<cplx> grid_sums(int dim, std::size_t n, Row row_of, Weight weight_of, cplx zero_value,
                            const FrequencyGrid& grid, unsigned threads) {
  const int d = grid.dim();
  require(d == dim, ErrorCode::invalid_argument, "grid and data differ in dimension");
  const std::size_t last = grid.axis_count(d - 1);
  const std::size_t rows = grid.size() / last;
  const std::size_t blocks_per_row = (last + kAnchorStride - 1) / kAnchorStride;
  const double h = grid.axes()[static_cast<std::size_t>(d - 1)].step;
  std::vector<cplx> out(grid.size());

  parallel_for(rows * blocks_per_row, threads, [&](std::size_t task) {
    const std::size_t row = task / blocks_per_row;
    const std::size_t first = (task % blocks_per_row) * kAnchorStride;
    const std::size_t m = std::min(kAnchorStride, last - first);
    const std::vector<double> anchor = grid.node(row * last + first);
    TreeSum tree;
    Block acc{};
    std::size_t in_chunk = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = row_of(i);
      cplx z = weight_of(i) * phase(dot(p, anchor));
      const cplx rot = phase(p[static_cast<std::size_t>(d - 1)] * h);
      for (std::size_t j = 0; j < m; ++j) {
        acc[j] += z;
        z *= rot;
      }
      if (++in_chunk == kChunk) {
        tree.push(acc);
        acc = Block{};
        in_chunk = 0;
      }
    }
    if (in_chunk > 0) tree.push(acc);
    const Block s = tree.total();
    for (std::size_t j = 0; j < m; ++j) out[row * last + first + j] = s[j];
  });

  // The zero frequency is exact: every phase is 1.
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto lam = grid.node(k);
    if (std::all_of(lam.begin(), lam.end(), [](double v) { return v == 0.0; })) out[k] = zero_value;
  }
  return out;
}

std::vector<cplx> grid_sums(const PointSet& w, const FrequencyGrid& grid, unsigned threads) {
  return grid_sums(
      w.dim(), w.size(), [&](std::size_t i) { return w[i]; }, [](std::size_t) { return 1.0; },
      cplx(static_cast<double>(w.size())), grid, threads);
}

// Per-axis trapezoid weights of the linear interpolant over [a, b].
struct AxisWeights {
  std::size_t first = 0;
  std::vector<double> w;
};

AxisWeights axis_weights(const FrequencyGrid& g, int axis, double a, double b) {
  const auto& ax = g.axes()[static_cast<std::size_t>(axis)];
  const std::size_t n = g.axis_count(axis);
  AxisWeights out;
  if (n < 2) {
    out.w.assign(1, a <= ax.min && ax.min <= b ? 1.0 : 0.0);
    return out;
  }
  const double lo_edge = ax.min;
  const double hi_edge = ax.min + static_cast<double>(n - 1) * ax.step;
  a = std::max(a, lo_edge);
  b = std::min(b, hi_edge);
  if (!(b > a)) return out;
  const double h = ax.step;
  const auto k0 = static_cast<std::size_t>(std::clamp(std::floor((a - lo_edge) / h), 0.0, double(n - 2)));
  const auto k1 = static_cast<std::size_t>(std::clamp(std::floor((b - lo_edge) / h), 0.0, double(n - 2)));
  out.first = k0;
  out.w.assign(k1 - k0 + 2, 0.0);
  for (std::size_t k = k0; k <= k1; ++k) {
    const double xk = lo_edge + static_cast<double>(k) * h;
    const double ts = std::clamp((a - xk) / h, 0.0, 1.0);
    const double te = std::clamp((b - xk) / h, 0.0, 1.0);
    if (te <= ts) continue;
    const double sq = 0.5 * (te * te - ts * ts);
    out.w[k - k0] += h * ((te - ts) - sq);
    out.w[k - k0 + 1] += h * sq;
  }
  return out;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

Spectrum make_spectrum(const PointSet& x, double L, const FrequencyGrid& grid, unsigned threads) {
  require(L > 0.0, ErrorCode::invalid_argument, "L must be positive");
  require(grid.size() > 0, ErrorCode::empty_spectrum, "frequency grid has no nodes");
  const PointSet w = window(x, L);
  Spectrum s;
  s.grid = grid;
  s.window_radius = L;
  s.label = x.label();
  const std::vector<cplx> sums = grid_sums(w, grid, threads);
  const double vol = std::pow(L, x.dim());
  s.amplitude.resize(sums.size());
  s.power.resize(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k) {
    s.amplitude[k] = sums[k] / vol;
    s.power[k] = std::norm(sums[k]) / vol;
  }
  s.valid.assign(sums.size(), 1);
  return s;
}

}  // namespace

FrequencyGrid::FrequencyGrid(std::vector<AxisRange> axes, std::size_t budget)
    : axes_(std::move(axes)) {
  require(!axes_.empty() && axes_.size() <= static_cast<std::size_t>(kMaxDim),
          ErrorCode::invalid_argument, "frequency grid needs 1..4 axes");
  total_ = 1;
  for (const auto& a : axes_) {
    require(a.step > 0.0 && std::isfinite(a.step), ErrorCode::invalid_argument,
            "grid step must be positive");
    require(a.max > a.min, ErrorCode::invalid_argument, "grid max must exceed min");
    const double c = std::floor((a.max - a.min) / a.step + 1e-9) + 1.0;
    require(c <= static_cast<double>(budget), ErrorCode::invalid_argument,
            "frequency grid exceeds the node budget");
    counts_.push_back(static_cast<std::size_t>(c));
    total_ *= counts_.back();
    require(total_ <= budget, ErrorCode::invalid_argument, "frequency grid exceeds the node budget");
  }
}

FrequencyGrid FrequencyGrid::symmetric(double half_width, double step) {
  return FrequencyGrid({AxisRange{-half_width, half_width, step}});
}

double FrequencyGrid::axis_value(int a, std::size_t k) const {
  const auto& ax = axes_[static_cast<std::size_t>(a)];
  const double v = ax.min + static_cast<double>(k) * ax.step;
  return std::fabs(v) < 1e-9 * ax.step ? 0.0 : v;
}

std::vector<std::size_t> FrequencyGrid::multi_index(std::size_t flat) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t a = axes_.size(); a-- > 0;) {
    idx[a] = flat % counts_[a];
    flat /= counts_[a];
  }
  return idx;
}

std::size_t FrequencyGrid::flat_index(std::span<const std::size_t> idx) const {
  std::size_t f = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) f = f * counts_[a] + idx[a];
  return f;
}

std::vector<double> FrequencyGrid::node(std::size_t flat) const {
  const auto idx = multi_index(flat);
  std::vector<double> v(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) v[a] = axis_value(static_cast<int>(a), idx[a]);
  return v;
}

bool Box::contains(std::span<const double> p, double pad) const {
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (p[a] < lo[a] - pad || p[a] > hi[a] + pad) return false;
  return true;
}

bool Box::intersects(const Box& o, double pad) const {
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (hi[a] + pad < o.lo[a] || o.hi[a] + pad < lo[a]) return false;
  return true;
}

cplx exp_sum(const PointSet& x, std::span<const double> lambda) {
  require(lambda.size() == static_cast<std::size_t>(x.dim()), ErrorCode::invalid_argument,
          "frequency and point set differ in dimension");
  cplx s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += phase(dot(x[i], lambda));
  return s;
}

Spectrum amplitude_spectrum(const PointSet& x, double L, const FrequencyGrid& grid,
                            unsigned threads) {
  return make_spectrum(x, L, grid, threads);
}

Spectrum periodogram(const PointSet& x, double L, const FrequencyGrid& grid, unsigned threads) {
  return make_spectrum(x, L, grid, threads);
}

std::vector<cplx> fourier_transform(const AtomicMeasure& mu, const FrequencyGrid& grid,
                                    unsigned threads) {
  return grid_sums(
      mu.dim(), mu.size(), [&](std::size_t i) { return mu.location(i); },
      [&](std::size_t i) { return mu.weight(i); }, mu.total_mass(), grid, threads);
}

double integrate_power(const Spectrum& spec, const Box& box) {
  const FrequencyGrid& g = spec.grid;
  const int d = g.dim();
  std::vector<AxisWeights> ws;
  for (int a = 0; a < d; ++a) {
    ws.push_back(axis_weights(g, a, box.lo[static_cast<std::size_t>(a)],
                              box.hi[static_cast<std::size_t>(a)]));
    if (ws.back().w.empty()) return 0.0;
  }
  double total = 0.0;
  std::vector<std::size_t> off(static_cast<std::size_t>(d), 0), idx(static_cast<std::size_t>(d));
  while (true) {
    double wt = 1.0;
    bool inside = true;
    for (std::size_t a = 0; a < off.size(); ++a) {
      idx[a] = ws[a].first + off[a];
      if (idx[a] >= g.axis_count(static_cast<int>(a))) inside = false;
      wt *= ws[a].w[off[a]];
    }
    if (inside && wt != 0.0) {
      const std::size_t f = g.flat_index(idx);
      if (spec.valid.empty() || spec.valid[f]) total += wt * spec.power[f];
    }
    std::size_t a = 0;
    while (a < off.size() && ++off[a] == ws[a].w.size()) off[a++] = 0;
    if (a == off.size()) break;
  }
  return total;
}

PeakReport analyze_peaks(const Spectrum& spec, double peak_window_width, double threshold_ratio) {
  require(spec.size() > 0, ErrorCode::empty_spectrum, "spectrum has no nodes");
  const FrequencyGrid& g = spec.grid;
  const int d = g.dim();
  for (const auto& ax : g.axes())
    require(peak_window_width >= 2.0 * ax.step * (1 - 1e-12), ErrorCode::invalid_argument,
            "peak window narrower than two grid steps");
  auto ok = [&](std::size_t k) { return spec.valid.empty() || spec.valid[k] != 0; };

  PeakReport rep;
  rep.window_width = peak_window_width;
  rep.threshold_ratio = threshold_ratio;
  double pmax = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k)
    if (ok(k)) pmax = std::max(pmax, spec.power[k]);

  std::vector<std::size_t> maxima;
  if (pmax > 0.0) {
    const double cut = threshold_ratio * pmax;
    std::vector<long> off(static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double p = spec.power[k];
      if (!ok(k) || p < cut) continue;
      const auto idx = g.multi_index(k);
      bool is_max = true;
      std::fill(off.begin(), off.end(), -1);
      std::vector<std::size_t> nb(idx.size());
      while (is_max) {
        bool centre = true, inside = true;
        for (std::size_t a = 0; a < idx.size(); ++a) {
          const long v = static_cast<long>(idx[a]) + off[a];
          if (off[a] != 0) centre = false;
          if (v < 0 || v >= static_cast<long>(g.axis_count(static_cast<int>(a)))) inside = false;
          nb[a] = static_cast<std::size_t>(std::max(v, 0L));
        }
        if (!centre && inside) {
          const std::size_t f = g.flat_index(nb);
          // Plateaus keep only their first node.
          if (ok(f) && (f < k ? spec.power[f] >= p : spec.power[f] > p)) is_max = false;
        }
        std::size_t a = 0;
        while (a < off.size() && ++off[a] > 1) off[a++] = -1;
        if (a == off.size()) break;
      }
      if (is_max) maxima.push_back(k);
    }
  }

  const double half = 0.5 * peak_window_width;
  for (std::size_t k : maxima) {
    Peak pk;
    pk.node = g.node(k);
    pk.location = pk.node;
    pk.height = spec.power[k];
    auto idx = g.multi_index(k);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] == 0 || idx[a] + 1 >= g.axis_count(static_cast<int>(a))) continue;
      auto nb = idx;
      nb[a] = idx[a] - 1;
      const std::size_t fm = g.flat_index(nb);
      nb[a] = idx[a] + 1;
      const std::size_t fp = g.flat_index(nb);
      if (!ok(fm) || !ok(fp)) continue;
      const double pm = spec.power[fm], pp = spec.power[fp];
      const double curv = pm - 2.0 * pk.height + pp;
      if (curv < 0.0) {
        const double delta = std::clamp(0.5 * (pm - pp) / curv, -0.5, 0.5);
        pk.location[a] += delta * g.axes()[a].step;
      }
    }
    Box box;
    for (double c : pk.location) {
      box.lo.push_back(c - half);
      box.hi.push_back(c + half);
    }
    pk.mass = integrate_power(spec, box);
    rep.peaks.push_back(std::move(pk));
  }
  std::stable_sort(rep.peaks.begin(), rep.peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.height > b.height; });
  std::vector<Box> boxes;
  for (const auto& pk : rep.peaks) {
    Box b;
    for (double c : pk.location) {
      b.lo.push_back(c - half);
      b.hi.push_back(c + half);
    }
    boxes.push_back(std::move(b));
  }
  rep.support_boxes = std::move(boxes);

  std::vector<double> outside;
  outside.reserve(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (!ok(k)) continue;
    const auto lam = g.node(k);
    bool covered = false;
    for (const auto& b : rep.support_boxes)
      if (b.contains(lam)) {
        covered = true;
        break;
      }
    if (!covered) outside.push_back(spec.power[k]);
  }
  rep.background_median = median_of(std::move(outside));
  rep.background_level = rep.background_median / std::numbers::ln2;

  Box all;
  for (int a = 0; a < d; ++a) {
    all.lo.push_back(g.axis_value(a, 0));
    all.hi.push_back(g.axis_value(a, g.axis_count(a) - 1));
  }
  rep.total_mass = integrate_power(spec, all);
  return rep;
}

DiagnosticReport singularity_diagnostic(const PointSet& x, const std::vector<double>& L_list,
                                        const FrequencyGrid& grid,
                                        std::optional<double> peak_window_width,
                                        const DiagnosticThresholds& th, unsigned threads) {
  require(L_list.size() >= 3, ErrorCode::invalid_argument, "need at least three window radii");
  for (std::size_t i = 1; i < L_list.size(); ++i)
    require(L_list[i] > L_list[i - 1], ErrorCode::invalid_argument,
            "window radii must increase");
  require(L_list.back() <= x.extent(), ErrorCode::insufficient_extent,
          "largest window radius exceeds the point-set extent");
  DiagnosticReport rep;
  rep.thresholds = th;
  std::vector<Spectrum> spectra;
  std::vector<Peak> final_peaks;
  for (double L : L_list) {
    const double width = peak_window_width ? *peak_window_width : 4.0 / L;
    spectra.push_back(periodogram(x, L, grid, threads));
    const Spectrum& s = spectra.back();
    const PeakReport pr = analyze_peaks(s, width, th.threshold_ratio);
    final_peaks.clear();
    DiagnosticRow row;
    row.L = L;
    row.peak_count = pr.peaks.size();
    for (const auto& pk : pr.peaks) {
      row.peak_mass += pk.mass;
      if (norm(pk.location) > width) {
        final_peaks.push_back(pk);
        row.off_zero_mass += pk.mass;
        row.max_off_zero_height = std::max(row.max_off_zero_height, pk.height);
      }
    }
    row.background = pr.background_level;
    row.background_ratio =
        row.max_off_zero_height > 0 ? row.background / row.max_off_zero_height : INFINITY;
    row.pure_point_fraction = pr.total_mass > 0 ? row.peak_mass / pr.total_mass : 0.0;
    rep.rows.push_back(row);
  }
  // Follow the off-zero peaks found at the largest L back through every L, so
  // a weak peak crossing the threshold does not read as a change in mass.
  for (std::size_t i = 0; i < L_list.size(); ++i) {
    const double width = peak_window_width ? *peak_window_width : 4.0 / L_list[i];
    for (const auto& pk : final_peaks) {
      Box b;
      for (double c : pk.location) {
        b.lo.push_back(c - 0.5 * width);
        b.hi.push_back(c + 0.5 * width);
      }
      rep.rows[i].tracked_mass += integrate_power(spectra[i], b);
    }
  }
  const auto& last = rep.rows.back();
  const auto& prev = rep.rows[rep.rows.size() - 2];
  rep.peaks_stable = last.tracked_mass > 0 && prev.tracked_mass > 0 &&
                     std::fabs(last.tracked_mass / prev.tracked_mass - 1) < th.mass_drift;
  rep.background_stable = last.background > 0 && prev.background > 0 &&
                          std::fabs(last.background / prev.background - 1) < th.background_drift;
  if (rep.peaks_stable && last.background_ratio < th.background_ratio && !rep.background_stable)
    rep.verdict = "singular-dominant";
  else if (rep.background_stable && !rep.peaks_stable)
    rep.verdict = "AC-dominant";
  else
    rep.verdict = "mixed";
  return rep;
}

}  // namespace quasidiff
