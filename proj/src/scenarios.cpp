#include "quasidiff/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>

#include "quasidiff/error.hpp"
#include "quasidiff/io.hpp"
#include "quasidiff/measures.hpp"
#include "quasidiff/metrics.hpp"
#include "quasidiff/perturb.hpp"
#include "quasidiff/rng.hpp"
#include "quasidiff/spectral.hpp"

namespace quasidiff {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median(std::vector<double> v) {
  require(!v.empty(), ErrorCode::invalid_argument, "median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t i) {
  return Stream(seed, tag, i)();
}

// Count of consecutive pairs that fail to strictly decrease.
int non_decreasing_steps(const std::vector<double>& v) {
  int bad = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) ++bad;
  return bad;
}

std::vector<double> lattice_coords(double shift, double spacing, double extent) {
  std::vector<double> c;
  const long lo = static_cast<long>(std::ceil((-extent - shift) / spacing));
  const long hi = static_cast<long>(std::floor((extent - shift) / spacing));
  for (long k = lo; k <= hi; ++k) c.push_back(static_cast<double>(k) * spacing + shift);
  return c;
}

PointSet shifted_lattice(double shift, double extent) {
  return PointSet(1, lattice_coords(shift, 1.0, extent), 1.0, extent,
                  "Z+" + format_double(shift));
}

// Z without the nonzero multiples of m.
PointSet lattice_without_multiples(long m, double extent) {
  std::vector<double> c;
  for (double v : lattice_coords(0.0, 1.0, extent)) {
    const long k = std::lround(v);
    if (k == 0 || k % m != 0) c.push_back(v);
  }
  return PointSet(1, std::move(c), 1.0, extent, "Z-" + std::to_string(m) + "Z");
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    out += keep ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : '_';
  }
  return out;
}

struct Runner {
  const ScenarioConfig& cf;
  ScenarioResult& res;

  const Json& p(const char* key) const {
    require(cf.params.contains(key), ErrorCode::config_error,
            std::string("missing parameter '") + key + "'");
    return cf.params.at(key);
  }
  double num(const char* key) const { return p(key).get<double>(); }
  long integer(const char* key) const { return p(key).get<long>(); }
  std::vector<double> nums(const char* key) const { return p(key).get<std::vector<double>>(); }
  std::vector<long> ints(const char* key) const { return p(key).get<std::vector<long>>(); }

  void check(std::string name, double value, std::string op, double threshold, std::string detail = {}) {
    res.criteria.push_back(make_criterion(std::move(name), value, std::move(op), threshold, std::move(detail)));
  }
  Table& table(std::string title, std::vector<std::string> columns, PlotKind kind = PlotKind::line) {
    res.tables.push_back(Table{std::move(title), kind, std::move(columns), {}});
    return res.tables.back();
  }
};

// Jittered lattice of spacing 1.25 with random defects; gaps stay above 1.
PointSet random_window(Stream& rng, double extent, double shift, double jitter, double defect_rate,
                       const std::string& label) {
  std::vector<double> c;
  for (double v : lattice_coords(shift, 1.25, extent - jitter)) {
    const double j = jitter * (2.0 * rng.uniform() - 1.0);
    if (rng.uniform() < defect_rate) continue;
    c.push_back(v + j);
  }
  return PointSet(1, std::move(c), 1.0, extent, label);
}

// ---------------------------------------------------------------------------

void metric_axioms(Runner& r) {
  const double extent = r.num("extent");
  const double eps_tol = r.num("eps_tol");
  const long triples = r.integer("triples");
  const LGrid grid = LGrid::integers(1, r.integer("L_max"));

  double sym_gap = 0.0, id_max = 0.0, worst_excess = -kInf;
  long violations = 0;
  Table& t = r.table("triangle slack", {"triple", "rho_xy", "rho_yz", "rho_xz", "slack"}, PlotKind::scatter);
  for (long i = 0; i < triples; ++i) {
    Stream rng(r.cf.seed, "metric-axioms", static_cast<std::uint64_t>(i));
    std::vector<PointSet> s;
    for (int k = 0; k < 3; ++k) {
      const double shift = 0.3 * rng.uniform();
      const double defects = 0.1 * rng.uniform();
      s.push_back(random_window(rng, extent, shift, 0.1, defects, "t" + std::to_string(k)));
    }
    auto rho = [&](int a, int b) { return rho_stat(s[a], s[b], grid, 1.0, eps_tol).value; };
    const double xy = rho(0, 1), yx = rho(1, 0), yz = rho(1, 2), zy = rho(2, 1), xz = rho(0, 2),
                 zx = rho(2, 0);
    sym_gap = std::max({sym_gap, std::abs(xy - yx), std::abs(yz - zy), std::abs(xz - zx)});
    id_max = std::max(id_max, rho(i % 3, i % 3));
    // every ordering of the triangle inequality
    const double excess = std::max({xz - (xy + yz), xy - (xz + yz), yz - (xy + xz)});
    worst_excess = std::max(worst_excess, excess);
    if (excess > 2.0 * eps_tol) ++violations;
    t.rows.push_back({static_cast<double>(i), xy, yz, xz, -excess});
  }
  r.check("symmetry-max-difference", sym_gap, "==", 0.0);
  r.check("identity-max", id_max, "==", 0.0);
  r.check("triangle-violations", static_cast<double>(violations), "==", 0.0,
          "worst excess " + format_double(worst_excess) + ", allowance " + format_double(2 * eps_tol));

  // Small-distance implication: rho_stat < eps < 1/2 forces d_H < eps at radius 1/eps.
  const long pairs = r.integer("implication_pairs");
  long accepted = 0, holds = 0;
  Table& ti = r.table("implication", {"eps", "rho_stat", "hausdorff"}, PlotKind::scatter);
  for (long attempt = 0; accepted < pairs && attempt < 20 * pairs; ++attempt) {
    Stream rng(r.cf.seed, "implication", static_cast<std::uint64_t>(attempt));
    const PointSet x = random_window(rng, extent, 0.3 * rng.uniform(), 0.1, 0.05 * rng.uniform(), "x");
    std::vector<double> c;
    const double wiggle = 0.05 * rng.uniform();
    const double drop_rate = 0.01 * rng.uniform();
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (rng.uniform() < drop_rate) continue;
      const double v = x[k][0] + wiggle * (2.0 * rng.uniform() - 1.0);
      if (std::abs(v) <= extent) c.push_back(v);
    }
    const PointSet y(1, std::move(c), 1.0, extent, "y");
    const double eps = 0.05 + 0.4 * rng.uniform();
    std::vector<double> g;
    for (long L = 1; L <= r.integer("L_max"); ++L) g.push_back(static_cast<double>(L));
    g.push_back(1.0 / eps);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    const double rho = rho_stat(x, y, LGrid(g), 1.0, eps_tol).value;
    if (!(rho < eps)) continue;
    ++accepted;
    const double dh = hausdorff_distance(window(x, 1.0 / eps), window(y, 1.0 / eps));
    if (dh < eps) ++holds;
    ti.rows.push_back({eps, rho, dh});
  }
  r.check("implication-pairs", static_cast<double>(accepted), ">=", static_cast<double>(pairs));
  r.check("implication-holds", static_cast<double>(holds), ">=", static_cast<double>(pairs));

  // Derived values on Z.
  const double big = r.num("derived_L_max");
  const PointSet z = gen_lattice(1, 1.0, big);
  std::vector<double> squares;
  for (int k = 2; k <= 31; ++k) squares.push_back(static_cast<double>(k * k));
  const PointSet z_sq = remove_near(z, squares, 1e-6).set;
  const LGrid gbig = LGrid::integers(1, static_cast<long>(big));
  const double v1 = rho_stat(z, z_sq, gbig, 1.0, eps_tol).value;
  r.check("rho-stat-squares", std::abs(v1 - 0.25), "<=", 1e-6, "value " + format_double(v1));
  const PointSet zs = shifted_lattice(0.49, big);
  const MetricResult v2 = rho_stat(z, zs, gbig, 1.0, eps_tol);
  r.check("rho-stat-shift-capped", std::abs(v2.value - 0.5), "==", 0.0,
          std::string(v2.capped ? "capped" : "not capped") + " at " + format_double(v2.value));
}

void completeness(Runner& r) {
  const long levels = r.integer("levels");
  const double L_max = r.num("L_max");
  const LGrid grid = LGrid::integers(1, static_cast<long>(L_max));
  const double eps_tol = r.num("eps_tol");
  const PointSet z = gen_lattice(1, 1.0, L_max);
  std::vector<PointSet> xs;
  for (long k = 1; k <= levels + 1; ++k) xs.push_back(lattice_without_multiples(1L << (k + 3), L_max));

  Table& t = r.table("dyadic bound", {"k", "rho_to_limit", "bound", "rho_step"});
  double worst_bound = 0.0, worst_step = 0.0;
  for (long k = 1; k <= levels; ++k) {
    const double to_limit = rho_stat(xs[k - 1], z, grid, 1.0, eps_tol).value;
    const double step = rho_stat(xs[k - 1], xs[k], grid, 1.0, eps_tol).value;
    const double bound = std::ldexp(1.0, static_cast<int>(1 - k));
    worst_bound = std::max(worst_bound, to_limit / bound);
    worst_step = std::max(worst_step, step / std::ldexp(1.0, static_cast<int>(-k)));
    t.rows.push_back({static_cast<double>(k), to_limit, bound, step});
  }
  r.check("dyadic-bound-ratio", worst_bound, "<=", 1.0, "max rho(X_k, X) * 2^(k-1)");
  r.check("cauchy-step-ratio", worst_step, "<=", 1.0, "max rho(X_k, X_k+1) * 2^k");
}

void gh_vs_vague(Runner& r) {
  const double eps_tol = r.num("eps_tol");
  const double extent = 1.0 / eps_tol;
  const auto ns = r.ints("n_list");
  const double hw = r.num("family_half_width"), radius = r.num("family_radius");
  std::vector<double> centres;
  for (long k = -static_cast<long>(hw); k <= static_cast<long>(hw); ++k) centres.push_back(static_cast<double>(k));
  const TestFamily family = TestFamily::at_points(1, centres, radius);

  const PointSet z = gen_lattice(1, 1.0, extent);
  const AtomicMeasure dz = dirac_comb(z);
  std::vector<double> shift_gh, shift_gap, esc_gh, esc_gap, stuck_gh, stuck_gap;
  Table& t = r.table("gh and vague gaps",
                     {"n", "shift_rho_gh", "shift_gap", "escape_rho_gh", "escape_gap", "stuck_rho_gh", "stuck_gap"});
  for (long n : ns) {
    const double nn = static_cast<double>(n);
    const PointSet a = shifted_lattice(1.0 / nn, extent);
    const double target = nn;
    const PointSet b = remove_near(z, std::span<const double>(&target, 1), 1e-6).set;
    const double zero = 0.0;
    const PointSet c = remove_near(z, std::span<const double>(&zero, 1), 1e-6).set;
    shift_gh.push_back(rho_gh(a, z, eps_tol).value);
    shift_gap.push_back(vague_gap(dirac_comb(a), dz, family));
    esc_gh.push_back(rho_gh(b, z, eps_tol).value);
    esc_gap.push_back(vague_gap(dirac_comb(b), dz, family));
    stuck_gh.push_back(rho_gh(c, z, eps_tol).value);
    stuck_gap.push_back(vague_gap(dirac_comb(c), dz, family));
    t.rows.push_back({nn, shift_gh.back(), shift_gap.back(), esc_gh.back(), esc_gap.back(),
                      stuck_gh.back(), stuck_gap.back()});
  }
  const double n_last = static_cast<double>(ns.back());
  r.check("shift-rho-gh-decreasing", non_decreasing_steps(shift_gh), "==", 0);
  r.check("shift-vague-decreasing", non_decreasing_steps(shift_gap), "==", 0);
  r.check("shift-rho-gh-final", shift_gh.back(), "<=", 2.0 / n_last);
  r.check("shift-vague-final", shift_gap.back(), "<=", 1.0 / (radius * n_last) + 1e-12);
  r.check("escape-rho-gh-final", esc_gh.back(), "<=", 1.0 / n_last + 2 * eps_tol);
  r.check("escape-vague-final", esc_gap.back(), "==", 0.0);
  r.check("stuck-rho-gh-min", *std::min_element(stuck_gh.begin(), stuck_gh.end()), ">=", 0.25);
  r.check("stuck-vague-min", *std::min_element(stuck_gap.begin(), stuck_gap.end()), ">=", 1.0);
}

void theorem_a(Runner& r) {
  const double L = r.num("L");
  const auto ns = r.ints("n_list");
  const PointSet x = gen_fibonacci(L);
  const LGrid grid = LGrid::integers(1, static_cast<long>(L));
  const double max_lag = r.num("max_lag");
  const double hw = r.num("family_half_width");
  const TestFamily family = TestFamily::tent_grid({-hw}, {hw}, static_cast<int>(r.integer("family_count")),
                                                  r.num("family_radius"));
  const AtomicMeasure gx = autocorrelation(x, L, 1e-9, max_lag);

  // Nearest points of X to +-k^4, k >= n.
  auto defects = [&](long n) {
    std::vector<double> targets;
    for (long k = n;; ++k) {
      const double q = std::pow(static_cast<double>(k), 4);
      if (q > L + 1.0) break;
      for (double t : {q, -q}) {
        const double* lo = std::lower_bound(x.coords().data(), x.coords().data() + x.size(), t);
        double best = kInf, pick = 0.0;
        for (const double* it : {lo - 1, lo}) {
          if (it < x.coords().data() || it >= x.coords().data() + x.size()) continue;
          if (std::abs(*it - t) < best) best = std::abs(*it - t), pick = *it;
        }
        if (best < kInf) targets.push_back(pick);
      }
    }
    return targets;
  };

  std::vector<double> rates, gaps;
  Table& t = r.table("defect rate and autocorrelation gap", {"n", "defects", "ratio_sup", "vague_gap"});
  for (long n : ns) {
    const auto targets = defects(n);
    const PointSet xn = targets.empty() ? x : remove_near(x, targets, 1e-9).set;
    rates.push_back(ratio_sup(xn, x, r.num("eps"), 0.5, grid).value);
    gaps.push_back(vague_gap(autocorrelation(xn, L, 1e-9, max_lag), gx, family));
    t.rows.push_back({static_cast<double>(n), static_cast<double>(x.size() - xn.size()), rates.back(), gaps.back()});
  }
  r.check("rate-condition-decreasing", non_decreasing_steps(rates), "==", 0);
  r.check("gap-last-over-first", gaps.back() / gaps.front(), "<", 0.5);
  r.check("gap-last", gaps.back(), "<", 0.01);

  // Unique accumulation point: gamma_{X,L} settles as L grows.
  const double acc = vague_gap(autocorrelation(x, L / 2, 1e-9, max_lag), gx, family);
  r.check("autocorrelation-settles", acc, "<", 0.01, "gap between L/2 and L");

  const auto L_list = r.nums("L_list");
  const auto diag = singularity_diagnostic(x, L_list, make_grid(r.p("frequency_grid")), std::nullopt, {},
                                           r.cf.threads);
  r.res.notes["limit-verdict"] = diag.verdict;
  r.check("limit-singular-dominant", diag.verdict == "singular-dominant" ? 1.0 : 0.0, "==", 1.0, diag.verdict);
  Table& td = r.table("limit diagnostic", {"L", "off_zero_mass", "tracked_mass", "background_ratio"});
  for (const auto& row : diag.rows)
    td.rows.push_back({row.L, row.off_zero_mass, row.tracked_mass, row.background_ratio});
}

void gh_counterexample(Runner& r) {
  const double eps_tol = r.num("eps_tol");
  const double extent = 1.0 / eps_tol;
  const PointSet z = gen_lattice(1, 1.0, extent);
  const PointSet fib = gen_fibonacci(extent);
  const double radius = r.num("family_radius");
  const std::vector<double> centres = {-1.0, 0.0, 1.0};
  const TestFamily family = TestFamily::at_points(1, centres, radius);
  Table& t = r.table("splice", {"n", "rho_gh", "one_over_n", "vague_gap"});
  double worst_gh = -kInf, worst_gap = kInf;
  for (long n : r.ints("n_list")) {
    const double nn = static_cast<double>(n);
    const PointSet xn = splice(z, fib, nn, true);
    const double gh = rho_gh(xn, z, eps_tol).value;
    const double L = r.num("L_factor") * nn;
    const double gap = vague_gap(autocorrelation(xn, L, 1e-9, 1.5), autocorrelation(z, L, 1e-9, 1.5), family);
    // rho_gh is found on the grid k * eps_tol, so allow rounding of 1/n onto it
    worst_gh = std::max(worst_gh, gh - 1.0 / nn);
    worst_gap = std::min(worst_gap, gap);
    t.rows.push_back({nn, gh, 1.0 / nn, gap});
  }
  r.check("rho-gh-minus-one-over-n", worst_gh, "<=", 1e-12);
  r.check("vague-gap-min", worst_gap, ">=", r.num("gap_threshold"));
}

// Tile midpoints next to +-n k^3, k >= 1.
PointSet sparse_extras(const PointSet& x, long n) {
  std::vector<double> c;
  const double* b = x.coords().data();
  const double* e = b + x.size();
  for (long k = 1;; ++k) {
    const double q = static_cast<double>(n) * std::pow(static_cast<double>(k), 3);
    if (q >= x.extent()) break;
    for (double t : {q, -q}) {
      const double* hi = std::upper_bound(b, e, t);
      if (hi == b || hi == e) continue;
      c.push_back(0.5 * (*(hi - 1) + *hi));
    }
  }
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return PointSet(1, std::move(c), 0.0, x.extent(), "extras-" + std::to_string(n));
}

void uniform_quasicrystalline(Runner& r) {
  const double L = r.num("L");
  const PointSet x = gen_fibonacci(L);
  const FrequencyGrid grid = make_grid(r.p("frequency_grid"));
  const double width = 4.0 / L, step = grid.axes()[0].step;
  const double max_lag = r.num("max_lag");
  const TestFamily lag_family = TestFamily::tent_grid({-max_lag}, {max_lag}, 49, 0.25);
  const double hw = r.num("family_half_width");
  const TestFamily family = TestFamily::tent_grid({-hw}, {hw}, static_cast<int>(8 * hw + 1), 0.25);
  const AtomicMeasure gx = autocorrelation(x, L, 1e-9, max_lag);
  const AtomicMeasure dx = dirac_comb(x);

  std::vector<Box> common;
  double dirac_gap = 0.0;
  Table& t = r.table("sparse unions", {"n", "extra_density", "peaks", "dirac_gap", "autocorrelation_gap"});
  for (long n : r.ints("n_list")) {
    const SparseUnion u = sparse_union(x, sparse_extras(x, n));
    const auto rep = analyze_peaks(periodogram(u.set, L, grid, r.cf.threads), width, 0.1);
    common.insert(common.end(), rep.support_boxes.begin(), rep.support_boxes.end());
    dirac_gap = vague_gap(dirac_comb(u.set), dx, family);
    const double ac_gap = vague_gap(autocorrelation(u.set, L, 1e-9, max_lag), gx, lag_family);
    t.rows.push_back({static_cast<double>(n), u.extra_density, static_cast<double>(rep.peaks.size()),
                      dirac_gap, ac_gap});
  }
  const auto limit = analyze_peaks(periodogram(x, L, grid, r.cf.threads), width, 0.1);
  long outside = 0;
  for (const auto& b : limit.support_boxes) {
    const bool hit = std::any_of(common.begin(), common.end(),
                                 [&](const Box& c) { return c.intersects(b, step); });
    if (!hit) ++outside;
  }
  r.check("limit-support-outside-common", static_cast<double>(outside), "==", 0.0,
          std::to_string(limit.support_boxes.size()) + " limit boxes");
  r.check("dirac-gap-final", dirac_gap, "==", 0.0, "sequence converges on the fixed window");
  const auto diag = singularity_diagnostic(x, r.nums("L_list"), grid, std::nullopt, {}, r.cf.threads);
  r.res.notes["limit-verdict"] = diag.verdict;
  r.check("limit-singular-dominant", diag.verdict == "singular-dominant" ? 1.0 : 0.0, "==", 1.0, diag.verdict);
}

void ft_continuity(Runner& r) {
  const double L = r.num("L");
  const FrequencyGrid grid = make_grid(r.p("frequency_grid"));
  const PointSet z = gen_lattice(1, 1.0, L);
  const Spectrum sz = amplitude_spectrum(z, L, grid, r.cf.threads);
  const LGrid lg = LGrid::integers(1, static_cast<long>(L));
  std::vector<double> devs;
  double worst_rho = 0.0;
  Table& t = r.table("amplitude deviation", {"n", "rho_stat", "max_deviation"});
  for (long n : r.ints("n_list")) {
    const PointSet xn = lattice_without_multiples(4 * n, L);
    const double rho = rho_stat(xn, z, lg, 1.0).value;
    worst_rho = std::max(worst_rho, rho * static_cast<double>(n));
    const Spectrum s = amplitude_spectrum(xn, L, grid, r.cf.threads);
    double dev = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) dev = std::max(dev, std::abs(s.amplitude[k] - sz.amplitude[k]));
    devs.push_back(dev);
    t.rows.push_back({static_cast<double>(n), rho, dev});
  }
  r.check("rho-stat-times-n", worst_rho, "<=", 1.0);
  r.check("deviation-decreasing", non_decreasing_steps(devs), "==", 0);
  r.check("deviation-final", devs.back(), "<", r.num("final_threshold"));
}

void boundary(Runner& r) {
  const NoiseModel m = make_noise(r.p("noise"), 1);
  const PointSet z = gen_lattice(1, 1.0, r.num("extent"));
  const auto L_list = r.nums("L_list");
  const long seeds = r.integer("seeds");
  std::vector<std::vector<double>> ratios(L_list.size());
  for (long s = 0; s < seeds; ++s) {
    const auto rep = boundary_crossings(z, m, derive_seed(r.cf.seed, "boundary", s), L_list);
    for (std::size_t i = 0; i < L_list.size(); ++i) ratios[i].push_back(rep.rows[i].ratio);
  }
  std::vector<double> med;
  Table& t = r.table("boundary crossings", {"L", "median_ratio", "max_ratio"});
  for (std::size_t i = 0; i < L_list.size(); ++i) {
    med.push_back(median(ratios[i]));
    t.rows.push_back({L_list[i], med.back(), *std::max_element(ratios[i].begin(), ratios[i].end())});
  }
  r.check("median-decreasing", non_decreasing_steps(med), "==", 0);
  r.check("median-final", med.back(), "<=", r.num("final_threshold"));
}

void recovery(Runner& r) {
  const NoiseModel m = make_noise(r.p("noise"), 1);
  const double L = r.num("L");
  const PointSet z = gen_lattice(1, 1.0, L + perturbation_margin(m) + 1.0);
  std::vector<std::uint64_t> seeds;
  for (long s = 0; s < r.integer("seeds"); ++s) seeds.push_back(derive_seed(r.cf.seed, "recovery", s));
  const auto rep = recovery_trial(z, m, seeds, {{1.0}, {0.5}, {0.0}}, L, r.num("guard"));
  Table& t = r.table("recovery", {"lambda", "psi", "true_re", "median_abs_error"}, PlotKind::scatter);
  for (const auto& row : rep.rows)
    t.rows.push_back({row.lambda[0], row.psi.real(), row.true_amplitude.real(), row.median_abs_error});
  const double th = r.num("error_threshold");
  std::vector<double> at_half;
  for (const auto& v : rep.rows[1].recovered) at_half.push_back(std::abs(v));
  r.check("bragg-median-error", rep.rows[0].median_abs_error, "<=", th);
  r.check("non-bragg-median-abs", median(at_half), "<=", th);

  const double one = 1.0;
  const double g = char_fn(NoiseModel::gaussian(1, 0.1), std::span(&one, 1)).value.real();
  const double u = char_fn(NoiseModel::uniform(1, 0.25), std::span(&one, 1)).value.real();
  r.check("char-fn-gaussian", std::abs(g - 0.8209), "<=", 1e-4, format_double(g));
  r.check("char-fn-uniform", std::abs(u - 2.0 / std::numbers::pi), "<=", 1e-4, format_double(u));

  // A zero of psi is flagged, never divided by.
  const NoiseModel box = NoiseModel::uniform(1, 0.25);
  const Spectrum s = amplitude_spectrum(z, 10.0, FrequencyGrid({{1.0, 2.0, 1.0}}));
  const Spectrum rec = recover(s, box);
  r.check("psi-zero-flagged", static_cast<double>(rec.valid[1] == 0 && rec.valid[0] == 1), "==", 1.0);

  const auto zero = recovery_trial(gen_lattice(1, 1.0, 10.0), NoiseModel::gaussian(1, 0.0), {1}, {{0.0}}, 5.0);
  r.check("zero-noise-exact", std::abs(zero.rows[0].recovered[0] - cplx(2.2, 0.0)), "==", 0.0);
}

void diffraction_catalog(Runner& r) {
  const unsigned th = r.cf.threads;
  // Counting bounds for every uniformly discrete generator.
  const auto count_L = r.nums("count_L_list");
  const double count_ext = *std::max_element(count_L.begin(), count_L.end());
  long violations = 0, checked = 0;
  Table& tc = r.table("counting", {"L", "generator", "count", "volume_bound", "ratio"}, PlotKind::scatter);
  int gi = 0;
  for (const auto& spec : r.p("generators")) {
    const std::string name = generator_name(spec);
    const PointSet x = make_generator(spec, count_ext, derive_seed(r.cf.seed, name, 0));
    if (x.sep_radius() <= 0.0) {
      r.res.notes["counting-" + name] = "skipped: not uniformly discrete";
      ++gi;
      continue;
    }
    const double r0 = x.sep_radius();
    for (double L : count_L) {
      const double n = static_cast<double>(count_within(x, L));
      const double vol = uniform_tv_bound(x.dim(), r0, L);
      bool ok = n <= vol;
      if (L >= r0) ok = ok && n <= std::pow(3.0 * L / r0, x.dim());
      ++checked;
      if (!ok) ++violations;
      tc.rows.push_back({L, static_cast<double>(gi), n, vol, n / vol});
    }
    ++gi;
  }
  r.check("counting-violations", static_cast<double>(violations), "==", 0.0,
          std::to_string(checked) + " checks");

  // Lattice peak masses with unit windows.
  {
    const double L = r.num("lattice_L");
    const Spectrum s = periodogram(gen_lattice(1, 1.0, L), L, make_grid(r.p("lattice_grid")), th);
    const double expect = (2.0 * L + 1.0) / L;
    double worst = 0.0;
    Table& t = r.table("lattice peak masses", {"lambda", "mass", "expected"}, PlotKind::scatter);
    for (int k = -2; k <= 2; ++k) {
      const double m = integrate_power(s, Box{{k - 0.5}, {k + 0.5}});
      worst = std::max(worst, std::abs(m - expect));
      t.rows.push_back({static_cast<double>(k), m, expect});
    }
    r.check("lattice-peak-mass", worst, "<=", 1e-3, "expected " + format_double(expect));
  }

  // Diagnostics for the 1-D generators.
  const auto L_list = r.nums("L_list");
  const FrequencyGrid grid = make_grid(r.p("frequency_grid"));
  const double L_top = L_list.back();
  for (const auto& spec : r.p("generators")) {
    const std::string name = generator_name(spec);
    if (generator_dim(spec) != 1) continue;
    const PointSet x = make_generator(spec, L_top, derive_seed(r.cf.seed, name, 0));
    const auto diag = singularity_diagnostic(x, L_list, grid, std::nullopt, {}, th);
    r.res.notes["verdict-" + name] = diag.verdict;
    Table& t = r.table("diagnostic " + name, {"L", "peak_count", "off_zero_mass", "tracked_mass", "background"});
    for (const auto& row : diag.rows)
      t.rows.push_back({row.L, static_cast<double>(row.peak_count), row.off_zero_mass, row.tracked_mass,
                        row.background});
    if (name == "lattice-1d")
      r.check("lattice-singular-dominant", diag.verdict == "singular-dominant", "==", 1.0, diag.verdict);
    if (name == "fibonacci") {
      r.check("fibonacci-singular-dominant", diag.verdict == "singular-dominant", "==", 1.0, diag.verdict);
      const Spectrum top = periodogram(x, L_top, grid, th);
      write_spectrum(fs::path(r.cf.output_dir) / r.res.scenario / "fibonacci_spectrum.csv", top);
    }
  }

  // Fibonacci peaks at L and 2L.
  {
    const double L2 = L_list.back(), L1 = L_list[L_list.size() - 2];
    const PointSet x = gen_fibonacci(L2);
    const auto top = static_cast<std::size_t>(r.integer("top_peaks"));
    auto off_zero = [&](double L) {
      const auto rep = analyze_peaks(periodogram(x, L, grid, th), 4.0 / L, r.num("peak_threshold"));
      std::vector<Peak> out;
      for (const auto& pk : rep.peaks)
        if (std::abs(pk.location[0]) > 4.0 / L && out.size() < top) out.push_back(pk);
      return std::make_pair(out, rep);
    };
    const auto [a, ra] = off_zero(L1);
    const auto [b, rb] = off_zero(L2);
    double pos = 0.0, mass = 0.0;
    Table& t = r.table("fibonacci top peaks", {"location_L", "location_2L", "mass_L", "mass_2L"}, PlotKind::scatter);
    for (const auto& pa : a) {
      const Peak* best = nullptr;
      for (const auto& pb : b)
        if (!best || std::abs(pb.location[0] - pa.location[0]) < std::abs(best->location[0] - pa.location[0]))
          best = &pb;
      if (!best) {
        pos = kInf;
        continue;
      }
      pos = std::max(pos, std::abs(best->location[0] - pa.location[0]));
      mass = std::max(mass, std::abs(best->mass - pa.mass) / pa.mass);
      t.rows.push_back({pa.location[0], best->location[0], pa.mass, best->mass});
    }
    r.check("fibonacci-top-peaks", static_cast<double>(std::min(a.size(), b.size())), ">=", static_cast<double>(top));
    r.check("fibonacci-position-drift", pos, "<", 1e-3);
    r.check("fibonacci-mass-drift", mass, "<", 0.05);
    const double bg = b.empty() ? kInf : rb.background_level / b.front().height;
    r.check("fibonacci-background-ratio", bg, "<", 0.01);
  }

  // Poisson control over many seeds.
  {
    const auto pl = r.nums("poisson_L_list");
    const FrequencyGrid pg = make_grid(r.p("poisson_grid"));
    const long seeds = r.integer("poisson_seeds");
    double sum = 0.0;
    long nodes = 0, ac = 0;
    Table& t = r.table("poisson seeds", {"seed", "mean_power", "ac"}, PlotKind::scatter);
    for (long s = 0; s < seeds; ++s) {
      const PointSet x = gen_poisson(1.0, 1, pl.back(), derive_seed(r.cf.seed, "poisson", s));
      const Spectrum sp = periodogram(x, pl.back(), pg, th);
      double local = 0.0;
      long cnt = 0;
      for (std::size_t k = 0; k < sp.size(); ++k) {
        const double lam = pg.node(k)[0];
        if (lam >= 0.05 && lam <= 0.5) local += sp.power[k], ++cnt;
      }
      sum += local, nodes += cnt;
      const bool is_ac = singularity_diagnostic(x, pl, pg, std::nullopt, {}, th).verdict == "AC-dominant";
      ac += is_ac;
      t.rows.push_back({static_cast<double>(s), local / static_cast<double>(cnt), is_ac ? 1.0 : 0.0});
    }
    const double mean = sum / static_cast<double>(nodes);
    r.check("poisson-mean-power-deviation", std::abs(mean - 2.0) / 2.0, "<=", 0.1, "mean " + format_double(mean));
    r.check("poisson-ac-seeds", static_cast<double>(ac), ">=", std::ceil(0.9 * static_cast<double>(seeds)));
  }

  // Periodogram against the Fourier sum of the autocorrelation atoms.
  {
    const long sets = r.integer("wiener_sets");
    const long maxp = r.integer("wiener_max_points");
    const long nf = r.integer("wiener_frequencies");
    double worst = 0.0;
    for (long s = 0; s < sets; ++s) {
      Stream rng(r.cf.seed, "wiener", static_cast<std::uint64_t>(s));
      const double L = 20.0 + 180.0 * rng.uniform();
      const long n = 2 + static_cast<long>(rng.uniform() * static_cast<double>(maxp - 1));
      std::vector<double> c;
      for (long i = 0; i < n; ++i) c.push_back(L * (2.0 * rng.uniform() - 1.0));
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
      const PointSet x(1, std::move(c), 0.0, L, "random");
      const double f0 = rng.uniform(), df = 0.01 + 0.1 * rng.uniform();
      const FrequencyGrid fg({{f0, f0 + df * static_cast<double>(nf - 1), df}});
      const Spectrum sp = periodogram(x, L, fg, th);
      const AtomicMeasure g = autocorrelation(x, L, 0.0);
      const double scale = std::abs(g.total_mass());
      const auto ft = fourier_transform(g, fg, th);
      for (std::size_t k = 0; k < sp.size(); ++k)
        worst = std::max(worst, std::abs(ft[k] - sp.power[k]) / scale);
    }
    r.check("wiener-relative-error", worst, "<=", 1e-9, "relative to the autocorrelation mass");
  }

  // 2-D pictures.
  {
    const double L = r.num("heatmap_L");
    const FrequencyGrid hg = make_grid(r.p("heatmap_grid"));
    for (const auto& spec : r.p("generators")) {
      const std::string name = generator_name(spec);
      if (generator_dim(spec) != 2) continue;
      const PointSet x = make_generator(spec, L, derive_seed(r.cf.seed, name, 0));
      const Spectrum sp = periodogram(x, L, hg, th);
      Table& t = r.table("periodogram " + name, {"lambda_1", "lambda_2", "log10_power"}, PlotKind::heatmap);
      for (std::size_t k = 0; k < sp.size(); ++k) {
        const auto lam = hg.node(k);
        t.rows.push_back({lam[0], lam[1], std::log10(sp.power[k] + 1e-3)});
      }
    }
  }
}

using Pipeline = std::function<void(Runner&)>;

const std::map<std::string, Pipeline>& pipelines() {
  static const std::map<std::string, Pipeline> m = {
      {"metric-axioms", metric_axioms},
      {"completeness", completeness},
      {"gh-vs-vague", gh_vs_vague},
      {"theoremA", theorem_a},
      {"gh-counterexample", gh_counterexample},
      {"uniform-quasicrystalline", uniform_quasicrystalline},
      {"ft-continuity", ft_continuity},
      {"boundary", boundary},
      {"recovery", recovery},
      {"diffraction-catalog", diffraction_catalog},
  };
  return m;
}

}  // namespace

Criterion make_criterion(std::string name, double value, std::string op, double threshold,
                         std::string detail) {
  bool pass = false;
  if (op == "<") pass = value < threshold;
  else if (op == "<=") pass = value <= threshold;
  else if (op == ">") pass = value > threshold;
  else if (op == ">=") pass = value >= threshold;
  else if (op == "==") pass = value == threshold;
  else fail(ErrorCode::invalid_argument, "unknown comparison '" + op + "'");
  return {std::move(name), value, std::move(op), threshold, pass, std::move(detail)};
}

bool ScenarioResult::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

const Criterion& ScenarioResult::criterion(const std::string& name) const {
  for (const auto& c : criteria)
    if (c.name == name) return c;
  fail(ErrorCode::invalid_argument, "no criterion named '" + name + "'");
}

const Table& ScenarioResult::table(const std::string& title) const {
  for (const auto& t : tables)
    if (t.title == title) return t;
  fail(ErrorCode::invalid_argument, "no table titled '" + title + "'");
}

Json ScenarioResult::to_json() const {
  Json crit = Json::array();
  auto finite_or_string = [](double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); };
  for (const auto& c : criteria)
    crit.push_back({{"name", c.name},
                    {"value", finite_or_string(c.value)},
                    {"op", c.op},
                    {"threshold", finite_or_string(c.threshold)},
                    {"pass", c.pass},
                    {"detail", c.detail}});
  Json tabs = Json::array();
  for (const auto& t : tables) tabs.push_back({{"title", t.title}, {"columns", t.columns}, {"rows", t.rows.size()}});
  return {{"scenario", scenario}, {"config_hash", config_hash}, {"criteria", crit},
          {"tables", tabs},       {"notes", notes},             {"files", files},
          {"all_pass", all_pass()}};
}

ScenarioResult run_scenario(const ScenarioConfig& cf, bool write) {
  const auto& all = pipelines();
  const auto it = all.find(cf.scenario);
  require(it != all.end(), ErrorCode::unknown_scenario, "no scenario named '" + cf.scenario + "'");

  const fs::path dir = fs::path(cf.output_dir) / cf.scenario;
  if (write) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec && fs::is_directory(dir), ErrorCode::io_error, "cannot create output directory " + dir.string());
    const fs::path probe = dir / ".write-probe";
    atomic_write(probe, "");
    fs::remove(probe, ec);
  }

  ScenarioResult res;
  res.scenario = cf.scenario;
  res.config_hash = cf.hash();
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig run_cf = cf;
  if (!write) run_cf.output_dir = (fs::temp_directory_path() / "quasidiff-scratch").string();
  Runner runner{run_cf, res};
  it->second(runner);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (write) {
    if (fs::exists(dir / "fibonacci_spectrum.csv")) {
      res.files.push_back(cf.scenario + "/fibonacci_spectrum.csv");
      res.files.push_back(cf.scenario + "/fibonacci_spectrum.csv.json");
    }
    for (const auto& t : res.tables) {
      if (t.empty()) continue;
      const std::string base = slug(t.title);
      atomic_write(dir / (base + ".csv"), t.to_csv());
      plot_emit(t, t.kind, dir / (base + ".svg"), res.config_hash);
      res.files.push_back(cf.scenario + "/" + base + ".csv");
      res.files.push_back(cf.scenario + "/" + base + ".svg");
    }
    res.files.push_back(cf.scenario + "/config.json");
    res.files.push_back(cf.scenario + "/result.json");
    Json conf = cf.to_json();
    conf.erase("output_dir");
    conf.erase("threads");
    atomic_write(dir / "config.json", conf.dump(2) + "\n");
    atomic_write(dir / "result.json", res.to_json().dump(2) + "\n");
  }
  return res;
}

}  // namespace quasidiff
