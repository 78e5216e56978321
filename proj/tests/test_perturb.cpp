#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "quasidiff/error.hpp"
#include "quasidiff/perturb.hpp"

using namespace quasidiff;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

std::vector<double> v1(double a) { return {a}; }

}  // namespace

TEST_CASE("zero noise leaves the set alone") {
  auto z = gen_lattice(1, 1.0, 50.0);
  for (const auto& m : {NoiseModel::gaussian(1, 0.0), NoiseModel::uniform(1, 0.0)}) {
    CHECK(m.is_zero());
    CHECK(perturb(z, m, 7) == z);
    CHECK(perturbation_margin(m) == 0.0);
  }
}

TEST_CASE("perturbation is deterministic and keyed by seed") {
  auto z = gen_lattice(2, 1.0, 20.0);
  auto m = NoiseModel::gaussian(2, 0.1);
  auto a = perturb(z, m, 3), b = perturb(z, m, 3), c = perturb(z, m, 4);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.extent() == doctest::Approx(20.0 - perturbation_margin(m)));
  CHECK(a.sep_radius() == doctest::Approx(min_gap(a)));
  CHECK(a.sep_radius() > 0.0);
  CHECK_THROWS_AS(perturb(z, NoiseModel::gaussian(1, 0.1), 3), Error);
}

TEST_CASE("gaussian displacements have the half-normal mean") {
  auto z = gen_lattice(1, 1.0, 1000.0);
  auto m = NoiseModel::gaussian(1, 0.1);
  double total = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    // Same streams as perturb: point i uses (seed, label, i).
    for (std::size_t i = 0; i < z.size(); ++i) {
      Stream rng(seed, z.label(), i);
      double xi = 0.0;
      m.sample(rng, &xi);
      total += std::fabs(xi);
      ++count;
    }
    // The stored set agrees with the per-point draws.
    auto p = perturb(z, m, seed);
    Stream rng(seed, z.label(), 1000);
    double xi = 0.0;
    m.sample(rng, &xi);
    const std::vector<double> target{z[1000][0] + xi};
    bool found = false;
    for (std::size_t k = 0; k < p.size(); ++k) found = found || p[k][0] == target[0];
    CHECK(found);
  }
  CHECK(total / count == doctest::Approx(0.1 * std::sqrt(2.0 / std::numbers::pi)).epsilon(0.005 / 0.0798));
}

TEST_CASE("perturbation margin is the 99.9th percentile") {
  auto m = NoiseModel::gaussian(1, 0.1);
  // |N(0, 0.01)| has 99.9th percentile 0.1 * 3.2905.
  CHECK(perturbation_margin(m) == doctest::Approx(0.32905).epsilon(0.02));
  CHECK(perturbation_margin(NoiseModel::uniform(1, 0.25)) == doctest::Approx(0.24975).epsilon(0.01));
  CHECK_THROWS_AS(perturb(gen_lattice(1, 1.0, 2.0), NoiseModel::pareto_radial(1, 1.0, 5.0), 1),
                  Error);
}

TEST_CASE("characteristic functions") {
  const std::vector<NoiseModel> models{
      NoiseModel::gaussian(1, 0.1), NoiseModel::uniform(1, 0.25),
      NoiseModel::mixture(1, {{0.3, {0.2}, {0.05}}, {0.7, {-0.1}, {0.1}}}),
      NoiseModel::pareto_radial(1, 3.0, 0.05)};
  for (const auto& m : models) CHECK(char_fn(m, v1(0.0)).value == cplx(1.0));

  CHECK(char_fn(models[0], v1(1.0)).value.real() == doctest::Approx(0.8209).epsilon(1e-4 / 0.8209));
  CHECK(char_fn(models[0], v1(1.0)).value.real() ==
        doctest::Approx(std::exp(-2 * std::numbers::pi * std::numbers::pi * 0.01)));
  CHECK(char_fn(models[1], v1(1.0)).value.real() == doctest::Approx(2 / std::numbers::pi).epsilon(1e-12));
  CHECK(std::fabs(char_fn(models[1], v1(2.0)).value.real()) < 1e-15);
  CHECK_FALSE(char_fn(models[0], v1(1.0)).monte_carlo);
  CHECK(char_fn(models[3], v1(1.0)).monte_carlo);
  CHECK(char_fn(models[3], v1(1.0)).std_error > 0.0);
  CHECK_THROWS_AS(char_fn(models[0], v1(1.0), 0), Error);

  // Monte Carlo agrees with the closed forms.
  for (std::size_t k = 0; k < 3; ++k) {
    for (double lam : {0.3, 1.0, 2.7}) {
      const auto exact = char_fn(models[k], v1(lam));
      const auto mc = char_fn(models[k], v1(lam), 50000, 17);
      CHECK(std::abs(mc.value - exact.value) <= 3 * mc.std_error + 1e-12);
    }
  }
  // |psi| <= 1 everywhere; 2-D products.
  auto g2 = NoiseModel::gaussian({0.1, 0.2});
  auto u2 = NoiseModel::uniform({0.25, 0.5});
  Stream rng(4);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> lam{8 * rng.uniform() - 4, 8 * rng.uniform() - 4};
    for (const auto& m : {g2, u2}) CHECK(std::abs(char_fn(m, lam).value) <= 1.0);
    for (const auto& m : models) CHECK(std::abs(char_fn(m, v1(lam[0])).value) <= 1.0 + 1e-12);
  }
  const std::vector<double> lam{1.0, 0.5};
  CHECK(char_fn(u2, lam).value.real() ==
        doctest::Approx(2 / std::numbers::pi * std::sin(std::numbers::pi / 2) / (std::numbers::pi / 2)));
}

TEST_CASE("pareto moment flag") {
  CHECK(NoiseModel::pareto_radial(1, 3.0, 0.1).finite_moment());
  CHECK(NoiseModel::pareto_radial(1, 1.05, 0.1, 0.1).warnings().size() == 1);
  CHECK(NoiseModel::pareto_radial(2, 2.5, 0.1, 0.1).finite_moment());
  CHECK_FALSE(NoiseModel::pareto_radial(2, 2.05, 0.1, 0.1).finite_moment());
  CHECK(NoiseModel::gaussian(1, 1.0).warnings().empty());
  CHECK_THROWS_AS(NoiseModel::pareto_radial(1, 0.0, 0.1), Error);
  CHECK_THROWS_AS(NoiseModel::mixture(1, {{0.5, {0.0}, {0.1}}}), Error);
  CHECK_THROWS_AS(NoiseModel::gaussian(1, -0.1), Error);
}

TEST_CASE("recover divides by psi and flags its zeros") {
  auto z = gen_lattice(1, 1.0, 30.0);
  auto g = FrequencyGrid::symmetric(2.5, 0.01);
  auto s = amplitude_spectrum(z, 20.0, g);

  auto same = recover(s, NoiseModel::gaussian(1, 0.0), 1e-3);
  CHECK(same.amplitude == s.amplitude);

  auto m = NoiseModel::gaussian(1, 0.2);
  Spectrum damped = s;
  for (std::size_t k = 0; k < s.size(); ++k) {
    damped.amplitude[k] = s.amplitude[k] * char_fn(m, g.node(k)).value;
    damped.power[k] = 20.0 * std::norm(damped.amplitude[k]);
  }
  auto back = recover(damped, m, 1e-3);
  std::size_t checked = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!back.valid[k]) continue;
    ++checked;
    CHECK(std::abs(back.amplitude[k] - s.amplitude[k]) <= 1e-12 * std::abs(s.amplitude[k]) + 1e-15);
  }
  CHECK(checked > 0);

  auto u = NoiseModel::uniform(1, 0.25);
  auto r = recover(s, u, 1e-9);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double lam = g.node(k)[0];
    if (std::fabs(std::fabs(lam) - 2.0) < 1e-9) {
      CHECK(r.valid[k] == 0);
      CHECK(r.power[k] == 0.0);
    }
    if (std::fabs(lam) < 1.5) CHECK(r.valid[k] == 1);
  }
  CHECK_THROWS_AS(recover(s, NoiseModel::gaussian(2, 0.1)), Error);
  CHECK_THROWS_AS(recover(s, m, 0.0), Error);
}

TEST_CASE("boundary crossings") {
  auto z = gen_lattice(1, 1.0, 1010.0);
  auto zero = boundary_crossings(z, NoiseModel::gaussian(1, 0.0), 1, {10, 100});
  for (const auto& r : zero.rows) CHECK(r.exits + r.entries == 0);

  auto m = NoiseModel::gaussian(1, 0.1);
  int small = 0, not_worse = 0;
  std::vector<double> r100, r1000;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto rep = boundary_crossings(z, m, seed, {100, 1000});
    const auto& a = rep.rows[0];
    const auto& b = rep.rows[1];
    CHECK(a.ratio >= 0.0);
    CHECK(a.ratio <= 0.03);
    if (a.exits + a.entries <= 3) ++small;
    if (b.ratio <= a.ratio) ++not_worse;
    r100.push_back(a.ratio);
    r1000.push_back(b.ratio);
  }
  CHECK(small >= 9);
  CHECK(not_worse >= 9);
  CHECK(median(r1000) < median(r100));
  CHECK(median(r1000) <= 0.005);
  CHECK_THROWS_AS(boundary_crossings(z, m, 1, {1010.0}), Error);
}

TEST_CASE("recovery trials") {
  auto z = gen_lattice(1, 1.0, 2100.0);
  auto exact = recovery_trial(z, NoiseModel::gaussian(1, 0.0), {1, 2}, {{0.0}}, 5.0);
  CHECK(exact.rows[0].recovered[0] == cplx(2.2));
  CHECK(exact.rows[0].median_abs_error == 0.0);

  auto m = NoiseModel::gaussian(1, 0.1);
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  auto rep = recovery_trial(z, m, seeds, {{1.0}, {0.5}}, 2000.0);
  std::vector<double> at1, at_half;
  for (const auto& r : rep.rows[0].recovered) at1.push_back(std::abs(r - 2.0));
  for (const auto& r : rep.rows[1].recovered) at_half.push_back(std::abs(r));
  CHECK(median(at1) <= 0.05);
  CHECK(median(at_half) <= 0.05);
  CHECK(rep.rows[0].median_abs_error <= 0.05);

  CHECK_THROWS_AS(recovery_trial(z, NoiseModel::uniform(1, 0.25), seeds, {{2.0}}, 100.0), Error);
  CHECK_THROWS_AS(recovery_trial(z, m, seeds, {{1.0}}, 2100.0), Error);
}

TEST_CASE("perturbed amplitudes are unbiased") {
  auto z = gen_lattice(1, 1.0, 300.0);
  auto m = NoiseModel::gaussian(1, 0.15);
  const double L = 200.0;
  for (double lam : {0.5, 1.0, 1.37, 2.0}) {
    const cplx target = char_fn(m, v1(lam)).value * exp_sum(window(z, L), v1(lam)) / L;
    cplx sum = 0.0;
    double sq = 0.0;
    std::vector<cplx> vals;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      // Sum over the displaced window points, so no boundary selection enters.
      cplx a = 0.0;
      auto w = window(z, L);
      for (std::size_t i = 0; i < w.size(); ++i) {
        Stream rng(seed, w.label(), i);
        double xi = 0.0;
        m.sample(rng, &xi);
        const double t = (w[i][0] + xi) * lam;
        a += std::polar(1.0, -2 * std::numbers::pi * (t - std::nearbyint(t)));
      }
      vals.push_back(a / L);
      sum += a / L;
    }
    const cplx mean = sum / 50.0;
    for (const auto& v : vals) sq += std::norm(v - mean);
    const double se = std::sqrt(sq / 49.0 / 50.0);
    CHECK(std::abs(mean - target) <= 3 * se);
  }
}

TEST_CASE("perturbed Z is neither purely singular nor absolutely continuous") {
  auto z = gen_lattice(1, 1.0, 1000.0);
  auto p = perturb(z, NoiseModel::gaussian(1, 0.1), 5);
  auto rep = singularity_diagnostic(p, {200, 400, 800}, FrequencyGrid::symmetric(2.5, 1.0 / 3200), 0.5);
  CHECK(rep.verdict == "mixed");
  CHECK(rep.peaks_stable);
  CHECK(rep.background_stable);
  CHECK(rep.rows.back().background > 0.0);
}
