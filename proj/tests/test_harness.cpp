#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "quasidiff/config.hpp"
#include "quasidiff/error.hpp"
#include "quasidiff/io.hpp"
#include "quasidiff/measures.hpp"
#include "quasidiff/plot.hpp"
#include "quasidiff/rng.hpp"
#include "quasidiff/scenarios.hpp"

using namespace quasidiff;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::io_error;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("quasidiff-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::string slurp(const fs::path& p) { return read_file(p); }

}  // namespace

TEST_CASE("shortest decimal round-trips every double") {
  Stream rng(11);
  for (int i = 0; i < 20000; ++i) {
    double v;
    const std::uint64_t bits = rng();
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(same_bits(parse_double(format_double(v)), v));
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(code_of([] { parse_double("1.5x"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { parse_double(""); }) == ErrorCode::parse_error);
}

TEST_CASE("points file round trip") {
  TempDir tmp;
  const PointSet z = gen_lattice(1, 1.0, 100.0);
  write_points(tmp.path / "z.txt", z);
  const PointSet back = read_points(tmp.path / "z.txt");
  CHECK(back == z);
  CHECK(back.sep_radius() == z.sep_radius());
  CHECK(back.extent() == z.extent());
  CHECK(back.label() == z.label());

  const PointSet ab = gen_cut_project(CutProjectConfig::ammann_beenker(12.0));
  const PointSet ab2 = points_from_text(points_to_text(ab));
  REQUIRE(ab2.size() == ab.size());
  for (std::size_t i = 0; i < ab.coords().size(); ++i) CHECK(same_bits(ab2.coords()[i], ab.coords()[i]));

  const PointSet labelled = points_from_text("# d=1 r0=1 extent=5 label=two words\n0\n1\n");
  CHECK(labelled.label() == "two words");
}

TEST_CASE("points header fields") {
  const PointSet x = points_from_text("# d=2 r0=1.0 extent=50\n0,0\n0,1\n1,0\n");
  CHECK(x.dim() == 2);
  CHECK(x.sep_radius() == 1.0);
  CHECK(x.extent() == 50.0);
  CHECK(x.size() == 3);
}

TEST_CASE("points reader is strict") {
  CHECK(code_of([] { points_from_text("# d=1 r0=1 extent=5\n0\n0\n"); }) == ErrorCode::duplicate_point);
  CHECK(code_of([] { points_from_text("# d=1 r0=1 extent=5\n1\n0\n"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { points_from_text("# d=2 r0=1 extent=5\n1\n"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { points_from_text("# d=1 r0=1 extent=5\n0,1\n"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { points_from_text("d=1 r0=1 extent=5\n0\n"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { points_from_text("# d=x r0=1 extent=5\n0\n"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { points_from_text("# r0=1 extent=5\n0\n"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { points_from_text("# d=1 r0=1 extent=5\nfoo\n"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { read_points("/nonexistent/points.txt"); }) == ErrorCode::io_error);
}

TEST_CASE("spectrum file round trip is bit exact") {
  TempDir tmp;
  const PointSet x = gen_fibonacci(60.0);
  Spectrum s = amplitude_spectrum(x, 50.0, FrequencyGrid({{-1.0, 1.0, 0.01}}));
  s.label = "fib";
  s.valid[3] = 0;
  s.amplitude[3] = 0.0;
  s.power[3] = 0.0;
  const fs::path p = tmp.path / "s.csv";
  write_spectrum(p, s);
  CHECK(fs::exists(sidecar_path(p)));
  const Spectrum back = read_spectrum(p);
  REQUIRE(back.size() == s.size());
  CHECK(back.window_radius == 50.0);
  CHECK(back.label == "fib");
  CHECK(back.valid[3] == 0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k == 3) continue;
    CHECK(same_bits(back.amplitude[k].real(), s.amplitude[k].real()));
    CHECK(same_bits(back.amplitude[k].imag(), s.amplitude[k].imag()));
    CHECK(back.power[k] == doctest::Approx(s.power[k]).epsilon(1e-12));
    CHECK(back.valid[k] == 1);
  }
  CHECK(slurp(p).rfind("lambda_1,re,im,power,L\n", 0) == 0);

  // 2-D grid
  const PointSet z2 = gen_lattice(2, 1.0, 6.0);
  const Spectrum s2 = periodogram(z2, 5.0, FrequencyGrid({{-0.5, 0.5, 0.25}, {0.0, 1.0, 0.5}}));
  write_spectrum(tmp.path / "s2.csv", s2);
  const Spectrum b2 = read_spectrum(tmp.path / "s2.csv");
  CHECK(b2.grid.dim() == 2);
  CHECK(b2.amplitude == s2.amplitude);
}

TEST_CASE("spectrum reader checks consistency") {
  TempDir tmp;
  const Spectrum s = periodogram(gen_lattice(1, 1.0, 20.0), 10.0, FrequencyGrid({{0.1, 0.5, 0.1}}));
  const fs::path p = tmp.path / "s.csv";
  write_spectrum(p, s);
  std::string text = slurp(p);
  // Replace the power field of the first data row.
  const std::size_t row = text.find('\n') + 1;
  const std::size_t c3 = text.find(',', text.find(',', text.find(',', row) + 1) + 1);
  const std::size_t c4 = text.find(',', c3 + 1);
  text.replace(c3 + 1, c4 - c3 - 1, "12345");
  atomic_write(p, text);
  CHECK(code_of([&] { read_spectrum(p); }) == ErrorCode::consistency_error);

  CHECK(code_of([&] { write_spectrum(tmp.path / "e.csv", Spectrum{}); }) == ErrorCode::empty_spectrum);
  atomic_write(tmp.path / "e.csv", "re,im,power,L\n");
  atomic_write(sidecar_path(tmp.path / "e.csv"), R"({"axes": [], "L": 1.0})");
  CHECK(code_of([&] { read_spectrum(tmp.path / "e.csv"); }) == ErrorCode::empty_spectrum);
}

TEST_CASE("atomic write leaves no temp files and reports unwritable paths") {
  TempDir tmp;
  atomic_write(tmp.path / "a" / "b.txt", "hello");
  CHECK(slurp(tmp.path / "a" / "b.txt") == "hello");
  atomic_write(tmp.path / "a" / "b.txt", "again");
  CHECK(slurp(tmp.path / "a" / "b.txt") == "again");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path / "a")) ++entries;
  CHECK(entries == 1);
  atomic_write(tmp.path / "file", "x");
  CHECK(code_of([&] { atomic_write(tmp.path / "file" / "under.txt", "x"); }) == ErrorCode::io_error);
}

TEST_CASE("svg emission") {
  TempDir tmp;
  Table t{"periodogram", PlotKind::line, {"lambda", "power"}, {}};
  for (int k = 0; k <= 100; ++k) t.rows.push_back({k * 0.01, std::sin(k * 0.1) + 1.0});
  const std::string svg = render_svg(t, PlotKind::line, "abc123");
  CHECK(svg.find("width=\"720.00\"") != std::string::npos);
  CHECK(svg.find("height=\"440.00\"") != std::string::npos);
  CHECK(svg.find("<title>periodogram</title>") != std::string::npos);
  CHECK(svg.find("<metadata>config-hash: abc123</metadata>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(render_svg(t, PlotKind::line, "abc123") == svg);
  CHECK(render_svg(t, PlotKind::scatter, "h").find("<circle") != std::string::npos);

  Table h{"heat <map>", PlotKind::heatmap, {"x", "y", "v"}, {}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) h.rows.push_back({double(i), double(j), double(i * j)});
  const std::string hs = render_svg(h, PlotKind::heatmap, "h");
  CHECK(hs.find("heat &lt;map&gt;") != std::string::npos);
  CHECK(hs.find("<rect x=") != std::string::npos);

  plot_emit(t, PlotKind::line, tmp.path / "p.svg", "abc123");
  plot_emit(t, PlotKind::line, tmp.path / "q.svg", "abc123");
  CHECK(slurp(tmp.path / "p.svg") == slurp(tmp.path / "q.svg"));

  Table empty{"nothing", PlotKind::line, {"x", "y"}, {}};
  CHECK(code_of([&] { render_svg(empty, PlotKind::line, "h"); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { render_svg(t, PlotKind::heatmap, "h"); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { plot_emit(t, PlotKind::line, "/proc/nope/p.svg", "h"); }) == ErrorCode::io_error);
}

TEST_CASE("config is strict") {
  const auto cf = ScenarioConfig::parse(R"({"scenario": "boundary", "seed": 3, "seeds": 4})");
  CHECK(cf.seed == 3);
  CHECK(cf.params.at("seeds") == 4);
  CHECK(cf.params.at("L_list") == scenario_defaults("boundary").at("L_list"));

  CHECK(code_of([] { ScenarioConfig::parse(R"({"scenario": "boundary", "sedd": 3})"); }) ==
        ErrorCode::config_error);
  CHECK(code_of([] { ScenarioConfig::parse(R"({"scenario": "boundary", "seeds": "4"})"); }) ==
        ErrorCode::config_error);
  CHECK(code_of([] { ScenarioConfig::parse(R"({"scenario": "boundary", "seeds": 4.5})"); }) ==
        ErrorCode::config_error);
  CHECK(code_of([] { ScenarioConfig::parse(R"({"seed": 3})"); }) == ErrorCode::config_error);
  CHECK(code_of([] { ScenarioConfig::parse("{not json"); }) == ErrorCode::config_error);
  CHECK(code_of([] { ScenarioConfig::parse(R"({"scenario": "frobnicate"})"); }) ==
        ErrorCode::unknown_scenario);
  CHECK(code_of([] {
          ScenarioConfig::parse(R"({"scenario": "boundary", "noise": {"kind": "gaussian", "sigma": 0.1, "mu": 1}})");
          make_noise(ScenarioConfig::parse(
                         R"({"scenario": "boundary", "noise": {"kind": "gaussian", "sigma": 0.1, "mu": 1}})")
                         .params.at("noise"),
                     1);
        }) == ErrorCode::config_error);

  // Integers are accepted where floats are expected.
  const auto c2 = ScenarioConfig::parse(R"({"scenario": "recovery", "L": 3000})");
  CHECK(c2.params.at("L").is_number_float());
}

TEST_CASE("config hash ignores output placement") {
  auto a = ScenarioConfig::defaults("completeness");
  auto b = a;
  b.output_dir = "elsewhere";
  b.threads = 8;
  CHECK(a.hash() == b.hash());
  b.seed = 8;
  CHECK(a.hash() != b.hash());
  auto c = a;
  c.set_param("levels", 5);
  CHECK(a.hash() != c.hash());
  CHECK(code_of([&] { c.set_param("level", 5); }) == ErrorCode::config_error);
}

TEST_CASE("every registered scenario has defaults") {
  CHECK(scenario_names().size() == 10);
  for (const auto& n : scenario_names()) CHECK(scenario_defaults(n).is_object());
  CHECK(code_of([] { scenario_defaults("frobnicate"); }) == ErrorCode::unknown_scenario);
}

TEST_CASE("generator and noise specs") {
  CHECK(make_generator({{"kind", "lattice"}, {"dim", 2}}, 3.0, 0).size() == 29);
  CHECK(make_generator({{"kind", "fibonacci"}}, 30.0, 0).dim() == 1);
  CHECK(generator_dim({{"kind", "visible"}}) == 2);
  CHECK(code_of([] { make_generator({{"kind", "penrose"}}, 3.0, 0); }) == ErrorCode::config_error);
  CHECK(code_of([] { make_generator({{"kind", "fibonacci"}, {"dim", 2}}, 3.0, 0); }) ==
        ErrorCode::config_error);
  CHECK(make_noise({{"kind", "uniform"}, {"half_width", 0.25}}, 1).kind == NoiseModel::Kind::uniform);
  CHECK(code_of([] { make_noise({{"kind", "gaussian"}, {"sigma", -1.0}}, 1); }) == ErrorCode::config_error);
  CHECK(make_grid(Json{{"min", 0.0}, {"max", 1.0}, {"step", 0.25}}).size() == 5);
}

TEST_CASE("unknown scenario and unwritable output") {
  ScenarioConfig cf = ScenarioConfig::defaults("completeness");
  cf.scenario = "frobnicate";
  CHECK(code_of([&] { run_scenario(cf); }) == ErrorCode::unknown_scenario);
  TempDir tmp;
  atomic_write(tmp.path / "blocker", "x");
  ScenarioConfig ok = ScenarioConfig::defaults("completeness");
  ok.output_dir = (tmp.path / "blocker").string();
  CHECK(code_of([&] { run_scenario(ok); }) == ErrorCode::io_error);
}

TEST_CASE("scenario writes its manifest and is reproducible") {
  TempDir a, b;
  ScenarioConfig cf = ScenarioConfig::defaults("ft-continuity");
  cf.set_param("n_list", Json::array({1, 2, 4}));
  cf.set_param("L", 300.0);
  cf.set_param("final_threshold", 0.2);
  cf.output_dir = a.path.string();
  cf.threads = 1;
  const ScenarioResult r1 = run_scenario(cf);
  cf.output_dir = b.path.string();
  cf.threads = 3;
  const ScenarioResult r2 = run_scenario(cf);
  CHECK(r1.all_pass());
  CHECK_FALSE(r1.files.empty());
  for (const auto& f : r1.files) {
    CHECK(fs::exists(a.path / f));
    CHECK(slurp(a.path / f) == slurp(b.path / f));
  }
  const std::string result = slurp(a.path / "ft-continuity" / "result.json");
  CHECK(result.find("wall") == std::string::npos);
  const Json j = Json::parse(result);
  for (const auto& c : j.at("criteria")) {
    CHECK(c.contains("name"));
    CHECK(c.contains("value"));
    CHECK(c.contains("threshold"));
    CHECK(c.contains("pass"));
  }
  CHECK(r1.wall_seconds >= 0.0);
}

TEST_CASE("criteria compare as declared") {
  CHECK(make_criterion("a", 1.0, "<", 2.0).pass);
  CHECK_FALSE(make_criterion("a", 2.0, "<", 2.0).pass);
  CHECK(make_criterion("a", 2.0, "<=", 2.0).pass);
  CHECK(make_criterion("a", 2.0, "==", 2.0).pass);
  CHECK(make_criterion("a", 3.0, ">=", 2.0).pass);
  CHECK_FALSE(make_criterion("a", std::nan(""), "<=", 2.0).pass);
  CHECK(code_of([] { make_criterion("a", 1.0, "~", 2.0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("fourier transform of a measure matches a direct long double sum") {
  Stream rng(5);
  std::vector<double> loc;
  std::vector<cplx> w;
  for (int i = 0; i < 300; ++i) {
    loc.push_back(40.0 * (rng.uniform() - 0.5));
    w.push_back({rng.uniform(), rng.uniform() - 0.5});
  }
  const AtomicMeasure mu(1, loc, w);
  const FrequencyGrid g({{-0.7, 1.3, 0.01}});
  const auto ft = fourier_transform(mu, g, 2);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const long double lam = g.node(k)[0];
    long double re = 0, im = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const long double a = -2.0L * 3.141592653589793238462643383279L * mu.location(i)[0] * lam;
      const long double c = std::cos(a), s = std::sin(a);
      re += mu.weight(i).real() * c - mu.weight(i).imag() * s;
      im += mu.weight(i).real() * s + mu.weight(i).imag() * c;
    }
    CHECK(std::abs(ft[k] - cplx(double(re), double(im))) < 1e-11);
    const double lam_d = g.node(k)[0];
    CHECK(std::abs(fourier_sum(mu, std::span(&lam_d, 1)) - cplx(double(re), double(im))) < 1e-11);
  }
}
