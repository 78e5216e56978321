// Command-line front end. Exit status: 0 when every criterion passes, 1 when
// a scenario criterion fails, 2 on usage, configuration or input errors.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quasidiff/config.hpp"
#include "quasidiff/error.hpp"
#include "quasidiff/io.hpp"
#include "quasidiff/measures.hpp"
#include "quasidiff/metrics.hpp"
#include "quasidiff/perturb.hpp"
#include "quasidiff/scenarios.hpp"
#include "quasidiff/spectral.hpp"

using namespace quasidiff;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> threads;
  std::string config;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
  } else {
    atomic_write(g.out, text);
  }
}

Json parse_json_arg(const std::string& s, const std::string& what) {
  try {
    return Json::parse(s);
  } catch (const Json::exception& e) {
    fail(ErrorCode::config_error, what + " is not valid JSON: " + e.what());
  }
}

std::string require_out(const Globals& g, const char* what) {
  require(!g.out.empty() && g.out != "-", ErrorCode::config_error,
          std::string(what) + " needs --out because it writes a sidecar file");
  return g.out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffraction and metric experiments on point sets"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output file, or output directory for scenario");
  app.add_option("--threads", g.threads, "Worker threads, 0 for all cores");
  app.add_option("--config", g.config, "Scenario config file (JSON)")->check(CLI::ExistingFile);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a point set window");
  std::string kind = "lattice";
  int dim = 1;
  double spacing = 1.0, intensity = 1.0, extent = 0.0;
  gen->add_option("--kind", kind, "lattice, fibonacci, ammann-beenker, visible or poisson")
      ->check(CLI::IsMember({"lattice", "fibonacci", "ammann-beenker", "visible", "poisson"}));
  gen->add_option("--dim", dim, "Dimension for lattice and poisson");
  gen->add_option("--spacing", spacing, "Lattice spacing");
  gen->add_option("--intensity", intensity, "Poisson intensity");
  gen->add_option("--extent", extent, "Radius of the stored window")->required();

  // window
  auto* win = app.add_subcommand("window", "Restrict a point set to a ball");
  std::string in;
  double radius = 0.0;
  win->add_option("--in", in, "Points file")->required()->check(CLI::ExistingFile);
  win->add_option("--radius", radius, "Window radius")->required();

  // dist
  auto* dist = app.add_subcommand("dist", "Distance between two point sets");
  std::string xin, yin, metric = "stat", mode = "sup";
  long L_max = 100;
  double exponent = 0.0, eps_tol = 0.0, tail_start = 0.0;
  dist->add_option("--x", xin, "First points file")->required()->check(CLI::ExistingFile);
  dist->add_option("--y", yin, "Second points file")->required()->check(CLI::ExistingFile);
  dist->add_option("--metric", metric, "stat, gh, aut or hausdorff")
      ->check(CLI::IsMember({"stat", "gh", "aut", "hausdorff"}));
  dist->add_option("--L-max", L_max, "Largest integer window radius of the grid");
  dist->add_option("--exponent", exponent, "Window exponent, default the dimension");
  dist->add_option("--eps-tol", eps_tol, "Resolution in eps");
  dist->add_option("--mode", mode, "sup or tail for aut")->check(CLI::IsMember({"sup", "tail"}));
  dist->add_option("--tail-start", tail_start, "First L of the tail for aut");

  // autocorr
  auto* ac = app.add_subcommand("autocorr", "Autocorrelation atoms of a window");
  double L = 0.0, tol = 1e-9;
  std::optional<double> max_lag;
  ac->add_option("--in", in, "Points file")->required()->check(CLI::ExistingFile);
  ac->add_option("--L", L, "Window radius")->required();
  ac->add_option("--max-lag", max_lag, "Keep differences up to this norm");
  ac->add_option("--tol", tol, "Bucketing tolerance, 0 for exact");

  // spectrum
  auto* spec = app.add_subcommand("spectrum", "Periodogram on a frequency grid");
  double fmin = -1.0, fmax = 1.0, fstep = 1e-3;
  std::string grid_json;
  spec->add_option("--in", in, "Points file")->required()->check(CLI::ExistingFile);
  spec->add_option("--L", L, "Window radius")->required();
  spec->add_option("--min", fmin, "Lowest frequency (1-D)");
  spec->add_option("--max", fmax, "Highest frequency (1-D)");
  spec->add_option("--step", fstep, "Frequency step (1-D)");
  spec->add_option("--grid", grid_json, "Grid as JSON, one {min,max,step} per axis");

  // peaks
  auto* peaks = app.add_subcommand("peaks", "Peak table of a stored spectrum");
  std::string spec_in;
  double width = 0.0, threshold = 0.1;
  peaks->add_option("--spectrum", spec_in, "Spectrum CSV")->required()->check(CLI::ExistingFile);
  peaks->add_option("--width", width, "Peak window width, default 4/L");
  peaks->add_option("--threshold", threshold, "Peak threshold relative to the tallest");

  // perturb
  auto* pert = app.add_subcommand("perturb", "Randomly displace every point");
  std::string noise_json = R"({"kind":"gaussian","sigma":0.1})";
  pert->add_option("--in", in, "Points file")->required()->check(CLI::ExistingFile);
  pert->add_option("--noise", noise_json, "Noise model as JSON");

  // recover
  auto* rec = app.add_subcommand("recover", "Divide a spectrum by the noise characteristic function");
  double guard = 1e-3;
  rec->add_option("--spectrum", spec_in, "Spectrum CSV")->required()->check(CLI::ExistingFile);
  rec->add_option("--noise", noise_json, "Noise model as JSON");
  rec->add_option("--guard", guard, "Smallest |psi| that is divided by");

  // scenario
  auto* scen = app.add_subcommand("scenario", "Run a named experiment");
  std::string scenario_name;
  std::vector<std::string> sets;
  bool list = false;
  scen->add_option("name", scenario_name, "Scenario name");
  scen->add_option("--set", sets, "Override a parameter, key=JSON");
  scen->add_flag("--list", list, "List scenario names and default parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::uint64_t seed = g.seed.value_or(7);
  const unsigned threads = g.threads.value_or(1);
  try {
    if (*gen) {
      Json spec_j = {{"kind", kind}};
      if (kind == "lattice") spec_j["dim"] = dim, spec_j["spacing"] = spacing;
      if (kind == "poisson") spec_j["dim"] = dim, spec_j["intensity"] = intensity;
      emit(g, points_to_text(make_generator(spec_j, extent, seed)));
    } else if (*win) {
      emit(g, points_to_text(window(read_points(in), radius)));
    } else if (*dist) {
      const PointSet x = read_points(xin), y = read_points(yin);
      const double ex = exponent > 0 ? exponent : static_cast<double>(x.dim());
      MetricResult m;
      if (metric == "hausdorff") {
        m.value = hausdorff_distance(x, y);
      } else if (metric == "gh") {
        m = rho_gh(x, y, eps_tol > 0 ? eps_tol : 1e-4);
      } else if (metric == "stat") {
        m = rho_stat(x, y, LGrid::integers(1, L_max), ex, eps_tol > 0 ? eps_tol : 1e-6);
      } else {
        m = rho_aut(x, y, LGrid::integers(1, L_max), mode == "sup" ? AutMode::sup : AutMode::tail_limsup,
                    tail_start);
      }
      Json j = {{"metric", metric}, {"value", m.value}, {"capped", m.capped}};
      if (m.attained_L) j["attained_L"] = *m.attained_L;
      if (m.attained_eps) j["attained_eps"] = *m.attained_eps;
      if (!m.trend.empty()) j["trend"] = m.trend;
      emit(g, j.dump(2) + "\n");
    } else if (*ac) {
      const PointSet x = read_points(in);
      const AtomicMeasure gm = autocorrelation(x, L, tol, max_lag);
      std::string csv;
      for (int a = 0; a < gm.dim(); ++a) csv += "v_" + std::to_string(a + 1) + ",";
      csv += "weight\n";
      for (std::size_t i = 0; i < gm.size(); ++i) {
        for (double v : gm.location(i)) csv += format_double(v) + ",";
        csv += format_double(gm.weight(i).real()) + "\n";
      }
      emit(g, csv);
    } else if (*spec) {
      const PointSet x = read_points(in);
      const FrequencyGrid grid = grid_json.empty()
                                     ? FrequencyGrid({{fmin, fmax, fstep}})
                                     : make_grid(parse_json_arg(grid_json, "--grid"));
      Spectrum s = periodogram(x, L, grid, threads);
      s.label = x.label();
      write_spectrum(require_out(g, "spectrum"), s);
    } else if (*peaks) {
      const Spectrum s = read_spectrum(spec_in);
      const double w = width > 0 ? width : 4.0 / s.window_radius;
      const PeakReport rep = analyze_peaks(s, w, threshold);
      std::string csv = "# background=" + format_double(rep.background_level) +
                        " window_width=" + format_double(w) + "\n";
      for (int a = 0; a < s.grid.dim(); ++a) csv += "location_" + std::to_string(a + 1) + ",";
      csv += "height,mass\n";
      for (const auto& pk : rep.peaks) {
        for (double v : pk.location) csv += format_double(v) + ",";
        csv += format_double(pk.height) + "," + format_double(pk.mass) + "\n";
      }
      emit(g, csv);
    } else if (*pert) {
      const PointSet x = read_points(in);
      const NoiseModel m = make_noise(parse_json_arg(noise_json, "--noise"), x.dim());
      for (const auto& w : m.warnings()) std::cerr << "warning: " << w << "\n";
      emit(g, points_to_text(perturb(x, m, seed)));
    } else if (*rec) {
      const Spectrum s = read_spectrum(spec_in);
      const NoiseModel m = make_noise(parse_json_arg(noise_json, "--noise"), s.grid.dim());
      write_spectrum(require_out(g, "recover"), recover(s, m, guard));
    } else if (*scen) {
      if (list) {
        for (const auto& n : scenario_names())
          std::cout << n << " " << scenario_defaults(n).dump() << "\n";
        return 0;
      }
      ScenarioConfig cf;
      if (!g.config.empty()) {
        cf = ScenarioConfig::parse(read_file(g.config));
        require(scenario_name.empty() || scenario_name == cf.scenario, ErrorCode::config_error,
                "scenario name disagrees with the config file");
      } else {
        require(!scenario_name.empty(), ErrorCode::config_error, "scenario needs a name or --config");
        cf = ScenarioConfig::defaults(scenario_name);
      }
      if (g.seed) cf.seed = *g.seed;
      if (g.threads) cf.threads = *g.threads;
      if (!g.out.empty()) cf.output_dir = g.out;
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        require(eq != std::string::npos, ErrorCode::config_error, "--set expects key=JSON");
        cf.set_param(s.substr(0, eq), parse_json_arg(s.substr(eq + 1), "--set " + s.substr(0, eq)));
      }
      const ScenarioResult r = run_scenario(cf);
      for (const auto& c : r.criteria) {
        std::printf("%s %-36s %-14s %s %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    format_double(c.value).c_str(), c.op.c_str(), format_double(c.threshold).c_str(),
                    c.detail.empty() ? "" : "  ", c.detail.c_str());
      }
      for (const auto& [k, v] : r.notes) std::printf("note %s: %s\n", k.c_str(), v.c_str());
      std::printf("%s: %s in %.2f s, outputs in %s/%s\n", r.scenario.c_str(),
                  r.all_pass() ? "all criteria pass" : "criteria failed", r.wall_seconds,
                  cf.output_dir.c_str(), r.scenario.c_str());
      return r.all_pass() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
