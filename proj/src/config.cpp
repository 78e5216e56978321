#include "quasidiff/config.hpp"

#include <cstdio>
#include <set>

#include "quasidiff/error.hpp"
#include "quasidiff/rng.hpp"

namespace quasidiff {

namespace {

Json grid_json(double min, double max, double step) {
  return {{"min", min}, {"max", max}, {"step", step}};
}

const Json& all_defaults() {
  static const Json d = [] {
    const Json gauss = {{"kind", "gaussian"}, {"sigma", 0.1}};
    Json j;
    j["metric-axioms"] = {{"triples", 500},          {"extent", 200.0},
                          {"L_max", 200},            {"eps_tol", 1e-6},
                          {"implication_pairs", 100}, {"derived_L_max", 1000}};
    j["completeness"] = {{"levels", 8}, {"L_max", 512}, {"eps_tol", 1e-6}};
    j["gh-vs-vague"] = {{"n_list", {4, 8, 16, 32, 64}},
                        {"eps_tol", 1e-4},
                        {"family_half_width", 10.0},
                        {"family_radius", 0.4}};
    j["theoremA"] = {{"n_list", {2, 3, 4, 5, 6, 7, 8}},
                     {"L", 4000.0},
                     {"eps", 0.1},
                     {"max_lag", 6.0},
                     {"family_half_width", 6.0},
                     {"family_count", 49},
                     {"family_radius", 0.25},
                     {"L_list", {1000.0, 2000.0, 4000.0}},
                     {"frequency_grid", grid_json(0.0, 1.02, 6.25e-5)}};
    j["gh-counterexample"] = {{"n_list", {5, 10, 20}},
                              {"eps_tol", 1e-4},
                              {"L_factor", 20.0},
                              {"family_radius", 0.3},
                              {"gap_threshold", 0.3}};
    j["uniform-quasicrystalline"] = {{"n_list", {1, 2, 4, 8, 16, 32}},
                                     {"L", 2000.0},
                                     {"max_lag", 6.0},
                                     {"family_half_width", 20.0},
                                     {"L_list", {500.0, 1000.0, 2000.0}},
                                     {"frequency_grid", grid_json(0.0, 2.0, 2.5e-4)}};
    j["ft-continuity"] = {{"n_list", {1, 2, 4, 8, 16, 32}},
                          {"L", 2000.0},
                          {"frequency_grid", grid_json(-2.0, 2.0 - 1.0 / 256, 1.0 / 256)},
                          {"final_threshold", 0.02}};
    j["boundary"] = {{"noise", gauss},
                     {"seeds", 10},
                     {"L_list", {100.0, 300.0, 1000.0}},
                     {"extent", 1100.0},
                     {"final_threshold", 0.005}};
    j["recovery"] = {{"noise", gauss},
                     {"seeds", 10},
                     {"L", 5000.0},
                     {"guard", 1e-3},
                     {"error_threshold", 0.05}};
    j["diffraction-catalog"] = {
        {"generators",
         {{{"kind", "lattice"}, {"dim", 1}},
          {{"kind", "fibonacci"}},
          {{"kind", "poisson"}, {"dim", 1}, {"intensity", 1.0}},
          {{"kind", "lattice"}, {"dim", 2}},
          {{"kind", "ammann-beenker"}},
          {{"kind", "visible"}},
          {{"kind", "poisson"}, {"dim", 2}, {"intensity", 1.0}}}},
        {"count_L_list", {2.0, 5.0, 10.0, 20.0, 50.0, 100.0}},
        {"L_list", {1000.0, 2000.0, 4000.0}},
        {"frequency_grid", grid_json(0.0, 1.02, 6.25e-5)},
        {"top_peaks", 5},
        {"peak_threshold", 0.01},
        {"lattice_L", 50.0},
        {"lattice_grid", grid_json(-2.5, 2.5, 1e-3)},
        {"poisson_seeds", 20},
        {"poisson_L_list", {500.0, 1000.0, 2000.0}},
        {"poisson_grid", grid_json(0.0, 0.5, 1.25e-4)},
        {"wiener_sets", 50},
        {"wiener_max_points", 500},
        {"wiener_frequencies", 64},
        {"heatmap_L", 30.0},
        {"heatmap_grid", Json::array({grid_json(-2.0, 2.0, 4.0 / 127), grid_json(-2.0, 2.0, 4.0 / 127)})}};
    return j;
  }();
  return d;
}

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) {
    // Integers may stand in for floats but not the other way round.
    return !b.is_number_integer() || a.is_number_integer();
  }
  return a.type() == b.type();
}

template <class T>
T get_field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    fail(ErrorCode::config_error, std::string("field '") + key + "' has the wrong type");
  }
}

void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& what) {
  require(j.is_object(), ErrorCode::config_error, what + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    require(allowed.count(k) > 0, ErrorCode::config_error, "unknown key '" + k + "' in " + what);
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "metric-axioms", "completeness",  "gh-vs-vague", "theoremA", "gh-counterexample",
      "uniform-quasicrystalline", "ft-continuity", "boundary", "recovery", "diffraction-catalog"};
  return names;
}

Json scenario_defaults(const std::string& name) {
  const Json& d = all_defaults();
  require(d.contains(name), ErrorCode::unknown_scenario, "no scenario named '" + name + "'");
  return d.at(name);
}

ScenarioConfig ScenarioConfig::defaults(const std::string& scenario) {
  ScenarioConfig cf;
  cf.params = scenario_defaults(scenario);
  cf.scenario = scenario;
  return cf;
}

void ScenarioConfig::set_param(const std::string& key, const Json& value) {
  require(params.contains(key), ErrorCode::config_error,
          "unknown key '" + key + "' for scenario " + scenario);
  require(same_kind(value, params.at(key)), ErrorCode::config_error,
          "key '" + key + "' has the wrong type");
  params[key] = value.is_number_integer() && params.at(key).is_number_float()
                    ? Json(value.get<double>())
                    : value;
}

ScenarioConfig ScenarioConfig::from_json(const Json& doc) {
  require(doc.is_object(), ErrorCode::config_error, "config must be a JSON object");
  require(doc.contains("scenario") && doc.at("scenario").is_string(), ErrorCode::config_error,
          "config needs a string 'scenario'");
  ScenarioConfig cf = defaults(doc.at("scenario").get<std::string>());
  for (const auto& [k, v] : doc.items()) {
    if (k == "scenario") continue;
    if (k == "seed") {
      require(v.is_number_unsigned(), ErrorCode::config_error, "seed must be a nonnegative integer");
      cf.seed = v.get<std::uint64_t>();
    } else if (k == "output_dir") {
      require(v.is_string(), ErrorCode::config_error, "output_dir must be a string");
      cf.output_dir = v.get<std::string>();
    } else if (k == "threads") {
      require(v.is_number_unsigned(), ErrorCode::config_error, "threads must be a nonnegative integer");
      cf.threads = v.get<unsigned>();
    } else {
      cf.set_param(k, v);
    }
  }
  return cf;
}

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorCode::config_error, std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(doc);
}

Json ScenarioConfig::to_json() const {
  Json j = params;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["threads"] = threads;
  return j;
}

std::string ScenarioConfig::hash() const {
  Json j = params;
  j["scenario"] = scenario;
  j["seed"] = seed;
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

int generator_dim(const Json& spec) {
  const auto kind = get_field<std::string>(spec, "kind", "");
  if (kind == "lattice" || kind == "poisson") return get_field<int>(spec, "dim", 1);
  return kind == "fibonacci" ? 1 : 2;
}

std::string generator_name(const Json& spec) {
  const auto kind = get_field<std::string>(spec, "kind", "");
  if (kind == "lattice" || kind == "poisson")
    return kind + "-" + std::to_string(get_field<int>(spec, "dim", 1)) + "d";
  return kind;
}

PointSet make_generator(const Json& spec, double extent, std::uint64_t seed) {
  require(spec.is_object() && spec.contains("kind"), ErrorCode::config_error,
          "generator spec needs a 'kind'");
  const auto kind = get_field<std::string>(spec, "kind", "");
  if (kind == "lattice") {
    only_keys(spec, {"kind", "dim", "spacing"}, "lattice generator");
    return gen_lattice(get_field<int>(spec, "dim", 1), get_field<double>(spec, "spacing", 1.0), extent);
  }
  if (kind == "fibonacci") {
    only_keys(spec, {"kind"}, "fibonacci generator");
    return gen_fibonacci(extent);
  }
  if (kind == "ammann-beenker") {
    only_keys(spec, {"kind"}, "ammann-beenker generator");
    return gen_cut_project(CutProjectConfig::ammann_beenker(extent));
  }
  if (kind == "visible") {
    only_keys(spec, {"kind"}, "visible generator");
    return gen_visible(extent);
  }
  if (kind == "poisson") {
    only_keys(spec, {"kind", "dim", "intensity"}, "poisson generator");
    return gen_poisson(get_field<double>(spec, "intensity", 1.0), get_field<int>(spec, "dim", 1),
                       extent, seed);
  }
  fail(ErrorCode::config_error, "unknown generator kind '" + kind + "'");
}

namespace {

NoiseModel build_noise(const Json& spec, int dim) {
  require(spec.is_object() && spec.contains("kind"), ErrorCode::config_error,
          "noise spec needs a 'kind'");
  const auto kind = get_field<std::string>(spec, "kind", "");
  NoiseModel m;
  if (kind == "gaussian") {
    only_keys(spec, {"kind", "sigma"}, "gaussian noise");
    m = NoiseModel::gaussian(dim, get_field<double>(spec, "sigma", 0.1));
  } else if (kind == "uniform") {
    only_keys(spec, {"kind", "half_width"}, "uniform noise");
    m = NoiseModel::uniform(dim, get_field<double>(spec, "half_width", 0.25));
  } else if (kind == "mixture") {
    only_keys(spec, {"kind", "components"}, "mixture noise");
    std::vector<MixtureComponent> comps;
    require(spec.contains("components") && spec.at("components").is_array(),
            ErrorCode::config_error, "mixture needs a 'components' array");
    for (const auto& c : spec.at("components")) {
      only_keys(c, {"weight", "mean", "sigma"}, "mixture component");
      comps.push_back({get_field<double>(c, "weight", 1.0),
                       get_field<std::vector<double>>(c, "mean", std::vector<double>(dim, 0.0)),
                       get_field<std::vector<double>>(c, "sigma", std::vector<double>(dim, 0.1))});
    }
    m = NoiseModel::mixture(dim, std::move(comps));
  } else if (kind == "pareto") {
    only_keys(spec, {"kind", "alpha", "scale", "moment_eps"}, "pareto noise");
    m = NoiseModel::pareto_radial(dim, get_field<double>(spec, "alpha", 2.0),
                                  get_field<double>(spec, "scale", 0.05),
                                  get_field<double>(spec, "moment_eps", 0.1));
  } else {
    fail(ErrorCode::config_error, "unknown noise kind '" + kind + "'");
  }
  m.validate();
  return m;
}

}  // namespace

NoiseModel make_noise(const Json& spec, int dim) {
  try {
    return build_noise(spec, dim);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    fail(ErrorCode::config_error, e.what());
  }
}

FrequencyGrid make_grid(const Json& spec) {
  std::vector<AxisRange> axes;
  auto one = [&](const Json& a) {
    only_keys(a, {"min", "max", "step"}, "frequency grid axis");
    require(a.contains("min") && a.contains("max") && a.contains("step"), ErrorCode::config_error,
            "grid axis needs min, max and step");
    axes.push_back({get_field<double>(a, "min", 0), get_field<double>(a, "max", 0),
                    get_field<double>(a, "step", 0)});
  };
  if (spec.is_array()) {
    for (const auto& a : spec) one(a);
  } else {
    one(spec);
  }
  try {
    return FrequencyGrid(std::move(axes));
  } catch (const Error& e) {
    fail(ErrorCode::config_error, e.what());
  }
}

}  // namespace quasidiff
