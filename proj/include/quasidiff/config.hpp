#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "quasidiff/perturb.hpp"
#include "quasidiff/pointset.hpp"
#include "quasidiff/spectral.hpp"

namespace quasidiff {

using Json = nlohmann::json;

const std::vector<std::string>& scenario_names();
// Per-scenario parameters with their defaults; unknown name raises unknown_scenario.
Json scenario_defaults(const std::string& name);

struct ScenarioConfig {
  std::string scenario;
  std::uint64_t seed = 7;
  std::string output_dir = "out";
  unsigned threads = 1;
  Json params = Json::object();  // defaults merged with overrides

  // Strict: top-level keys are scenario, seed, output_dir, threads and the
  // parameter names of the chosen scenario. Anything else is config_error.
  static ScenarioConfig from_json(const Json& doc);
  static ScenarioConfig parse(const std::string& text);
  static ScenarioConfig defaults(const std::string& scenario);

  // Overrides one parameter; the key must exist and keep its JSON type.
  void set_param(const std::string& key, const Json& value);
  Json to_json() const;
  // FNV-1a over the canonical dump of scenario, seed and params. Output
  // directory and thread count do not change results and are left out.
  std::string hash() const;
};

// {"kind": "lattice", "dim": 1, "spacing": 1}, {"kind": "fibonacci"},
// {"kind": "ammann-beenker"}, {"kind": "visible"},
// {"kind": "poisson", "dim": 1, "intensity": 1}.
PointSet make_generator(const Json& spec, double extent, std::uint64_t seed);
std::string generator_name(const Json& spec);
int generator_dim(const Json& spec);

// {"kind": "gaussian", "sigma": 0.1}, {"kind": "uniform", "half_width": 0.25},
// {"kind": "mixture", "components": [{"weight", "mean", "sigma"}]},
// {"kind": "pareto", "alpha", "scale", "moment_eps"}.
NoiseModel make_noise(const Json& spec, int dim);

// {"min", "max", "step"} or a list of such objects, one per axis.
FrequencyGrid make_grid(const Json& spec);

}  // namespace quasidiff
