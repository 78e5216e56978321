#pragma once

#include <map>
#include <string>
#include <vector>

#include "quasidiff/config.hpp"
#include "quasidiff/plot.hpp"

namespace quasidiff {

struct Criterion {
  std::string name;
  double value = 0.0;
  std::string op;  // "<", "<=", ">", ">=", "=="
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

Criterion make_criterion(std::string name, double value, std::string op, double threshold,
                         std::string detail = {});

struct ScenarioResult {
  std::string scenario;
  std::string config_hash;
  std::vector<Criterion> criteria;
  std::vector<Table> tables;
  std::map<std::string, std::string> notes;
  std::vector<std::string> files;  // relative to the output directory
  double wall_seconds = 0.0;       // reported, never written to disk

  bool all_pass() const;
  const Criterion& criterion(const std::string& name) const;
  const Table& table(const std::string& title) const;
  // Everything except wall time, in a canonical form.
  Json to_json() const;
};

// Runs the named pipeline and writes result.json, one CSV per table and one
// SVG per table into output_dir/<scenario>/. Set write = false to skip files.
ScenarioResult run_scenario(const ScenarioConfig& cf, bool write = true);

}  // namespace quasidiff
