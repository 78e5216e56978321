#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace quasidiff {

enum class PlotKind { line, scatter, heatmap };

// Numeric table; the first column is the abscissa for line and scatter
// plots. Heatmaps read rows as (x, y, value).
struct Table {
  std::string title;
  PlotKind kind = PlotKind::line;  // how scenario runners draw it
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool empty() const { return rows.empty() || columns.empty(); }
  std::string to_csv() const;
};

PlotKind plot_kind_from_string(const std::string& s);

// Standalone SVG; identical input gives identical bytes.
std::string render_svg(const Table& table, PlotKind kind, const std::string& config_hash);
void plot_emit(const Table& table, PlotKind kind, const std::filesystem::path& path,
               const std::string& config_hash);

}  // namespace quasidiff
