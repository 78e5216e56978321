#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "quasidiff/pointset.hpp"
#include "quasidiff/spectral.hpp"

namespace quasidiff {

// Shortest decimal that reads back to the same double.
std::string format_double(double v);
// Whole-token parse; throws parse_error on trailing garbage.
double parse_double(std::string_view s);

// Writes to a sibling temp file and renames it over the target.
void atomic_write(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// First line `# d=<int> r0=<float> extent=<float> label=<text>`, then one
// comma-separated point per line in lexicographic order.
std::string points_to_text(const PointSet& x);
PointSet points_from_text(std::string_view text);
void write_points(const std::filesystem::path& path, const PointSet& x);
PointSet read_points(const std::filesystem::path& path);

// CSV `lambda_1..lambda_d,re,im,power,L` plus a JSON sidecar at
// path + ".json" holding the grid. Invalid nodes have empty value fields.
std::filesystem::path sidecar_path(const std::filesystem::path& path);
void write_spectrum(const std::filesystem::path& path, const Spectrum& spec);
Spectrum read_spectrum(const std::filesystem::path& path);

}  // namespace quasidiff
