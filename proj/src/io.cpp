#include "quasidiff/io.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "quasidiff/error.hpp"

namespace quasidiff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t k = s.find(sep, start);
    out.push_back(s.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t k = text.find('\n', start);
    if (k == std::string_view::npos) k = text.size();
    std::string_view line = text.substr(start, k - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = k + 1;
  }
  return out;
}

int parse_int(std::string_view s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc{} && p == s.data() + s.size(), ErrorCode::parse_error,
          "bad integer '" + std::string(s) + "'");
  return v;
}

// Value of `key=` in a header; label runs to the end of the line.
std::string_view header_field(std::string_view header, std::string_view key, bool rest) {
  const std::string tag = " " + std::string(key) + "=";
  const std::size_t k = header.find(tag);
  require(k != std::string_view::npos, ErrorCode::parse_error,
          "header lacks '" + std::string(key) + "='");
  std::string_view v = header.substr(k + tag.size());
  if (!rest) v = v.substr(0, v.find(' '));
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail(ErrorCode::invalid_argument, "cannot format number");
  return std::string(buf, p);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(!s.empty() && ec == std::errc{} && p == s.data() + s.size(), ErrorCode::parse_error,
          "bad number '" + std::string(s) + "'");
  return v;
}

void atomic_write(const fs::path& path, std::string_view content) {
  static std::atomic<unsigned long> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  require(!ec, ErrorCode::io_error, "cannot create directory " + path.parent_path().string());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io_error, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      fs::remove(tmp, ec);
      fail(ErrorCode::io_error, "write failed for " + path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    fail(ErrorCode::io_error, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string points_to_text(const PointSet& x) {
  std::string out = "# d=" + std::to_string(x.dim()) + " r0=" + format_double(x.sep_radius()) +
                    " extent=" + format_double(x.extent()) + " label=" + x.label() + "\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto p = x[i];
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (a) out += ',';
      out += format_double(p[a]);
    }
    out += '\n';
  }
  return out;
}

PointSet points_from_text(std::string_view text) {
  const auto lines = lines_of(text);
  require(!lines.empty() && lines[0].starts_with("# "), ErrorCode::parse_error,
          "missing points header");
  const std::string_view header = lines[0].substr(1);
  const int dim = parse_int(header_field(header, "d", false));
  require(dim >= 1, ErrorCode::parse_error, "dimension must be positive");
  const double r0 = parse_double(header_field(header, "r0", false));
  const double extent = parse_double(header_field(header, "extent", false));
  std::string label;
  if (header.find(" label=") != std::string_view::npos) label = header_field(header, "label", true);

  std::vector<double> coords;
  const auto d = static_cast<std::size_t>(dim);
  coords.reserve((lines.size() - 1) * d);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    const auto cells = split(lines[i], ',');
    require(cells.size() == d, ErrorCode::parse_error,
            "line " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) +
                " columns, expected " + std::to_string(dim));
    const std::size_t row = coords.size();
    for (auto c : cells) coords.push_back(parse_double(c));
    if (row > 0) {
      std::span<const double> prev(coords.data() + row - d, d), cur(coords.data() + row, d);
      require(!std::equal(prev.begin(), prev.end(), cur.begin()), ErrorCode::duplicate_point,
              "repeated point on line " + std::to_string(i + 1));
      require(lex_less(prev, cur), ErrorCode::parse_error,
              "rows not sorted at line " + std::to_string(i + 1));
    }
  }
  return PointSet(dim, std::move(coords), r0, extent, std::move(label));
}

void write_points(const fs::path& path, const PointSet& x) { atomic_write(path, points_to_text(x)); }

PointSet read_points(const fs::path& path) { return points_from_text(read_file(path)); }

fs::path sidecar_path(const fs::path& path) {
  fs::path p = path;
  p += ".json";
  return p;
}

void write_spectrum(const fs::path& path, const Spectrum& spec) {
  require(spec.grid.size() > 0, ErrorCode::empty_spectrum, "spectrum has no nodes");
  const int d = spec.grid.dim();
  const std::string L = format_double(spec.window_radius);
  std::string csv;
  for (int a = 0; a < d; ++a) csv += "lambda_" + std::to_string(a + 1) + ",";
  csv += "re,im,power,L\n";
  for (std::size_t k = 0; k < spec.size(); ++k) {
    for (double v : spec.grid.node(k)) csv += format_double(v) + ",";
    const bool ok = spec.valid.empty() || spec.valid[k];
    if (ok) {
      csv += format_double(spec.amplitude[k].real()) + "," + format_double(spec.amplitude[k].imag()) +
             "," + format_double(spec.power[k]);
    } else {
      csv += ",,";
    }
    csv += "," + L + "\n";
  }
  json axes = json::array();
  for (const auto& ax : spec.grid.axes()) axes.push_back({{"min", ax.min}, {"max", ax.max}, {"step", ax.step}});
  json side = {{"dim", d},
               {"axes", axes},
               {"nodes", spec.grid.size()},
               {"L", spec.window_radius},
               {"label", spec.label},
               {"csv", path.filename().string()}};
  atomic_write(path, csv);
  atomic_write(sidecar_path(path), side.dump(2) + "\n");
}

Spectrum read_spectrum(const fs::path& path) {
  json side;
  try {
    side = json::parse(read_file(sidecar_path(path)));
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, "bad spectrum sidecar: " + std::string(e.what()));
  }
  Spectrum spec;
  try {
    std::vector<AxisRange> axes;
    for (const auto& ax : side.at("axes"))
      axes.push_back({ax.at("min").get<double>(), ax.at("max").get<double>(), ax.at("step").get<double>()});
    require(!axes.empty(), ErrorCode::empty_spectrum, "spectrum grid has no axes");
    spec.grid = FrequencyGrid(std::move(axes));
    spec.window_radius = side.at("L").get<double>();
    spec.label = side.value("label", std::string{});
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, "bad spectrum sidecar: " + std::string(e.what()));
  }
  const std::size_t n = spec.grid.size();
  require(n > 0, ErrorCode::empty_spectrum, "spectrum grid is empty");
  const int d = spec.grid.dim();

  const std::string text = read_file(path);
  const auto lines = lines_of(text);
  std::string expect;
  for (int a = 0; a < d; ++a) expect += "lambda_" + std::to_string(a + 1) + ",";
  expect += "re,im,power,L";
  require(!lines.empty() && lines[0] == expect, ErrorCode::parse_error, "bad spectrum CSV header");
  std::size_t rows = lines.size() - 1;
  if (rows > 0 && lines.back().empty()) --rows;
  require(rows == n, ErrorCode::consistency_error,
          "spectrum CSV has " + std::to_string(rows) + " rows, grid has " + std::to_string(n));

  spec.amplitude.assign(n, cplx{});
  spec.power.assign(n, 0.0);
  spec.valid.assign(n, 1);
  const double Ld = std::pow(spec.window_radius, d);
  for (std::size_t k = 0; k < n; ++k) {
    const auto cells = split(lines[k + 1], ',');
    require(cells.size() == static_cast<std::size_t>(d) + 4, ErrorCode::parse_error,
            "bad column count on line " + std::to_string(k + 2));
    const auto node = spec.grid.node(k);
    for (int a = 0; a < d; ++a) {
      const double v = parse_double(cells[static_cast<std::size_t>(a)]);
      const double step = spec.grid.axes()[static_cast<std::size_t>(a)].step;
      require(std::abs(v - node[static_cast<std::size_t>(a)]) <= 1e-9 * step, ErrorCode::consistency_error,
              "frequency on line " + std::to_string(k + 2) + " is off the grid");
    }
    const double L = parse_double(cells[static_cast<std::size_t>(d) + 3]);
    require(L == spec.window_radius, ErrorCode::consistency_error,
            "L on line " + std::to_string(k + 2) + " differs from the sidecar");
    const auto re = cells[static_cast<std::size_t>(d)], im = cells[static_cast<std::size_t>(d) + 1],
               pw = cells[static_cast<std::size_t>(d) + 2];
    if (re.empty() && im.empty() && pw.empty()) {
      spec.valid[k] = 0;
      continue;
    }
    spec.amplitude[k] = {parse_double(re), parse_double(im)};
    const double power = Ld * std::norm(spec.amplitude[k]);
    const double stored = parse_double(pw);
    require(std::abs(power - stored) <= 1e-9 * std::max(1.0, std::abs(power)),
            ErrorCode::consistency_error,
            "power on line " + std::to_string(k + 2) + " disagrees with the amplitude");
    spec.power[k] = power;
  }
  return spec;
}

}  // namespace quasidiff
