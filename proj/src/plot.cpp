#include "quasidiff/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "quasidiff/error.hpp"
#include "quasidiff/io.hpp"

namespace quasidiff {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 80, kRight = 150, kTop = 50, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (lo == hi) {
      const double pad = lo == 0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= pad, hi += pad;
    }
  }
  double frac(double v) const { return (v - lo) / (hi - lo); }
};

struct Frame {
  Range x, y;
  double px(double v) const { return kLeft + x.frac(v) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - y.frac(v) * (kHeight - kTop - kBottom); }
};

void axes(std::string& svg, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  svg += "<g stroke=\"#000\" stroke-width=\"1\" fill=\"none\">";
  svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y0) + "\"/>";
  svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) + "\"/>";
  svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#000\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double vx = f.x.lo + (f.x.hi - f.x.lo) * i / 4.0;
    const double vy = f.y.lo + (f.y.hi - f.y.lo) * i / 4.0;
    svg += "<line stroke=\"#000\" x1=\"" + num(f.px(vx)) + "\" y1=\"" + num(y0) + "\" x2=\"" +
           num(f.px(vx)) + "\" y2=\"" + num(y0 + 5) + "\"/>";
    svg += "<text x=\"" + num(f.px(vx)) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\">" +
           tick_label(vx) + "</text>\n";
    svg += "<line stroke=\"#000\" x1=\"" + num(x0 - 5) + "\" y1=\"" + num(f.py(vy)) + "\" x2=\"" +
           num(x0) + "\" y2=\"" + num(f.py(vy)) + "\"/>";
    svg += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(f.py(vy) + 4) + "\" text-anchor=\"end\">" +
           tick_label(vy) + "</text>\n";
  }
  svg += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 20) +
         "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  svg += "<text transform=\"translate(20," + num((y0 + y1) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(ylabel) + "</text>\n";
  svg += "</g>\n";
}

// Blue to yellow through green.
std::string heat_color(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double r = 68 + t * (253 - 68), g = 1 + t * (231 - 1), b = 84 + t * (37 - 84);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(r)),
                static_cast<int>(std::lround(g)), static_cast<int>(std::lround(b)));
  return buf;
}

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_double(row[c]);
    out += '\n';
  }
  return out;
}

PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "line") return PlotKind::line;
  if (s == "scatter") return PlotKind::scatter;
  if (s == "heatmap") return PlotKind::heatmap;
  fail(ErrorCode::invalid_argument, "unknown plot kind '" + s + "'");
}

std::string render_svg(const Table& table, PlotKind kind, const std::string& config_hash) {
  require(!table.empty(), ErrorCode::invalid_argument, "cannot plot an empty table");
  const std::size_t ncol = table.columns.size();
  for (const auto& row : table.rows)
    require(row.size() == ncol, ErrorCode::invalid_argument, "ragged table '" + table.title + "'");
  if (kind == PlotKind::heatmap)
    require(ncol == 3, ErrorCode::invalid_argument, "heatmap needs columns x, y, value");
  else
    require(ncol >= 2, ErrorCode::invalid_argument, "plot needs at least two columns");

  Frame f;
  for (const auto& row : table.rows) {
    f.x.add(row[0]);
    if (kind == PlotKind::heatmap) {
      f.y.add(row[1]);
    } else {
      for (std::size_t c = 1; c < ncol; ++c) f.y.add(row[c]);
    }
  }
  f.x.settle();
  f.y.settle();

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  svg += "<metadata>config-hash: " + escape(config_hash) + "</metadata>\n";
  svg += "<title>" + escape(table.title) + "</title>\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) +
         "\" y=\"28\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">" +
         escape(table.title) + "</text>\n";

  if (kind == PlotKind::heatmap) {
    std::vector<double> xs, ys;
    Range v;
    for (const auto& row : table.rows) {
      xs.push_back(row[0]);
      ys.push_back(row[1]);
      v.add(row[2]);
    }
    v.settle();
    auto cell = [](std::vector<double> vals, double span) {
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      double step = span;
      for (std::size_t i = 1; i < vals.size(); ++i) step = std::min(step, vals[i] - vals[i - 1]);
      return vals.size() > 1 ? step : span;
    };
    const double cx = cell(xs, f.x.hi - f.x.lo), cy = cell(ys, f.y.hi - f.y.lo);
    f.x.lo -= cx / 2, f.x.hi += cx / 2, f.y.lo -= cy / 2, f.y.hi += cy / 2;
    const double w = cx / (f.x.hi - f.x.lo) * (kWidth - kLeft - kRight);
    const double h = cy / (f.y.hi - f.y.lo) * (kHeight - kTop - kBottom);
    svg += "<g shape-rendering=\"crispEdges\">\n";
    for (const auto& row : table.rows) {
      svg += "<rect x=\"" + num(f.px(row[0]) - w / 2) + "\" y=\"" + num(f.py(row[1]) - h / 2) +
             "\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"" +
             heat_color(v.frac(row[2])) + "\"/>\n";
    }
    svg += "</g>\n";
    axes(svg, f, table.columns[0], table.columns[1]);
    svg += "<text x=\"" + num(kWidth - kRight + 10) + "\" y=\"" + num(kTop + 10) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(table.columns[2]) + " " +
           tick_label(v.lo) + " .. " + tick_label(v.hi) + "</text>\n";
  } else {
    for (std::size_t c = 1; c < ncol; ++c) {
      const std::string color = kColors[(c - 1) % std::size(kColors)];
      if (kind == PlotKind::line) {
        std::string pts;
        for (const auto& row : table.rows) {
          if (!std::isfinite(row[0]) || !std::isfinite(row[c])) continue;
          pts += num(f.px(row[0])) + "," + num(f.py(row[c])) + " ";
        }
        if (!pts.empty()) pts.pop_back();
        svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\" points=\"" + pts + "\"/>\n";
      } else {
        svg += "<g fill=\"" + color + "\">\n";
        for (const auto& row : table.rows) {
          if (!std::isfinite(row[0]) || !std::isfinite(row[c])) continue;
          svg += "<circle cx=\"" + num(f.px(row[0])) + "\" cy=\"" + num(f.py(row[c])) + "\" r=\"2.5\"/>\n";
        }
        svg += "</g>\n";
      }
      const double ly = kTop + 10 + 16 * static_cast<double>(c - 1);
      svg += "<rect x=\"" + num(kWidth - kRight + 10) + "\" y=\"" + num(ly - 8) +
             "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>";
      svg += "<text x=\"" + num(kWidth - kRight + 26) + "\" y=\"" + num(ly + 1) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(table.columns[c]) + "</text>\n";
    }
    axes(svg, f, table.columns[0], ncol == 2 ? table.columns[1] : "");
  }
  svg += "</svg>\n";
  return svg;
}

void plot_emit(const Table& table, PlotKind kind, const std::filesystem::path& path,
               const std::string& config_hash) {
  atomic_write(path, render_svg(table, kind, config_hash));
}

}  // namespace quasidiff
