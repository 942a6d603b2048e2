// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "daeconf/errors.hpp"
#include "daeconf/idx.hpp"

namespace daeconf {

namespace {

constexpr std::array<std::pair<double, Rgb>, 5> kRamp = {{
    {0.00, {0x44, 0x01, 0x54}},
    {0.25, {0x3b, 0x52, 0x8b}},
    {0.50, {0x21, 0x91, 0x8c}},
    {0.75, {0x5e, 0xc9, 0x62}},
    {1.00, {0xfd, 0xe7, 0x25}},
}};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

Rgb color_ramp(double t) {
  if (std::isnan(t)) throw ParameterError("color_ramp: NaN");
  t = std::clamp(t, 0.0, 1.0);
  std::size_t i = 0;
  while (i + 2 < kRamp.size() && t > kRamp[i + 1].first) ++i;
  const auto& [t0, c0] = kRamp[i];
  const auto& [t1, c1] = kRamp[i + 1];
  const double u = (t - t0) / (t1 - t0);
  auto mix = [u](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(a + u * (static_cast<double>(b) - a)));
  };
  return {mix(c0.r, c1.r), mix(c0.g, c1.g), mix(c0.b, c1.b)};
}

std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string svg_heatmap(const Tensor& field, const HeatmapOptions& options) {
  if (field.rank() != 2) throw DimensionError("svg_heatmap: field must be [rows, cols]");
  if (!field.all_finite()) throw ParameterError("svg_heatmap: field contains NaN or infinite values");
  if (!(options.cell > 0.0)) throw ParameterError("svg_heatmap: cell size must be positive");
  const std::size_t rows = field.rows(), cols = field.cols();
  const auto [lo_it, hi_it] = std::minmax_element(field.data().begin(), field.data().end());
  const double lo = options.vmin.value_or(field.size() ? *lo_it : 0.0);
  const double hi = options.vmax.value_or(field.size() ? *hi_it : 1.0);
  const double title_h = options.title.empty() ? 0.0 : 20.0;
  const double w = options.cell * static_cast<double>(cols), h = options.cell * static_cast<double>(rows) + title_h;

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w) << "\" height=\"" << num(h)
    << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" shape-rendering=\"crispEdges\">\n";
  if (!options.title.empty())
    s << "<text x=\"" << num(w / 2) << "\" y=\"15\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(options.title) << "</text>\n";
  s << "<g>\n";
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double t = hi > lo ? (field(r, c) - lo) / (hi - lo) : 0.0;
      s << "<rect x=\"" << num(options.cell * static_cast<double>(c)) << "\" y=\""
        << num(title_h + options.cell * static_cast<double>(r)) << "\" width=\"" << num(options.cell)
        << "\" height=\"" << num(options.cell) << "\" fill=\"" << to_hex(color_ramp(t)) << "\"/>\n";
    }
  s << "</g>\n</svg>\n";
  return s.str();
}

void write_svg_heatmap(const Tensor& field, const std::filesystem::path& path, const HeatmapOptions& options) {
  write_text(path, svg_heatmap(field, options));
}

std::string svg_curves(const std::vector<Series>& series, const CurveOptions& o) {
  if (!(o.x_max > o.x_min) || !(o.y_max > o.y_min)) throw ParameterError("svg_curves: empty axis range");
  for (const auto& sr : series) {
    if (sr.x.size() != sr.y.size()) throw DimensionError("svg_curves: series '" + sr.name + "' has x/y size mismatch");
    for (std::size_t i = 0; i < sr.x.size(); ++i)
      if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i]))
        throw ParameterError("svg_curves: series '" + sr.name + "' contains non-finite values");
  }
  const double ml = 50, mr = 130, mt = 30, mb = 45;
  const double pw = o.width - ml - mr, ph = o.height - mt - mb;
  if (!(pw > 0 && ph > 0)) throw ParameterError("svg_curves: canvas too small");
  auto px = [&](double x) { return ml + (x - o.x_min) / (o.x_max - o.x_min) * pw; };
  auto py = [&](double y) { return mt + (o.y_max - y) / (o.y_max - o.y_min) * ph; };
  // Series colors are spread along the ramp.
  auto color = [&](std::size_t i) {
    return to_hex(color_ramp(series.size() > 1 ? static_cast<double>(i) / static_cast<double>(series.size() - 1) * 0.9 : 0.0));
  };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(o.width) << "\" height=\""
    << num(o.height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << num(o.width) << "\" height=\"" << num(o.height) << "\" fill=\"white\"/>\n";
  if (!o.title.empty())
    s << "<text x=\"" << num(ml + pw / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
      << xml_escape(o.title) << "</text>\n";
  s << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = o.x_min + (o.x_max - o.x_min) * k / 4.0, fy = o.y_min + (o.y_max - o.y_min) * k / 4.0;
    s << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(mt + ph + 15) << "\" text-anchor=\"middle\">" << num(fx)
      << "</text>\n"
      << "<text x=\"" << num(ml - 5) << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">" << num(fy)
      << "</text>\n";
  }
  if (!o.x_label.empty())
    s << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(o.height - 8) << "\" text-anchor=\"middle\">"
      << xml_escape(o.x_label) << "</text>\n";
  if (!o.y_label.empty())
    s << "<text x=\"12\" y=\"" << num(mt + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 12 "
      << num(mt + ph / 2) << ")\">" << xml_escape(o.y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& sr = series[i];
    s << "<polyline fill=\"none\" stroke=\"" << color(i) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < sr.x.size(); ++j) s << (j ? " " : "") << num(px(sr.x[j])) << ',' << num(py(sr.y[j]));
    s << "\"/>\n";
    const double ly = mt + 12 + 16 * static_cast<double>(i);
    s << "<line x1=\"" << num(ml + pw + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(ml + pw + 30) << "\" y2=\""
      << num(ly) << "\" stroke=\"" << color(i) << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << num(ml + pw + 35) << "\" y=\"" << num(ly + 4) << "\">" << xml_escape(sr.name)
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void write_svg_curves(const std::vector<Series>& series, const std::filesystem::path& path, const CurveOptions& options) {
  write_text(path, svg_curves(series, options));
}

std::vector<std::uint8_t> encode_pgm(const Tensor& image, std::size_t rows, std::size_t cols) {
  if (image.size() != rows * cols) throw DimensionError("encode_pgm: image size != rows * cols");
  if (!image.all_finite()) throw ParameterError("encode_pgm: image contains non-finite values");
  const std::string header = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double v : image.data()) out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
  return out;
}

void write_pgm(const Tensor& image, std::size_t rows, std::size_t cols, const std::filesystem::path& path) {
  write_file(path, encode_pgm(image, rows, cols));
}

}  // namespace daeconf
