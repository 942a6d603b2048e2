// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "daeconf/tensor.hpp"

namespace daeconf {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Piecewise-linear ramp through five fixed control points:
///   t = 0.00  #440154
///   t = 0.25  #3b528b
///   t = 0.50  #21918c
///   t = 0.75  #5ec962
///   t = 1.00  #fde725
/// t is clamped to [0, 1]; channels are rounded to the nearest integer.
Rgb color_ramp(double t);
std::string to_hex(Rgb c);

struct HeatmapOptions {
  std::string title;
  double cell = 4.0;  // pixels per grid cell
  /// Value range mapped to t = 0..1. Defaults to the field's min and max.
  std::optional<double> vmin;
  std::optional<double> vmax;
};

/// One <rect> per cell of a [rows, cols] field, row 0 at the top. A constant
/// field maps to t = 0. Throws ParameterError on non-finite values.
std::string svg_heatmap(const Tensor& field, const HeatmapOptions& options = {});
void write_svg_heatmap(const Tensor& field, const std::filesystem::path& path, const HeatmapOptions& options = {});

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct CurveOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  double width = 480.0;
  double height = 360.0;
};

/// Line plot with axes, tick labels and a legend.
std::string svg_curves(const std::vector<Series>& series, const CurveOptions& options = {});
void write_svg_curves(const std::vector<Series>& series, const std::filesystem::path& path,
                      const CurveOptions& options = {});

/// Binary greyscale (P5, maxval 255). `image` is [rows, cols] (or [N] with
/// N = rows * cols given explicitly) with values in [0, 1]; bytes are
/// round(255 * clamp(v, 0, 1)).
std::vector<std::uint8_t> encode_pgm(const Tensor& image, std::size_t rows, std::size_t cols);
void write_pgm(const Tensor& image, std::size_t rows, std::size_t cols, const std::filesystem::path& path);

/// Escapes &, <, >, " and ' for XML text and attributes.
std::string xml_escape(const std::string& s);

}  // namespace daeconf
