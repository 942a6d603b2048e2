// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/csv.hpp"

#include <cmath>
#include <cstdio>

#include "daeconf/errors.hpp"
#include "daeconf/idx.hpp"

namespace daeconf {

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw ParameterError("CsvTable: no columns");
}

void CsvTable::add_row(std::vector<CsvCell> cells) {
  if (cells.size() != columns_.size())
    throw DimensionError("CsvTable: row has " + std::to_string(cells.size()) + " cells, expected " +
                         std::to_string(columns_.size()));
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + quote(columns_[i]);
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) out += quote(v);
            else if constexpr (std::is_same_v<T, double>) out += format_real(v);
            else out += std::to_string(v);
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  const std::string s = str();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace daeconf
