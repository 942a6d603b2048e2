// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace daeconf {

using CsvCell = std::variant<std::string, double, long long, unsigned long long>;

/// Comma-separated table with a header row. Reals use "%.17g" so every value
/// round-trips; strings containing a comma, quote or newline are quoted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(std::vector<CsvCell> cells);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }

  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<CsvCell>> rows_;
};

std::string format_real(double v);

}  // namespace daeconf
