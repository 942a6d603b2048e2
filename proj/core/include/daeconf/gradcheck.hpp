// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace daeconf {

struct GradCheckOptions {
  std::size_t instances = 10;
  double step = 1e-5;  // central-difference step
  double tolerance = 1e-4;
};

struct GradCheckRow {
  std::string name;
  std::size_t instances = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// ||a - n|| / (||a|| + ||n||), 0 when both vanish.
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

/// Checks the input and parameter gradients of every layer kind under a
/// random linear loss, then the joint training loss of every model variant,
/// on `instances` random draws each.
std::vector<GradCheckRow> run_gradchecks(std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace daeconf
