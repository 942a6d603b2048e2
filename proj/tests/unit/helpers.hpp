// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "daeconf/nn.hpp"
#include "daeconf/tensor.hpp"

namespace testing_helpers {

inline double max_abs_diff(const daeconf::Tensor& a, const daeconf::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// ||a - b|| / (||a|| + ||b||), 0 when both vanish.
inline double rel_error(const daeconf::Tensor& a, const daeconf::Tensor& b) {
  const double denom = daeconf::l2_norm(a) + daeconf::l2_norm(b);
  return denom == 0.0 ? 0.0 : daeconf::l2_norm(a - b) / denom;
}

/// Central differences of a scalar function of `t`, perturbing t in place.
inline daeconf::Tensor central_diff(daeconf::Tensor& t, const std::function<double()>& f, double h = 1e-5) {
  daeconf::Tensor g(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double keep = t[i];
    t[i] = keep + h;
    const double up = f();
    t[i] = keep - h;
    const double down = f();
    t[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline daeconf::ParamPtr random_param(const std::string& name, daeconf::Shape shape, daeconf::Rng& rng,
                                      double scale = 0.5) {
  return daeconf::make_parameter(name, daeconf::uniform(rng, std::move(shape), -scale, scale));
}

}  // namespace testing_helpers
