// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "daeconf/classifier.hpp"

namespace daeconf {

double relative_error(std::span<const double> a, std::span<const double> n) {
  if (a.size() != n.size()) throw DimensionError("relative_error: size mismatch");
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nn);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

namespace {

/// Central differences of f over every entry of `values`, restored afterwards.
std::vector<double> numeric_grad(Tensor& values, const std::function<double()>& f, double h) {
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + h;
    const double up = f();
    values[i] = keep - h;
    const double down = f();
    values[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

void append(std::vector<double>& dst, const Tensor& t) { dst.insert(dst.end(), t.data().begin(), t.data().end()); }

/// Loss sum(layer(x) * R) for a random R; checks dL/dx and dL/dparams.
double check_layer(const Layer& layer, Tensor x, Rng& rng, double h) {
  const Tensor probe = layer.forward(x, nullptr);
  const Tensor r = uniform(rng, probe.shape(), -1.0, 1.0);
  auto loss = [&] { return sum(hadamard(layer.forward(x, nullptr), r)); };

  LayerCache cache;
  layer.forward(x, &cache);
  Gradients grads;
  const Tensor gx = layer.backward(r, cache, &grads);

  std::vector<double> analytic, numeric;
  append(analytic, gx);
  const auto nx = numeric_grad(x, loss, h);
  numeric.insert(numeric.end(), nx.begin(), nx.end());
  for (const auto& p : layer.parameters()) {
    const Tensor* g = grads.find(*p);
    append(analytic, g ? *g : Tensor(p->value.shape()));
    const auto np = numeric_grad(p->value, loss, h);
    numeric.insert(numeric.end(), np.begin(), np.end());
  }
  return relative_error(analytic, numeric);
}

/// Inputs kept away from the ReLU kink and from max-pool near-ties.
Tensor spread_input(Rng& rng, Shape shape) {
  Tensor x = uniform(rng, shape, 0.05, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (rng.uniform() < 0.5) x[i] = -x[i];
  return x;
}

double check_joint(Variant variant, DecoderMode decoder, Rng& rng, double h) {
  ModelSpec spec;
  spec.variant = variant;
  spec.arch = {6, {5, 4}, false, decoder, OutputActivation::sigmoid};
  spec.classes = 3;
  spec.omega = 2;
  spec.sigma = 0.3;
  JointModel model = JointModel::build(spec, rng.next_u64());
  // Zero biases put dead-input ReLUs exactly on their kink.
  for (const auto& p : model.parameters())
    if (p->value.rank() == 1) p->value = uniform(rng, p->value.shape(), -0.3, 0.3);
  const std::size_t batch = 4;
  Tensor x = uniform(rng, {batch, 6}, 0.0, 1.0);
  Tensor noisy = x;
  noisy += gaussian(rng, x.shape(), 0.0, 0.3);
  std::vector<std::size_t> labels(batch);
  for (auto& l : labels) l = rng.index(3);
  TrainOptions opts;
  opts.lambda_rec = 0.7;
  opts.lambda_l2 = 0.05;
  auto loss = [&] { return joint_loss(model, x, labels, &noisy, opts, nullptr); };

  Gradients grads;
  joint_loss(model, x, labels, &noisy, opts, &grads);
  std::vector<double> analytic, numeric;
  for (const auto& p : model.parameters()) {
    const Tensor* g = grads.find(*p);
    append(analytic, g ? *g : Tensor(p->value.shape()));
    const auto np = numeric_grad(p->value, loss, h);
    numeric.insert(numeric.end(), np.begin(), np.end());
  }
  return relative_error(analytic, numeric);
}

ParamPtr random_param(const std::string& name, Shape shape, Rng& rng) {
  return make_parameter(name, uniform(rng, shape, -0.5, 0.5));
}

}  // namespace

std::vector<GradCheckRow> run_gradchecks(std::uint64_t seed, const GradCheckOptions& options) {
  using Check = std::function<double(Rng&)>;
  const double h = options.step;
  const std::vector<std::pair<std::string, Check>> checks = {
      {"dense",
       [h](Rng& rng) {
         const std::size_t in = 2 + rng.index(5), out = 2 + rng.index(5);
         Dense l(random_param("w", {in, out}, rng), random_param("b", {out}, rng));
         return check_layer(l, spread_input(rng, {3, in}), rng, h);
       }},
      {"dense_transposed",
       [h](Rng& rng) {
         const std::size_t in = 2 + rng.index(5), out = 2 + rng.index(5);
         Dense l(random_param("w", {out, in}, rng), random_param("b", {out}, rng), true);
         return check_layer(l, spread_input(rng, {3, in}), rng, h);
       }},
      {"conv2d",
       [h](Rng& rng) {
         const std::size_t c = 1 + rng.index(2), o = 1 + rng.index(3), k = 2 + rng.index(2);
         ImageGeometry g{c, 6, 5};
         Conv2d l(random_param("w", {o, c, k, k}, rng), random_param("b", {o}, rng), g);
         return check_layer(l, spread_input(rng, {2, g.size()}), rng, h);
       }},
      {"maxpool2x2",
       [h](Rng& rng) {
         ImageGeometry g{2, 4, 6};
         MaxPool2x2 l(g);
         return check_layer(l, spread_input(rng, {2, g.size()}), rng, h);
       }},
      {"relu", [h](Rng& rng) { return check_layer(Relu(), spread_input(rng, {3, 7}), rng, h); }},
      {"sigmoid", [h](Rng& rng) { return check_layer(Sigmoid(), spread_input(rng, {3, 7}), rng, h); }},
      {"softmax", [h](Rng& rng) { return check_layer(Softmax(), spread_input(rng, {3, 7}), rng, h); }},
      {"joint_loss_plain", [h](Rng& rng) { return check_joint(Variant::plain, DecoderMode::symmetric, rng, h); }},
      {"joint_loss_cool", [h](Rng& rng) { return check_joint(Variant::cool, DecoderMode::symmetric, rng, h); }},
      {"joint_loss_dae_symmetric",
       [h](Rng& rng) { return check_joint(Variant::dae, DecoderMode::symmetric, rng, h); }},
      {"joint_loss_dae_asymmetric",
       [h](Rng& rng) { return check_joint(Variant::dae, DecoderMode::asymmetric, rng, h); }},
  };
  std::vector<GradCheckRow> rows;
  for (std::size_t c = 0; c < checks.size(); ++c) {
    GradCheckRow row{checks[c].first, options.instances, 0.0, true};
    for (std::size_t i = 0; i < options.instances; ++i) {
      Rng rng(derive_seed(derive_seed(seed, c), i));
      row.max_rel_error = std::max(row.max_rel_error, checks[c].second(rng));
    }
    row.passed = row.max_rel_error < options.tolerance;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace daeconf
