// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/dae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace daeconf {

std::string to_string(DecoderMode m) { return m == DecoderMode::symmetric ? "symmetric" : "asymmetric"; }
std::string to_string(OutputActivation a) { return a == OutputActivation::sigmoid ? "sigmoid" : "linear"; }
std::string to_string(JacobianMethod m) {
  switch (m) {
    case JacobianMethod::reverse: return "reverse";
    case JacobianMethod::forward: return "forward";
    case JacobianMethod::finite_diff: return "finite_diff";
  }
  return "?";
}

DecoderMode parse_decoder_mode(const std::string& s) {
  if (s == "symmetric") return DecoderMode::symmetric;
  if (s == "asymmetric") return DecoderMode::asymmetric;
  throw ParameterError("unknown decoder mode '" + s + "' (expected symmetric or asymmetric)");
}

OutputActivation parse_output_activation(const std::string& s) {
  if (s == "sigmoid") return OutputActivation::sigmoid;
  if (s == "linear") return OutputActivation::linear;
  throw ParameterError("unknown output activation '" + s + "' (expected sigmoid or linear)");
}

JacobianMethod parse_jacobian_method(const std::string& s) {
  if (s == "reverse") return JacobianMethod::reverse;
  if (s == "forward") return JacobianMethod::forward;
  if (s == "finite_diff") return JacobianMethod::finite_diff;
  throw ParameterError("unknown jacobian method '" + s + "' (expected reverse, forward or finite_diff)");
}

void ConfidenceParams::validate() const {
  if (!(alpha > 0.0)) throw ParameterError("confidence: alpha must be positive");
  if (!(beta > 0.0)) throw ParameterError("confidence: beta must be positive");
  if (!(fd_step > 0.0)) throw ParameterError("confidence: fd_step must be positive");
}

// ---------------------------------------------------------------------------
// DaeModel

DaeModel::DaeModel(LayerStack encoder, LayerStack decoder, double sigma, std::size_t input_dim)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)), input_dim_(input_dim) {
  set_sigma(sigma);
  if (input_dim_ == 0) throw ParameterError("DaeModel: input_dim must be positive");
  if (encoder_.in_features() != 0 && encoder_.in_features() != input_dim_)
    throw DimensionError("DaeModel: encoder input width != input_dim");
  if (!decoder_.empty()) {
    const std::size_t code = code_dim();
    if (decoder_.in_features() != 0 && decoder_.in_features() != code)
      throw DimensionError("DaeModel: decoder input width != encoder output width");
    const std::size_t out = decoder_.out_features() ? decoder_.out_features() : code;
    if (out != input_dim_) throw DimensionError("DaeModel: decoder output width != input_dim");
  }
}

void DaeModel::set_sigma(double sigma) {
  if (!(sigma >= 0.0)) throw ParameterError("DaeModel: sigma must be non-negative");
  sigma_ = sigma;
}

std::size_t DaeModel::code_dim() const {
  const std::size_t w = encoder_.out_features();
  return w ? w : input_dim_;
}

namespace {

struct DenseHandles {
  ParamPtr weight;
  ParamPtr bias;
};

DenseHandles new_dense(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  auto w = make_parameter(name + ".weight", Tensor({in, out}));
  auto b = make_parameter(name + ".bias", Tensor({out}));
  init_glorot_uniform(*w, in, out, rng);
  return {w, b};
}

void add_output_activation(LayerStack& s, OutputActivation act) {
  if (act == OutputActivation::sigmoid) s.emplace<Sigmoid>();
}

}  // namespace

DaeModel DaeModel::build_encoder_only(const Architecture& arch, Rng& encoder_rng) {
  if (arch.input_dim == 0) throw ParameterError("Architecture: input_dim must be positive");
  if (arch.hidden.empty()) throw ParameterError("Architecture: need at least one hidden layer");
  LayerStack enc;
  std::size_t width = arch.input_dim;
  if (arch.convolutional) {
    if (arch.input_dim != 28 * 28) throw ParameterError("Architecture: convolutional encoder needs 28x28 input");
    auto conv = [&](const std::string& name, ImageGeometry in, std::size_t out_ch) {
      const std::size_t k = 5;
      auto w = make_parameter(name + ".weight", Tensor({out_ch, in.channels, k, k}));
      auto b = make_parameter(name + ".bias", Tensor({out_ch}));
      init_glorot_uniform(*w, in.channels * k * k, out_ch * k * k, encoder_rng);
      auto& c = enc.emplace<Conv2d>(w, b, in);
      enc.emplace<Relu>();
      auto& p = enc.emplace<MaxPool2x2>(c.output_geometry());
      return p.output_geometry();
    };
    ImageGeometry g = conv("enc.conv0", {1, 28, 28}, 32);
    g = conv("enc.conv1", g, 64);
    width = g.size();
  }
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    auto [w, b] = new_dense("enc.dense" + std::to_string(i), width, arch.hidden[i], encoder_rng);
    enc.emplace<Dense>(w, b);
    enc.emplace<Relu>();
    width = arch.hidden[i];
  }
  return DaeModel(std::move(enc), LayerStack{}, 0.0, arch.input_dim);
}

DaeModel DaeModel::build(const Architecture& arch, double sigma, Rng& encoder_rng, Rng& decoder_rng) {
  DaeModel m = build_encoder_only(arch, encoder_rng);
  LayerStack dec;
  if (arch.decoder == DecoderMode::symmetric) {
    if (arch.convolutional)
      throw ParameterError("Architecture: symmetric decoder is only defined for dense encoders");
    // Walk the encoder's dense layers backwards, reusing each weight transposed.
    std::vector<const Dense*> dense;
    for (std::size_t i = 0; i < m.encoder_.size(); ++i)
      if (auto* d = dynamic_cast<const Dense*>(&m.encoder_.layer(i))) dense.push_back(d);
    for (std::size_t i = dense.size(); i-- > 0;) {
      auto b = make_parameter("dec.dense" + std::to_string(dense.size() - 1 - i) + ".bias",
                              Tensor({dense[i]->in_features()}));
      dec.emplace<Dense>(dense[i]->weight(), b, true);
      if (i > 0) dec.emplace<Relu>();
    }
  } else {
    std::vector<std::size_t> widths(arch.hidden.rbegin(), arch.hidden.rend());
    if (arch.convolutional) widths.push_back(4 * 4 * 64);
    widths.push_back(arch.input_dim);
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      auto [w, b] = new_dense("dec.dense" + std::to_string(i), widths[i], widths[i + 1], decoder_rng);
      dec.emplace<Dense>(w, b);
      if (i + 2 < widths.size()) dec.emplace<Relu>();
    }
  }
  add_output_activation(dec, arch.output);
  return DaeModel(std::move(m.encoder_), std::move(dec), sigma, arch.input_dim);
}

std::vector<ParamPtr> DaeModel::parameters() const {
  std::vector<ParamPtr> out = encoder_.parameters();
  for (auto& p : decoder_.parameters())
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  return out;
}

DaeModel DaeModel::clone(ParamMap& params) const {
  DaeModel m;
  m.encoder_ = encoder_.clone(params);
  m.decoder_ = decoder_.clone(params);
  m.sigma_ = sigma_;
  m.input_dim_ = input_dim_;
  return m;
}

// ---------------------------------------------------------------------------
// Reconstruction

Tensor corrupt(const Tensor& x, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ParameterError("corrupt: sigma must be non-negative");
  return x + gaussian(rng, x.shape(), 0.0, sigma);
}

namespace {

Tensor as_row(const Tensor& x, std::size_t dim) {
  if (x.size() != dim) throw DimensionError("expected a single sample of width " + std::to_string(dim) +
                                            ", got " + shape_string(x.shape()));
  return x.rank() == 2 && x.rows() == 1 ? x : x.reshaped({1, dim});
}

void require_batch(const DaeModel& model, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != model.input_dim())
    throw DimensionError("expected [N, " + std::to_string(model.input_dim()) + "] input, got " +
                         shape_string(x.shape()));
}

/// Encoder followed by decoder as one flat list, with caches from a single
/// train-mode pass.
struct Trace {
  std::vector<const Layer*> layers;
  std::vector<LayerCache> caches;
  Tape enc;
  Tape dec;
};

Trace trace(const DaeModel& model, const Tensor& x1) {
  Trace t;
  Tensor h = model.encoder().forward(x1, Mode::train, &t.enc);
  model.decoder().forward(h, Mode::train, &t.dec);
  for (std::size_t i = 0; i < model.encoder().size(); ++i) {
    t.layers.push_back(&model.encoder().layer(i));
    t.caches.push_back(t.enc.caches[i]);
  }
  for (std::size_t i = 0; i < model.decoder().size(); ++i) {
    t.layers.push_back(&model.decoder().layer(i));
    t.caches.push_back(t.dec.caches[i]);
  }
  return t;
}

Tensor diag_reverse(const DaeModel& model, const Tensor& x1) {
  const std::size_t D = model.input_dim();
  Trace t = trace(model, x1);
  Tensor diag({D});
  for (std::size_t i = 0; i < D; ++i) {
    Tensor g({1, D});
    g[i] = 1.0;
    Tensor gh = model.decoder().backward(t.dec, g, nullptr);
    Tensor gx = model.encoder().backward(t.enc, gh, nullptr);
    diag[i] = gx[i];
  }
  return diag;
}

bool is_elementwise(LayerKind k) { return k == LayerKind::relu || k == LayerKind::sigmoid; }

Tensor diag_forward(const DaeModel& model, const Tensor& x1) {
  const std::size_t D = model.input_dim();
  Trace t = trace(model, x1);
  const std::size_t L = t.layers.size();
  Tensor diag({1, D});
  if (L == 0) {
    for (auto& v : diag.data()) v = 1.0;
    return diag.reshaped({D});
  }
  // Last dense layer that is followed only by elementwise activations; only
  // the diagonal of its contribution is needed.
  std::ptrdiff_t last = -1;
  for (std::size_t i = L; i-- > 0;) {
    if (t.layers[i]->kind() == LayerKind::dense) {
      last = static_cast<std::ptrdiff_t>(i);
      break;
    }
    if (!is_elementwise(t.layers[i]->kind())) break;
  }
  if (last < 0) {
    Tensor T = Tensor::identity(D);
    for (std::size_t i = 0; i < L; ++i) T = t.layers[i]->jvp(T, t.caches[i]);
    for (std::size_t i = 0; i < D; ++i) diag[i] = T(i, i);
    return diag.reshaped({D});
  }
  const auto& tail_dense = static_cast<const Dense&>(*t.layers[last]);
  if (last == 0) {
    for (std::size_t i = 0; i < D; ++i) diag[i] = tail_dense.w(i, i);
  } else {
    Tensor T;
    std::size_t start = 0;
    if (t.layers[0]->kind() == LayerKind::dense) {
      // Tangent of e_i through the first dense layer is row i of its weight.
      const auto& first = static_cast<const Dense&>(*t.layers[0]);
      const std::size_t out = first.out_features();
      T = Tensor({D, out});
      for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < out; ++j) T(i, j) = first.w(i, j);
      start = 1;
    } else {
      T = Tensor::identity(D);
    }
    for (std::size_t i = start; i < static_cast<std::size_t>(last); ++i) T = t.layers[i]->jvp(T, t.caches[i]);
    const std::size_t H = T.cols();
    for (std::size_t i = 0; i < D; ++i) {
      double s = 0.0;
      for (std::size_t h = 0; h < H; ++h) s += T(i, h) * tail_dense.w(h, i);
      diag[i] = s;
    }
  }
  for (std::size_t i = static_cast<std::size_t>(last) + 1; i < L; ++i) diag = t.layers[i]->jvp(diag, t.caches[i]);
  return diag.reshaped({D});
}

Tensor diag_finite_diff(const DaeModel& model, const Tensor& x1, double h) {
  const std::size_t D = model.input_dim();
  Tensor probes({2 * D, D});
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) {
      probes(2 * i, j) = x1[j];
      probes(2 * i + 1, j) = x1[j];
    }
  for (std::size_t i = 0; i < D; ++i) {
    probes(2 * i, i) += h;
    probes(2 * i + 1, i) -= h;
  }
  Tensor r = reconstruct(model, probes);
  Tensor diag({D});
  for (std::size_t i = 0; i < D; ++i) diag[i] = (r(2 * i, i) - r(2 * i + 1, i)) / (2.0 * h);
  return diag;
}

}  // namespace

Tensor reconstruct(const DaeModel& model, const Tensor& x) {
  require_batch(model, x);
  return model.decoder().infer(model.encoder().infer(x));
}

double recon_error(const DaeModel& model, const Tensor& x) {
  Tensor x1 = as_row(x, model.input_dim());
  return l2_norm(reconstruct(model, x1) - x1);
}

std::vector<double> recon_errors(const DaeModel& model, const Tensor& x) {
  Tensor r = reconstruct(model, x);
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    auto a = r.row_span(i);
    auto b = x.row_span(i);
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    out[i] = std::sqrt(s);
  }
  return out;
}

Tensor jacobian_diag(const DaeModel& model, const Tensor& x, const ConfidenceParams& params) {
  Tensor x1 = as_row(x, model.input_dim());
  switch (params.jacobian) {
    case JacobianMethod::reverse: return diag_reverse(model, x1);
    case JacobianMethod::forward: return diag_forward(model, x1);
    case JacobianMethod::finite_diff:
      if (!(params.fd_step > 0.0)) throw ParameterError("jacobian_diag: fd_step must be positive");
      return diag_finite_diff(model, x1, params.fd_step);
  }
  throw ParameterError("jacobian_diag: unknown method");
}

double gamma(const DaeModel& model, const Tensor& x, const ConfidenceParams& params) {
  Tensor d = jacobian_diag(model, x, params);
  double s = 0.0;
  for (double v : d.data()) s += v - 1.0;
  return s / static_cast<double>(d.size());
}

double gate(double gamma_value, double beta) {
  if (!(beta > 0.0)) throw ParameterError("gate: beta must be positive");
  return gamma_value <= 0.0 ? 1.0 : std::exp(-beta * gamma_value);
}

double confidence_score(double recon_error, double gate_value, double alpha, std::size_t dim) {
  if (dim == 0) throw ParameterError("confidence_score: zero input dimension");
  return std::exp(-alpha / static_cast<double>(dim) * recon_error) * gate_value;
}

ConfidenceReport confidence(const DaeModel& model, const Tensor& x, const ConfidenceParams& params) {
  params.validate();
  Tensor x1 = as_row(x, model.input_dim());
  ConfidenceReport rep;
  rep.recon_error = recon_error(model, x1);
  rep.gamma = gamma(model, x1, params);
  rep.gate = params.use_gate ? gate(rep.gamma, params.beta) : 1.0;
  rep.score = confidence_score(rep.recon_error, rep.gate, params.alpha, model.input_dim());
  return rep;
}

std::vector<ConfidenceReport> confidence_batch(const DaeModel& model, const Tensor& x,
                                               const ConfidenceParams& params) {
  params.validate();
  require_batch(model, x);
  std::vector<double> errs = recon_errors(model, x);
  std::vector<ConfidenceReport> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto& rep = out[i];
    rep.recon_error = errs[i];
    rep.gamma = gamma(model, x.row(i), params);
    rep.gate = params.use_gate ? gate(rep.gamma, params.beta) : 1.0;
    rep.score = confidence_score(rep.recon_error, rep.gate, params.alpha, model.input_dim());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

double weight_l2(std::span<const ParamPtr> params) {
  double s = 0.0;
  for (const auto& p : params)
    if (p->value.rank() >= 2)
      for (double v : p->value.data()) s += v * v;
  return s;
}

double apply_weight_decay(std::span<const ParamPtr> params, double lambda, Gradients& grads) {
  if (lambda == 0.0) return 0.0;
  for (const auto& p : params)
    if (p->value.rank() >= 2) {
      Tensor& g = grads[*p];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * lambda * p->value[i];
    }
  return lambda * weight_l2(params);
}

std::vector<double> train_dae(DaeModel& model, const Tensor& data, const TrainOptions& options, Rng& rng,
                              Adam& optimizer) {
  if (data.empty() || data.rank() != 2 || data.rows() == 0) throw ParameterError("train_dae: empty data");
  require_batch(model, data);
  if (!model.has_decoder()) throw ParameterError("train_dae: model has no decoder");
  if (options.batch_size == 0) throw ParameterError("train_dae: batch_size must be positive");

  Rng order_rng(rng.next_u64());
  Rng noise_rng(rng.next_u64());
  const auto params = model.parameters();
  const std::size_t n = data.rows();
  std::vector<std::size_t> order(n);
  std::vector<double> curve;
  std::size_t steps = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      if (options.max_steps && steps >= options.max_steps) return curve;
      const std::size_t end = std::min(n, start + options.batch_size);
      Tensor xb = data.gather_rows(std::span(order).subspan(start, end - start));
      Tensor xt = corrupt(xb, model.sigma(), noise_rng);
      Tape te, td;
      Tensor h = model.encoder().forward(xt, Mode::train, &te);
      Tensor r = model.decoder().forward(h, Mode::train, &td);
      double loss = options.lambda_rec * mse(r, xb);
      Gradients grads;
      Tensor g = mse_grad(r, xb) * options.lambda_rec;
      Tensor gh = model.decoder().backward(td, g, &grads);
      model.encoder().backward(te, gh, &grads);
      loss += apply_weight_decay(params, options.lambda_l2, grads);
      optimizer.step(params, grads);
      curve.push_back(loss);
      ++steps;
    }
  }
  return curve;
}

}  // namespace daeconf
