// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace daeconf {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool2x2: return "maxpool2x2";
    case LayerKind::relu: return "relu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::softmax: return "softmax";
  }
  return "unknown";
}

ParamPtr make_parameter(std::string name, Tensor value) {
  return std::make_shared<Parameter>(Parameter{std::move(name), std::move(value)});
}

ParamPtr ParamMap::operator()(const ParamPtr& p) {
  auto it = map_.find(p.get());
  if (it == map_.end()) it = map_.emplace(p.get(), std::make_shared<Parameter>(*p)).first;
  return it->second;
}

Tensor& Gradients::operator[](const Parameter& p) {
  auto it = grads_.find(&p);
  if (it == grads_.end()) it = grads_.emplace(&p, Tensor(p.value.shape())).first;
  return it->second;
}

const Tensor* Gradients::find(const Parameter& p) const {
  auto it = grads_.find(&p);
  return it == grads_.end() ? nullptr : &it->second;
}

namespace {

void require_width(const Tensor& x, std::size_t width, const char* layer) {
  if (x.rank() != 2 || x.cols() != width)
    throw DimensionError(std::string(layer) + ": expected [N, " + std::to_string(width) + "] input, got " +
                         shape_string(x.shape()));
}

void require_single_sample(const LayerCache& cache, const char* layer) {
  if (cache.input.empty() || cache.input.rows() != 1)
    throw StateError(std::string(layer) + ": jvp needs a cache recorded on exactly one sample");
}

}  // namespace

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(ParamPtr weight, ParamPtr bias, bool transposed)
    : weight_(std::move(weight)), bias_(std::move(bias)), transposed_(transposed) {
  if (!weight_ || !bias_) throw ParameterError("Dense: null parameter");
  if (weight_->value.rank() != 2) throw DimensionError("Dense: weight must be rank 2");
  if (bias_->value.size() != out_features())
    throw DimensionError("Dense: bias length " + std::to_string(bias_->value.size()) + " != output width " +
                         std::to_string(out_features()));
}

std::size_t Dense::in_features() const { return weight_->value.dim(transposed_ ? 1 : 0); }
std::size_t Dense::out_features() const { return weight_->value.dim(transposed_ ? 0 : 1); }

double Dense::w(std::size_t i, std::size_t j) const {
  return transposed_ ? weight_->value(j, i) : weight_->value(i, j);
}

Tensor Dense::forward(const Tensor& x, LayerCache* cache) const {
  require_width(x, in_features(), "dense");
  Tensor y = transposed_ ? matmul_nt(x, weight_->value) : matmul(x, weight_->value);
  add_row_vector(y, bias_->value);
  if (cache) cache->input = x;
  return y;
}

Tensor Dense::backward(const Tensor& grad_out, const LayerCache& cache, Gradients* grads) const {
  require_width(grad_out, out_features(), "dense backward");
  if (grads) {
    // y = x W  => dW = x^T g;   y = x W^T => dW = g^T x
    Tensor dw = transposed_ ? matmul_tn(grad_out, cache.input) : matmul_tn(cache.input, grad_out);
    (*grads)[*weight_] += dw;
    (*grads)[*bias_] += sum_rows(grad_out);
  }
  return transposed_ ? matmul(grad_out, weight_->value) : matmul_nt(grad_out, weight_->value);
}

Tensor Dense::jvp(const Tensor& tangent, const LayerCache&) const {
  require_width(tangent, in_features(), "dense jvp");
  return transposed_ ? matmul_nt(tangent, weight_->value) : matmul(tangent, weight_->value);
}

std::vector<ParamPtr> Dense::parameters() const { return {weight_, bias_}; }

std::unique_ptr<Layer> Dense::clone(ParamMap& params) const {
  return std::make_unique<Dense>(params(weight_), params(bias_), transposed_);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(ParamPtr weight, ParamPtr bias, ImageGeometry input)
    : weight_(std::move(weight)), bias_(std::move(bias)), in_(input) {
  const Tensor& w = weight_->value;
  if (w.rank() != 4 || w.dim(2) != w.dim(3)) throw DimensionError("Conv2d: weight must be [out, in, k, k]");
  if (w.dim(1) != in_.channels) throw DimensionError("Conv2d: weight input channels != input geometry");
  k_ = w.dim(2);
  if (k_ > in_.height || k_ > in_.width) throw DimensionError("Conv2d: kernel larger than input");
  if (bias_->value.size() != w.dim(0)) throw DimensionError("Conv2d: bias length != output channels");
  out_ = {w.dim(0), in_.height - k_ + 1, in_.width - k_ + 1};
}

Tensor Conv2d::correlate(const Tensor& x, bool with_bias) const {
  const std::size_t n = x.rows();
  const std::size_t C = in_.channels, H = in_.height, W = in_.width;
  const std::size_t O = out_.channels, OH = out_.height, OW = out_.width;
  const double* w = weight_->value.raw();
  Tensor y({n, out_.size()});
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x.raw() + s * in_.size();
    double* ys = y.raw() + s * out_.size();
    for (std::size_t o = 0; o < O; ++o) {
      double* yo = ys + o * OH * OW;
      if (with_bias) std::fill(yo, yo + OH * OW, bias_->value[o]);
      for (std::size_t c = 0; c < C; ++c) {
        const double* xc = xs + c * H * W;
        for (std::size_t u = 0; u < k_; ++u)
          for (std::size_t v = 0; v < k_; ++v) {
            const double wv = w[((o * C + c) * k_ + u) * k_ + v];
            for (std::size_t i = 0; i < OH; ++i) {
              const double* xr = xc + (i + u) * W + v;
              double* yr = yo + i * OW;
              for (std::size_t j = 0; j < OW; ++j) yr[j] += wv * xr[j];
            }
          }
      }
    }
  }
  return y;
}

Tensor Conv2d::forward(const Tensor& x, LayerCache* cache) const {
  require_width(x, in_.size(), "conv2d");
  if (cache) cache->input = x;
  return correlate(x, true);
}

Tensor Conv2d::backward(const Tensor& grad_out, const LayerCache& cache, Gradients* grads) const {
  require_width(grad_out, out_.size(), "conv2d backward");
  const Tensor& x = cache.input;
  const std::size_t n = x.rows();
  const std::size_t C = in_.channels, H = in_.height, W = in_.width;
  const std::size_t O = out_.channels, OH = out_.height, OW = out_.width;
  const double* w = weight_->value.raw();
  Tensor dx({n, in_.size()});
  Tensor* dw = grads ? &(*grads)[*weight_] : nullptr;
  Tensor* db = grads ? &(*grads)[*bias_] : nullptr;
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x.raw() + s * in_.size();
    const double* gs = grad_out.raw() + s * out_.size();
    double* dxs = dx.raw() + s * in_.size();
    for (std::size_t o = 0; o < O; ++o) {
      const double* go = gs + o * OH * OW;
      if (db) {
        double acc = 0.0;
        for (std::size_t i = 0; i < OH * OW; ++i) acc += go[i];
        (*db)[o] += acc;
      }
      for (std::size_t c = 0; c < C; ++c) {
        const double* xc = xs + c * H * W;
        double* dxc = dxs + c * H * W;
        for (std::size_t u = 0; u < k_; ++u)
          for (std::size_t v = 0; v < k_; ++v) {
            const std::size_t widx = ((o * C + c) * k_ + u) * k_ + v;
            const double wv = w[widx];
            double acc = 0.0;
            for (std::size_t i = 0; i < OH; ++i) {
              const double* xr = xc + (i + u) * W + v;
              double* dxr = dxc + (i + u) * W + v;
              const double* gr = go + i * OW;
              for (std::size_t j = 0; j < OW; ++j) {
                acc += gr[j] * xr[j];
                dxr[j] += wv * gr[j];
              }
            }
            if (dw) (*dw)[widx] += acc;
          }
      }
    }
  }
  return dx;
}

Tensor Conv2d::jvp(const Tensor& tangent, const LayerCache&) const {
  require_width(tangent, in_.size(), "conv2d jvp");
  return correlate(tangent, false);
}

std::unique_ptr<Layer> Conv2d::clone(ParamMap& params) const {
  return std::make_unique<Conv2d>(params(weight_), params(bias_), in_);
}

// ---------------------------------------------------------------------------
// MaxPool2x2

MaxPool2x2::MaxPool2x2(ImageGeometry input) : in_(input) {
  if (in_.height < 2 || in_.width < 2) throw DimensionError("MaxPool2x2: input smaller than window");
  out_ = {in_.channels, in_.height / 2, in_.width / 2};
}

Tensor MaxPool2x2::forward(const Tensor& x, LayerCache* cache) const {
  require_width(x, in_.size(), "maxpool2x2");
  const std::size_t n = x.rows();
  const std::size_t H = in_.height, W = in_.width, OH = out_.height, OW = out_.width;
  Tensor y({n, out_.size()});
  if (cache) {
    cache->input = x;
    cache->argmax.assign(n * out_.size(), 0);
  }
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x.raw() + s * in_.size();
    for (std::size_t c = 0; c < in_.channels; ++c)
      for (std::size_t i = 0; i < OH; ++i)
        for (std::size_t j = 0; j < OW; ++j) {
          std::size_t best = c * H * W + (2 * i) * W + 2 * j;
          for (std::size_t u = 0; u < 2; ++u)
            for (std::size_t v = 0; v < 2; ++v) {
              const std::size_t idx = c * H * W + (2 * i + u) * W + 2 * j + v;
              if (xs[idx] > xs[best]) best = idx;
            }
          const std::size_t o = (c * OH + i) * OW + j;
          y[s * out_.size() + o] = xs[best];
          if (cache) cache->argmax[s * out_.size() + o] = best;
        }
  }
  return y;
}

Tensor MaxPool2x2::backward(const Tensor& grad_out, const LayerCache& cache, Gradients*) const {
  require_width(grad_out, out_.size(), "maxpool2x2 backward");
  const std::size_t n = grad_out.rows();
  Tensor dx({n, in_.size()});
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t o = 0; o < out_.size(); ++o)
      dx[s * in_.size() + cache.argmax[s * out_.size() + o]] += grad_out[s * out_.size() + o];
  return dx;
}

Tensor MaxPool2x2::jvp(const Tensor& tangent, const LayerCache& cache) const {
  require_single_sample(cache, "maxpool2x2");
  require_width(tangent, in_.size(), "maxpool2x2 jvp");
  const std::size_t m = tangent.rows();
  Tensor out({m, out_.size()});
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t o = 0; o < out_.size(); ++o) out(r, o) = tangent(r, cache.argmax[o]);
  return out;
}

// ---------------------------------------------------------------------------
// Elementwise activations

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor Relu::forward(const Tensor& x, LayerCache* cache) const {
  Tensor y = x;
  for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
  if (cache) cache->input = x;
  return y;
}

Tensor Relu::backward(const Tensor& grad_out, const LayerCache& cache, Gradients*) const {
  if (grad_out.shape() != cache.input.shape()) throw DimensionError("relu backward: shape mismatch");
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(cache.input[i] > 0.0)) g[i] = 0.0;
  return g;
}

Tensor Relu::jvp(const Tensor& tangent, const LayerCache& cache) const {
  require_single_sample(cache, "relu");
  const std::size_t m = tangent.rows(), c = tangent.cols();
  if (c != cache.input.cols()) throw DimensionError("relu jvp: width mismatch");
  Tensor t = tangent;
  for (std::size_t j = 0; j < c; ++j)
    if (!(cache.input[j] > 0.0))
      for (std::size_t r = 0; r < m; ++r) t(r, j) = 0.0;
  return t;
}

Tensor Sigmoid::forward(const Tensor& x, LayerCache* cache) const {
  Tensor y = x;
  for (auto& v : y.data()) v = sigmoid(v);
  if (cache) {
    cache->input = x;
    cache->output = y;
  }
  return y;
}

Tensor Sigmoid::backward(const Tensor& grad_out, const LayerCache& cache, Gradients*) const {
  if (grad_out.shape() != cache.output.shape()) throw DimensionError("sigmoid backward: shape mismatch");
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = cache.output[i];
    g[i] *= s * (1.0 - s);
  }
  return g;
}

Tensor Sigmoid::jvp(const Tensor& tangent, const LayerCache& cache) const {
  require_single_sample(cache, "sigmoid");
  const std::size_t m = tangent.rows(), c = tangent.cols();
  if (c != cache.output.cols()) throw DimensionError("sigmoid jvp: width mismatch");
  Tensor t = tangent;
  for (std::size_t j = 0; j < c; ++j) {
    const double s = cache.output[j];
    const double d = s * (1.0 - s);
    for (std::size_t r = 0; r < m; ++r) t(r, j) *= d;
  }
  return t;
}

Tensor softmax_rows(const Tensor& logits) {
  const std::size_t n = logits.rows(), c = logits.cols();
  Tensor p = logits.rank() == 2 ? logits : logits.reshaped({1, c});
  for (std::size_t r = 0; r < n; ++r) {
    auto row = p.row_span(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (auto& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (auto& v : row) v /= z;
  }
  return p;
}

Tensor Softmax::forward(const Tensor& x, LayerCache* cache) const {
  Tensor y = softmax_rows(x);
  if (cache) {
    cache->input = x;
    cache->output = y;
  }
  return y;
}

Tensor Softmax::backward(const Tensor& grad_out, const LayerCache& cache, Gradients*) const {
  const Tensor& s = cache.output;
  if (grad_out.shape() != s.shape()) throw DimensionError("softmax backward: shape mismatch");
  Tensor g({s.rows(), s.cols()});
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const double sg = dot(s.row_span(r), grad_out.row_span(r));
    for (std::size_t j = 0; j < s.cols(); ++j) g(r, j) = s(r, j) * (grad_out(r, j) - sg);
  }
  return g;
}

Tensor Softmax::jvp(const Tensor& tangent, const LayerCache& cache) const {
  require_single_sample(cache, "softmax");
  const auto s = cache.output.row_span(0);
  if (tangent.cols() != s.size()) throw DimensionError("softmax jvp: width mismatch");
  Tensor t({tangent.rows(), tangent.cols()});
  for (std::size_t r = 0; r < tangent.rows(); ++r) {
    const double st = dot(s, tangent.row_span(r));
    for (std::size_t j = 0; j < s.size(); ++j) t(r, j) = s[j] * (tangent(r, j) - st);
  }
  return t;
}

// ---------------------------------------------------------------------------
// LayerStack

void LayerStack::add(std::unique_ptr<Layer> layer) {
  if (!layer) throw ParameterError("LayerStack::add: null layer");
  const std::size_t prev = out_features();
  if (prev != 0 && layer->in_features() != 0 && layer->in_features() != prev)
    throw DimensionError("LayerStack::add: layer expects width " + std::to_string(layer->in_features()) +
                         " but previous layer emits " + std::to_string(prev));
  layers_.push_back(std::move(layer));
}

std::size_t LayerStack::in_features() const {
  for (const auto& l : layers_)
    if (l->in_features() != 0) return l->in_features();
  return 0;
}

std::size_t LayerStack::out_features() const {
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    if ((*it)->out_features() != 0) return (*it)->out_features();
  return 0;
}

void LayerStack::check_input(const Tensor& x) const {
  if (x.rank() != 2) throw DimensionError("LayerStack: input must be [N, features], got " + shape_string(x.shape()));
  const std::size_t want = in_features();
  if (want != 0 && x.cols() != want)
    throw DimensionError("LayerStack: input width " + std::to_string(x.cols()) + " != expected " +
                         std::to_string(want));
}

Tensor LayerStack::infer(const Tensor& x) const { return forward(x, Mode::eval, nullptr); }

Tensor LayerStack::forward(const Tensor& x, Mode mode, Tape* tape) const {
  check_input(x);
  if (mode == Mode::train) {
    if (!tape) throw StateError("LayerStack::forward: train mode needs a tape");
    tape->caches.assign(layers_.size(), LayerCache{});
  }
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    h = layers_[i]->forward(h, mode == Mode::train ? &tape->caches[i] : nullptr);
  return h;
}

Tensor LayerStack::backward(const Tape& tape, const Tensor& grad_out, Gradients* grads) const {
  if (tape.caches.size() != layers_.size() || (!layers_.empty() && !tape.recorded()))
    throw StateError("LayerStack::backward called without a matching train-mode forward");
  Tensor g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, tape.caches[i], grads);
  return g;
}

Tensor LayerStack::jvp(const Tape& tape, Tensor tangent) const {
  if (tape.caches.size() != layers_.size()) throw StateError("LayerStack::jvp: tape does not match stack");
  for (std::size_t i = 0; i < layers_.size(); ++i) tangent = layers_[i]->jvp(tangent, tape.caches[i]);
  return tangent;
}

std::vector<ParamPtr> LayerStack::parameters() const {
  std::vector<ParamPtr> out;
  std::unordered_set<const Parameter*> seen;
  for (const auto& l : layers_)
    for (auto& p : l->parameters())
      if (seen.insert(p.get()).second) out.push_back(p);
  return out;
}

LayerStack LayerStack::clone(ParamMap& params) const {
  LayerStack out;
  for (const auto& l : layers_) out.add(l->clone(params));
  return out;
}

void init_glorot_uniform(Parameter& p, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : p.value.data()) v = rng.uniform(-limit, limit);
}

// ---------------------------------------------------------------------------
// Losses

Tensor one_hot(std::span<const std::size_t> labels, std::size_t classes) {
  Tensor t({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) throw ParameterError("one_hot: label " + std::to_string(labels[i]) + " out of range");
    t(i, labels[i]) = 1.0;
  }
  return t;
}

double cross_entropy(const Tensor& probs, const Tensor& targets) {
  if (probs.size() != targets.size()) throw DimensionError("cross_entropy: shape mismatch");
  const std::size_t n = probs.rows();
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (targets[i] != 0.0) loss -= targets[i] * std::log(std::clamp(probs[i], kProbFloor, 1.0));
  return loss / static_cast<double>(n);
}

double cross_entropy(const Tensor& probs, std::span<const std::size_t> labels) {
  return cross_entropy(probs, one_hot(labels, probs.cols()));
}

Tensor cross_entropy_grad(const Tensor& probs, const Tensor& targets) {
  if (probs.size() != targets.size()) throw DimensionError("cross_entropy_grad: shape mismatch");
  const double inv_n = 1.0 / static_cast<double>(probs.rows());
  Tensor g(probs.shape());
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (targets[i] != 0.0) g[i] = -targets[i] * inv_n / std::max(probs[i], kProbFloor);
  return g;
}

double mse(const Tensor& pred, const Tensor& target) {
  if (pred.size() != target.size()) throw DimensionError("mse: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

Tensor mse_grad(const Tensor& pred, const Tensor& target) {
  if (pred.size() != target.size()) throw DimensionError("mse_grad: shape mismatch");
  const double scale = 2.0 / static_cast<double>(pred.size());
  Tensor g(pred.shape());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = scale * (pred[i] - target[i]);
  return g;
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(AdamConfig config) : config_(config) {
  if (!(config_.eta > 0.0)) throw ParameterError("Adam: eta must be positive");
  if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0) || !(config_.beta2 >= 0.0 && config_.beta2 < 1.0))
    throw ParameterError("Adam: betas must lie in [0, 1)");
  if (!(config_.epsilon > 0.0)) throw ParameterError("Adam: epsilon must be positive");
}

void Adam::step(std::span<const ParamPtr> params, const Gradients& grads) {
  for (const auto& p : params) {
    const Tensor* g = grads.find(*p);
    if (g && g->shape() != p->value.shape())
      throw DimensionError("Adam: gradient shape " + shape_string(g->shape()) + " != parameter " + p->name + " " +
                           shape_string(p->value.shape()));
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (const auto& p : params) {
    auto [it, fresh] = moments_.try_emplace(p.get());
    if (fresh) it->second = {Tensor(p->value.shape()), Tensor(p->value.shape())};
    const Tensor* g = grads.find(*p);
    Tensor& m = it->second.m;
    Tensor& v = it->second.v;
    auto w = p->value.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g ? (*g)[i] : 0.0;
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= config_.eta * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// COOL

CoolHead::CoolHead(std::size_t in_features, std::size_t classes, std::size_t omega, Rng& rng)
    : classes_(classes), omega_(omega) {
  if (omega_ < 1) throw ParameterError("CoolHead: omega must be >= 1");
  if (classes_ < 1) throw ParameterError("CoolHead: need at least one class");
  auto w = make_parameter("cool.weight", Tensor({in_features, units()}));
  auto b = make_parameter("cool.bias", Tensor({units()}));
  init_glorot_uniform(*w, in_features, units(), rng);
  stack_.emplace<Dense>(w, b);
  stack_.emplace<Softmax>();
}

CoolHead::CoolHead(ParamPtr weight, ParamPtr bias, std::size_t classes, std::size_t omega)
    : classes_(classes), omega_(omega) {
  if (omega_ < 1) throw ParameterError("CoolHead: omega must be >= 1");
  stack_.emplace<Dense>(std::move(weight), std::move(bias));
  if (stack_.out_features() != units()) throw DimensionError("CoolHead: weight width != classes * omega");
  stack_.emplace<Softmax>();
}

CoolOutput CoolHead::forward(const Tensor& features) const {
  return cool_aggregate(stack_.infer(features), classes_, omega_);
}

Tensor CoolHead::unit_targets(std::span<const std::size_t> labels) const {
  return cool_unit_targets(labels, classes_, omega_);
}

Tensor cool_unit_targets(std::span<const std::size_t> labels, std::size_t classes, std::size_t omega) {
  Tensor t({labels.size(), classes * omega});
  const double share = 1.0 / static_cast<double>(omega);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) throw ParameterError("cool targets: label out of range");
    for (std::size_t j = 0; j < omega; ++j) t(i, labels[i] * omega + j) = share;
  }
  return t;
}

CoolOutput cool_aggregate(const Tensor& unit_probs, std::size_t classes, std::size_t omega) {
  if (unit_probs.cols() != classes * omega) throw DimensionError("cool_aggregate: width != classes * omega");
  const std::size_t n = unit_probs.rows();
  const double scale = std::pow(static_cast<double>(omega), static_cast<double>(omega));
  CoolOutput out{Tensor({n, classes}), Tensor({n, classes})};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < classes; ++k) {
      double s = 0.0, prod = scale;
      for (std::size_t j = 0; j < omega; ++j) {
        const double a = unit_probs(r, k * omega + j);
        s += a;
        prod *= a;
      }
      out.class_probs(r, k) = s;
      out.confidence(r, k) = prod;
    }
  return out;
}

}  // namespace daeconf
