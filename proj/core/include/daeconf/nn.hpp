// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "daeconf/tensor.hpp"

namespace daeconf {

enum class LayerKind { dense, conv2d, maxpool2x2, relu, sigmoid, softmax };
enum class Mode { train, eval };

std::string to_string(LayerKind kind);

/// A trainable tensor. Layers hold parameters through shared pointers so that
/// a tied decoder can reuse the encoder's weights.
struct Parameter {
  std::string name;
  Tensor value;
};
using ParamPtr = std::shared_ptr<Parameter>;

ParamPtr make_parameter(std::string name, Tensor value);

/// Deep-copies parameters while preserving sharing: the same source
/// parameter always maps to the same copy.
class ParamMap {
 public:
  ParamPtr operator()(const ParamPtr& p);

 private:
  std::unordered_map<const Parameter*, ParamPtr> map_;
};

/// Gradient buffers keyed by parameter identity, zero-initialized on first use.
class Gradients {
 public:
  Tensor& operator[](const Parameter& p);
  const Tensor* find(const Parameter& p) const;
  void clear() { grads_.clear(); }
  bool empty() const { return grads_.empty(); }

 private:
  std::unordered_map<const Parameter*, Tensor> grads_;
};

/// Activations a layer keeps from a training-mode forward pass.
struct LayerCache {
  Tensor input;
  Tensor output;
  std::vector<std::size_t> argmax;  // maxpool only
};

/// Channel/height/width view of a flat feature axis.
struct ImageGeometry {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t size() const { return channels * height * width; }
  friend bool operator==(const ImageGeometry&, const ImageGeometry&) = default;
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  /// Feature widths; 0 means the layer accepts any width (elementwise layers).
  virtual std::size_t in_features() const { return 0; }
  virtual std::size_t out_features() const { return 0; }

  /// x is [batch, in_features]. When `cache` is non-null the layer records
  /// what its backward pass needs.
  virtual Tensor forward(const Tensor& x, LayerCache* cache) const = 0;

  /// Returns dL/dx and, when `grads` is non-null, accumulates parameter
  /// gradients into it.
  virtual Tensor backward(const Tensor& grad_out, const LayerCache& cache, Gradients* grads) const = 0;

  /// Forward-mode derivative at the single sample stored in `cache`: every
  /// row of `tangent` is pushed through the layer's Jacobian.
  virtual Tensor jvp(const Tensor& tangent, const LayerCache& cache) const = 0;

  virtual std::vector<ParamPtr> parameters() const { return {}; }

  virtual std::unique_ptr<Layer> clone(ParamMap& params) const = 0;
};

/// y = x W + b. With `transposed` the layer computes y = x W^T + b, which is
/// how a symmetric decoder reuses an encoder weight of shape [in, out].
class Dense final : public Layer {
 public:
  Dense(ParamPtr weight, ParamPtr bias, bool transposed = false);

  LayerKind kind() const override { return LayerKind::dense; }
  std::size_t in_features() const override;
  std::size_t out_features() const override;
  Tensor forward(const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache, Gradients* grads) const override;
  Tensor jvp(const Tensor& tangent, const LayerCache& cache) const override;
  std::vector<ParamPtr> parameters() const override;
  std::unique_ptr<Layer> clone(ParamMap& params) const override;

  const ParamPtr& weight() const { return weight_; }
  const ParamPtr& bias() const { return bias_; }
  bool transposed() const { return transposed_; }
  /// Effective weight entry mapping input i to output j.
  double w(std::size_t i, std::size_t j) const;

 private:
  ParamPtr weight_;
  ParamPtr bias_;
  bool transposed_;
};

/// Direct 'valid' cross-correlation, stride 1. Weight [out_ch, in_ch, k, k].
class Conv2d final : public Layer {
 public:
  Conv2d(ParamPtr weight, ParamPtr bias, ImageGeometry input);

  LayerKind kind() const override { return LayerKind::conv2d; }
  std::size_t in_features() const override { return in_.size(); }
  std::size_t out_features() const override { return out_.size(); }
  Tensor forward(const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache, Gradients* grads) const override;
  Tensor jvp(const Tensor& tangent, const LayerCache& cache) const override;
  std::vector<ParamPtr> parameters() const override { return {weight_, bias_}; }
  std::unique_ptr<Layer> clone(ParamMap& params) const override;

  const ParamPtr& weight() const { return weight_; }
  const ParamPtr& bias() const { return bias_; }
  ImageGeometry input_geometry() const { return in_; }
  ImageGeometry output_geometry() const { return out_; }

 private:
  Tensor correlate(const Tensor& x, bool with_bias) const;

  ParamPtr weight_;
  ParamPtr bias_;
  ImageGeometry in_;
  ImageGeometry out_;
  std::size_t k_;
};

/// 2x2 max pooling with stride 2. Ties go to the lowest flat index.
class MaxPool2x2 final : public Layer {
 public:
  explicit MaxPool2x2(ImageGeometry input);

  LayerKind kind() const override { return LayerKind::maxpool2x2; }
  std::size_t in_features() const override { return in_.size(); }
  std::size_t out_features() const override { return out_.size(); }
  Tensor forward(const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache, Gradients* grads) const override;
  Tensor jvp(const Tensor& tangent, const LayerCache& cache) const override;
  std::unique_ptr<Layer> clone(ParamMap&) const override { return std::make_unique<MaxPool2x2>(in_); }

  ImageGeometry input_geometry() const { return in_; }
  ImageGeometry output_geometry() const { return out_; }

 private:
  ImageGeometry in_;
  ImageGeometry out_;
};

class Relu final : public Layer {
 public:
  std::unique_ptr<Layer> clone(ParamMap&) const override { return std::make_unique<Relu>(); }
  LayerKind kind() const override { return LayerKind::relu; }
  Tensor forward(const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache, Gradients* grads) const override;
  Tensor jvp(const Tensor& tangent, const LayerCache& cache) const override;
};

class Sigmoid final : public Layer {
 public:
  std::unique_ptr<Layer> clone(ParamMap&) const override { return std::make_unique<Sigmoid>(); }
  LayerKind kind() const override { return LayerKind::sigmoid; }
  Tensor forward(const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache, Gradients* grads) const override;
  Tensor jvp(const Tensor& tangent, const LayerCache& cache) const override;
};

/// Row-wise softmax.
class Softmax final : public Layer {
 public:
  std::unique_ptr<Layer> clone(ParamMap&) const override { return std::make_unique<Softmax>(); }
  LayerKind kind() const override { return LayerKind::softmax; }
  Tensor forward(const Tensor& x, LayerCache* cache) const override;
  Tensor backward(const Tensor& grad_out, const LayerCache& cache, Gradients* grads) const override;
  Tensor jvp(const Tensor& tangent, const LayerCache& cache) const override;
};

Tensor softmax_rows(const Tensor& logits);
double sigmoid(double x);

/// Per-layer caches of one training-mode forward pass.
struct Tape {
  std::vector<LayerCache> caches;
  bool recorded() const { return !caches.empty(); }
};

/// Ordered sequence of layers.
class LayerStack {
 public:
  LayerStack() = default;
  LayerStack(LayerStack&&) = default;
  LayerStack& operator=(LayerStack&&) = default;

  void add(std::unique_ptr<Layer> layer);
  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    add(std::move(layer));
    return ref;
  }

  std::size_t size() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }
  std::size_t in_features() const;
  std::size_t out_features() const;

  /// Eval mode: no caching, safe to call concurrently.
  Tensor infer(const Tensor& x) const;
  /// Train mode requires a tape, which receives the per-layer caches.
  Tensor forward(const Tensor& x, Mode mode, Tape* tape = nullptr) const;
  /// Reverse pass over a recorded tape; returns the gradient w.r.t. the input.
  Tensor backward(const Tape& tape, const Tensor& grad_out, Gradients* grads) const;
  /// Forward-mode pass for a tape recorded on a single sample.
  Tensor jvp(const Tape& tape, Tensor tangent) const;

  /// Distinct parameters in layer order.
  std::vector<ParamPtr> parameters() const;

  LayerStack clone(ParamMap& params) const;

 private:
  void check_input(const Tensor& x) const;

  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void init_glorot_uniform(Parameter& p, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// ---------------------------------------------------------------------------
// Losses

/// Smallest probability fed to log().
inline constexpr double kProbFloor = 1e-12;

Tensor one_hot(std::span<const std::size_t> labels, std::size_t classes);
/// -sum(target * log(prob)), averaged over the batch.
double cross_entropy(const Tensor& probs, const Tensor& targets);
double cross_entropy(const Tensor& probs, std::span<const std::size_t> labels);
/// d cross_entropy / d probs.
Tensor cross_entropy_grad(const Tensor& probs, const Tensor& targets);

/// Mean over all elements of (pred - target)^2.
double mse(const Tensor& pred, const Tensor& target);
Tensor mse_grad(const Tensor& pred, const Tensor& target);

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double eta = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are created lazily, zeroed, per
/// parameter.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  void step(std::span<const ParamPtr> params, const Gradients& grads);
  std::size_t t() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  struct Moments {
    Tensor m;
    Tensor v;
  };
  AdamConfig config_;
  std::size_t t_ = 0;
  std::unordered_map<const Parameter*, Moments> moments_;
};

// ---------------------------------------------------------------------------
// COOL

struct CoolOutput {
  Tensor class_probs;  // [N, K], summed member activations
  Tensor confidence;   // [N, K], omega^omega * product of member activations
};

/// Competitive overcomplete output layer: `omega` units per class under one
/// joint softmax. Unit u belongs to class u / omega.
class CoolHead {
 public:
  CoolHead(std::size_t in_features, std::size_t classes, std::size_t omega, Rng& rng);
  CoolHead(ParamPtr weight, ParamPtr bias, std::size_t classes, std::size_t omega);

  std::size_t classes() const { return classes_; }
  std::size_t omega() const { return omega_; }
  std::size_t units() const { return classes_ * omega_; }
  const LayerStack& stack() const { return stack_; }

  CoolOutput forward(const Tensor& features) const;
  /// Training targets: 1/omega on every member unit of the labelled class.
  Tensor unit_targets(std::span<const std::size_t> labels) const;

 private:
  std::size_t classes_;
  std::size_t omega_;
  LayerStack stack_;
};

/// 1/omega on every member unit of the labelled class, zero elsewhere.
Tensor cool_unit_targets(std::span<const std::size_t> labels, std::size_t classes, std::size_t omega);

CoolOutput cool_aggregate(const Tensor& unit_probs, std::size_t classes, std::size_t omega);

}  // namespace daeconf
