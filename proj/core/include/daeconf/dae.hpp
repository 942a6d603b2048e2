// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <string>
#include <vector>

#include "daeconf/nn.hpp"
#include "daeconf/tensor.hpp"

namespace daeconf {

enum class DecoderMode { symmetric, asymmetric };
enum class OutputActivation { linear, sigmoid };

/// How the diagonal of dr/dx is obtained.
///  - reverse: one reverse-mode pass per output coordinate (exact).
///  - forward: tangent propagation that only materializes the needed diagonal
///    of the last dense layer (exact, O(D * hidden) for one-hidden-layer AEs).
///  - finite_diff: central differences with step `fd_step`.
enum class JacobianMethod { reverse, forward, finite_diff };

std::string to_string(DecoderMode m);
std::string to_string(OutputActivation a);
std::string to_string(JacobianMethod m);
DecoderMode parse_decoder_mode(const std::string& s);
OutputActivation parse_output_activation(const std::string& s);
JacobianMethod parse_jacobian_method(const std::string& s);

/// Layer-level description of an autoencoder.
///
/// Dense encoders are `input -> hidden[0] -> ... -> hidden.back()` with ReLU
/// after every layer. The convolutional encoder prepends
/// Conv(1->32,5x5) ReLU MaxPool Conv(32->64,5x5) ReLU MaxPool to the dense
/// layers and requires a 28x28 single-channel input.
struct Architecture {
  std::size_t input_dim = 784;
  std::vector<std::size_t> hidden = {400};
  bool convolutional = false;
  DecoderMode decoder = DecoderMode::symmetric;
  OutputActivation output = OutputActivation::sigmoid;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct ConfidenceParams {
  double alpha = 40.0;  // outlier sensitivity
  double beta = 5.0;    // curvature sensitivity
  JacobianMethod jacobian = JacobianMethod::forward;
  double fd_step = 1e-4;
  bool use_gate = true;

  void validate() const;
  friend bool operator==(const ConfidenceParams&, const ConfidenceParams&) = default;
};

struct ConfidenceReport {
  double recon_error = 0.0;
  double gamma = 0.0;
  double gate = 1.0;
  double score = 1.0;  // exp(-alpha / D * recon_error) * gate
};

/// Encoder/decoder pair. r(x) = decoder(encoder(x)).
class DaeModel {
 public:
  DaeModel() = default;
  /// Wraps explicit stacks. Either stack may be empty (an empty pair is the
  /// identity map).
  DaeModel(LayerStack encoder, LayerStack decoder, double sigma, std::size_t input_dim);

  /// Builds encoder and decoder from a descriptor with Glorot-uniform weights
  /// and zero biases. `encoder_rng` and `decoder_rng` are separate so that a
  /// model without decoder draws the same encoder.
  static DaeModel build(const Architecture& arch, double sigma, Rng& encoder_rng, Rng& decoder_rng);
  /// Same as build() but leaves the decoder empty.
  static DaeModel build_encoder_only(const Architecture& arch, Rng& encoder_rng);

  const LayerStack& encoder() const { return encoder_; }
  const LayerStack& decoder() const { return decoder_; }
  bool has_decoder() const { return !decoder_.empty(); }
  double sigma() const { return sigma_; }
  void set_sigma(double sigma);
  std::size_t input_dim() const { return input_dim_; }
  /// Width of the top hidden layer (the encoder output).
  std::size_t code_dim() const;

  std::vector<ParamPtr> parameters() const;
  DaeModel clone(ParamMap& params) const;

 private:
  LayerStack encoder_;
  LayerStack decoder_;
  double sigma_ = 0.0;
  std::size_t input_dim_ = 0;
};

/// x + N(0, sigma^2) elementwise, no clipping.
Tensor corrupt(const Tensor& x, double sigma, Rng& rng);

/// r(x) for every row of x.
Tensor reconstruct(const DaeModel& model, const Tensor& x);

/// ||r(x) - x||_2 of a single sample ([1, D] or [D]).
double recon_error(const DaeModel& model, const Tensor& x);
/// Per-row reconstruction errors.
std::vector<double> recon_errors(const DaeModel& model, const Tensor& x);

/// dr_i/dx_i for i = 1..D at a single sample.
Tensor jacobian_diag(const DaeModel& model, const Tensor& x, const ConfidenceParams& params);

/// (1/D) * sum_i (dr_i/dx_i - 1).
double gamma(const DaeModel& model, const Tensor& x, const ConfidenceParams& params);

/// 1 for gamma <= 0, exp(-beta * gamma) otherwise.
double gate(double gamma_value, double beta);

/// exp(-alpha / D * recon_error) * gate. Throws ParameterError on D == 0.
double confidence_score(double recon_error, double gate_value, double alpha, std::size_t dim);

ConfidenceReport confidence(const DaeModel& model, const Tensor& x, const ConfidenceParams& params);
std::vector<ConfidenceReport> confidence_batch(const DaeModel& model, const Tensor& x,
                                               const ConfidenceParams& params);

struct TrainOptions {
  std::size_t epochs = 1;
  std::size_t batch_size = 64;
  /// When non-zero, training stops after this many updates regardless of
  /// `epochs`.
  std::size_t max_steps = 0;
  double lambda_rec = 1.0;
  double lambda_l2 = 0.0;
  AdamConfig adam;
};

/// Sum of squared entries of all rank >= 2 parameters (biases excluded).
double weight_l2(std::span<const ParamPtr> params);
/// Adds the gradient of lambda * weight_l2 to `grads`; returns the penalty.
double apply_weight_decay(std::span<const ParamPtr> params, double lambda, Gradients& grads);

/// Trains the autoencoder to map corrupt(x) back to x (mean squared error,
/// plus lambda_l2 * weight_l2). Returns the per-update loss.
std::vector<double> train_dae(DaeModel& model, const Tensor& data, const TrainOptions& options, Rng& rng,
                              Adam& optimizer);

}  // namespace daeconf
