// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "daeconf/dae.hpp"
#include "daeconf/nn.hpp"

namespace daeconf {

/// plain: softmax head only, confidence = max posterior.
/// cool:  COOL head, confidence = product score of the winning class.
/// dae:   softmax head plus decoder, confidence = c~(x), outputs scaled by it.
enum class Variant { plain, cool, dae };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct ModelSpec {
  Variant variant = Variant::dae;
  Architecture arch;
  std::size_t classes = 10;
  std::size_t omega = 10;
  double sigma = 0.2;
  ConfidenceParams confidence;
};

struct Prediction {
  Tensor probs;   // y, shape [K]
  Tensor scaled;  // y~, shape [K]
  double confidence = 0.0;
  std::size_t label = 0;
  std::optional<ConfidenceReport> report;  // dae variant only
};

struct TrainingInfo {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  std::vector<double> losses;

  friend bool operator==(const TrainingInfo&, const TrainingInfo&) = default;
};

/// Encoder shared by a softmax (or COOL) head and, for the dae variant, a
/// decoder. The head sits on the encoder's top hidden layer.
class JointModel {
 public:
  JointModel() = default;
  JointModel(Variant variant, DaeModel dae, LayerStack head, std::size_t classes, std::size_t omega,
             ConfidenceParams confidence);

  /// Fresh model. Encoder, decoder and head draw from independent streams of
  /// `seed`, so variants built with the same seed share encoder weights.
  static JointModel build(const ModelSpec& spec, std::uint64_t seed);

  Variant variant() const { return variant_; }
  const DaeModel& dae() const { return dae_; }
  const LayerStack& head() const { return head_; }
  std::size_t classes() const { return classes_; }
  std::size_t omega() const { return omega_; }
  /// Softmax units in the head: classes, or classes * omega for COOL.
  std::size_t units() const;
  std::size_t input_dim() const { return dae_.input_dim(); }

  const ConfidenceParams& confidence_params() const { return confidence_; }
  void set_confidence_params(const ConfidenceParams& p);

  TrainingInfo& training_info() { return info_; }
  const TrainingInfo& training_info() const { return info_; }

  std::vector<ParamPtr> parameters() const;
  /// Deep copy; tied weights stay tied in the copy.
  JointModel clone() const;

  /// Head softmax activations for every row, [N, units()].
  Tensor unit_probs(const Tensor& x) const;
  /// Class posteriors y for every row, [N, classes()].
  Tensor class_probs(const Tensor& x) const;

 private:
  Variant variant_ = Variant::plain;
  DaeModel dae_;
  LayerStack head_;
  std::size_t classes_ = 0;
  std::size_t omega_ = 1;
  ConfidenceParams confidence_;
  TrainingInfo info_;
};

/// Lowest index wins ties.
std::size_t argmax(std::span<const double> v);

Prediction predict(const JointModel& model, const Tensor& x);
std::vector<Prediction> predict_batch(const JointModel& model, const Tensor& x);

/// Loss of one batch: cross_entropy(y(x), labels) + lambda_rec * mse(r(noisy), x)
/// + lambda_l2 * weight_l2. The reconstruction term is skipped when `noisy` is
/// null or the model is not a dae variant. Gradients are accumulated into
/// `grads` when it is non-null.
double joint_loss(const JointModel& model, const Tensor& x, std::span<const std::size_t> labels, const Tensor* noisy,
                  const TrainOptions& options, Gradients* grads);

/// Minimizes cross_entropy(y, label) + lambda_rec * mse(r(corrupt(x)), x) +
/// lambda_l2 * weight_l2 with Adam. The reconstruction term only applies to the
/// dae variant. Returns the per-update loss (also stored in training_info()).
std::vector<double> train_joint(JointModel& model, const Tensor& inputs, std::span<const std::size_t> labels,
                                const TrainOptions& options, std::uint64_t seed);

double accuracy(std::span<const Prediction> predictions, std::span<const std::size_t> labels);

/// Fraction of samples whose argmax equals the label and whose confidence is
/// at least `threshold`.
double thresholded_accuracy(std::span<const Prediction> predictions, std::span<const std::size_t> labels,
                            double threshold);
double thresholded_accuracy(const JointModel& model, const Tensor& inputs, std::span<const std::size_t> labels,
                            double threshold);

}  // namespace daeconf
