// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "daeconf/classifier.hpp"

namespace daeconf {

/// Which output the generator's cross-entropy is computed on.
enum class FoolingTarget { unscaled_y, scaled_y };

std::string to_string(FoolingTarget t);
FoolingTarget parse_fooling_target(const std::string& s);

struct FoolingConfig {
  std::size_t trials_per_class = 20;
  std::size_t max_updates = 10000;
  double threshold = 0.90;
  double eta = 1e-5;
  FoolingTarget target = FoolingTarget::unscaled_y;
  std::size_t workers = 1;

  void validate() const;
};

/// Fooling generator network: one dense D -> D layer with sigmoid output,
/// driven by a fixed random input z ~ U(0, 1)^D.
class Fgn {
 public:
  Fgn(std::size_t dim, Rng& rng);

  std::size_t dim() const { return z_.size(); }
  const Tensor& input() const { return z_; }
  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }
  /// [1, D] image, every entry strictly inside (0, 1).
  Tensor generate() const;
  /// Plain SGD step given dL/d(image) at the current parameters.
  void sgd_step(const Tensor& image, const Tensor& grad_image, double eta);

 private:
  Tensor z_;       // [1, D]
  Tensor weight_;  // [D, D]
  Tensor bias_;    // [D]
};

struct FoolingAttempt {
  std::size_t target_class = 0;
  bool success = false;
  /// Index of the evaluation that crossed the threshold (1 = before any
  /// update), or max_updates on failure.
  std::size_t steps = 0;
  double final_output = 0.0;
  Tensor sample;
};

/// Attacks one class of a frozen model. Success is judged on the model's
/// scaled output y~_k (y for plain, COOL class confidence, c~ * y for dae),
/// whatever signal drives the gradient.
FoolingAttempt fooling_attempt(const JointModel& target, std::size_t class_k, const FoolingConfig& config,
                               Rng& rng);

struct FoolingReport {
  std::size_t classes = 0;
  std::size_t trials_per_class = 0;
  std::vector<std::size_t> successes_per_class;
  std::size_t successes = 0;
  double rate = 0.0;
  /// Mean steps over successful attempts; empty when nothing succeeded.
  std::optional<double> mean_steps;
  std::vector<FoolingAttempt> attempts;
};

FoolingReport summarize_fooling(std::vector<FoolingAttempt> attempts, std::size_t classes,
                                std::size_t trials_per_class);

/// trials_per_class attempts for every class. Attempt j uses the stream
/// derive_seed(seed, j), so the report does not depend on config.workers.
FoolingReport fooling_campaign(const JointModel& target, const FoolingConfig& config, std::uint64_t seed);

/// Value of the output that decides fooling success for class k.
double scaled_output(const JointModel& model, const Tensor& x, std::size_t class_k);

}  // namespace daeconf
