// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <gtest/gtest.h>

#include <cmath>

#include "daeconf/classifier.hpp"
#include "daeconf/gradcheck.hpp"
#include "daeconf/idx.hpp"
#include "helpers.hpp"

using daeconf::Dense;
using daeconf::JointModel;
using daeconf::LayerStack;
using daeconf::ModelSpec;
using daeconf::Prediction;
using daeconf::Rng;
using daeconf::Tensor;
using daeconf::Variant;

namespace {

LayerStack linear_stack(const Tensor& w, const Tensor& b, const std::string& name) {
  LayerStack s;
  s.emplace<Dense>(daeconf::make_parameter(name + ".w", w), daeconf::make_parameter(name + ".b", b));
  return s;
}

LayerStack softmax_head(const Tensor& bias) {
  LayerStack s = linear_stack(Tensor({2, bias.size()}), bias, "head");
  s.emplace<daeconf::Softmax>();
  return s;
}

// 2D model whose encoder is the identity and whose decoder adds `shift`, so
// recon_error = ||shift|| and gamma = 0.
JointModel shifted_dae(const Tensor& shift, const Tensor& head_bias, double alpha) {
  daeconf::DaeModel dae(linear_stack(Tensor::identity(2), Tensor({2}), "enc"),
                        linear_stack(Tensor::identity(2), shift, "dec"), 0.1, 2);
  daeconf::ConfidenceParams p;
  p.alpha = alpha;
  return JointModel(Variant::dae, std::move(dae), softmax_head(head_bias), head_bias.size(), 1, p);
}

ModelSpec small_spec(Variant v) {
  ModelSpec s;
  s.variant = v;
  s.arch = {6, {8}, false, daeconf::DecoderMode::symmetric, daeconf::OutputActivation::sigmoid};
  s.classes = 3;
  s.omega = 2;
  s.sigma = 0.2;
  return s;
}

Prediction fake(std::size_t label, double confidence) {
  Prediction p;
  p.label = label;
  p.confidence = confidence;
  return p;
}

}  // namespace

TEST(Predict, UnitConfidenceLeavesOutputsUnscaled) {
  JointModel m = shifted_dae(Tensor({2}), Tensor::vector({0.3, -0.2}), 40.0);
  auto p = daeconf::predict(m, Tensor::vector({0.1, 0.9}));
  EXPECT_EQ(p.confidence, 1.0);
  EXPECT_EQ(p.scaled, p.probs);
}

TEST(Predict, HalfConfidenceHalvesOutputs) {
  const double alpha = 4.0;
  // exp(-alpha / 2 * e) = 0.5
  const double e = 2.0 * std::log(2.0) / alpha;
  JointModel m = shifted_dae(Tensor::vector({e, 0.0}), Tensor::vector({std::log(4.0), 0.0}), alpha);
  auto p = daeconf::predict(m, Tensor::vector({0.2, 0.4}));
  EXPECT_NEAR(p.probs[0], 0.8, 1e-12);
  EXPECT_NEAR(p.probs[1], 0.2, 1e-12);
  EXPECT_NEAR(p.confidence, 0.5, 1e-12);
  EXPECT_NEAR(p.scaled[0], 0.4, 1e-12);
  EXPECT_NEAR(p.scaled[1], 0.1, 1e-12);
  ASSERT_TRUE(p.report.has_value());
  EXPECT_EQ(p.report->gate, 1.0);
}

TEST(Predict, PlainConfidenceIsMaxPosterior) {
  JointModel m(Variant::plain, daeconf::DaeModel(linear_stack(Tensor::identity(2), Tensor({2}), "enc"), {}, 0.0, 2),
               softmax_head(Tensor::vector({std::log(7.0 / 3.0), 0.0})), 2, 1, {});
  auto p = daeconf::predict(m, Tensor::vector({5.0, -5.0}));
  EXPECT_NEAR(p.probs[0], 0.7, 1e-12);
  EXPECT_NEAR(p.confidence, 0.7, 1e-12);
  EXPECT_EQ(p.label, 0u);
  EXPECT_FALSE(p.report.has_value());
}

TEST(Predict, WidthMismatchIsADimensionError) {
  JointModel m = JointModel::build(small_spec(Variant::plain), 1);
  EXPECT_THROW(daeconf::predict(m, Tensor({5})), daeconf::DimensionError);
  EXPECT_THROW(daeconf::predict_batch(m, Tensor({2, 7})), daeconf::DimensionError);
}

TEST(PredictProperty, ScalingPreservesArgmax) {
  Rng rng(3);
  for (std::uint64_t s = 0; s < 10; ++s) {
    ModelSpec spec = small_spec(Variant::dae);
    spec.confidence.alpha = rng.uniform(1.0, 60.0);
    JointModel m = JointModel::build(spec, s);
    for (const auto& p : daeconf::predict_batch(m, daeconf::uniform(rng, {20, 6}, 0.0, 1.0))) {
      EXPECT_EQ(daeconf::argmax(p.scaled.data()), daeconf::argmax(p.probs.data()));
      EXPECT_EQ(p.label, daeconf::argmax(p.probs.data()));
    }
  }
}

TEST(Predict, CoolConfidenceIsTheWinningProductScore) {
  JointModel m = JointModel::build(small_spec(Variant::cool), 4);
  Rng rng(4);
  Tensor x = daeconf::uniform(rng, {5, 6}, 0.0, 1.0);
  auto out = daeconf::cool_aggregate(m.unit_probs(x), 3, 2);
  auto preds = daeconf::predict_batch(m, x);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(preds[i].label, daeconf::argmax(out.class_probs.row(i).data()));
    EXPECT_EQ(preds[i].confidence, out.confidence(i, preds[i].label));
  }
}

TEST(Argmax, LowestIndexWinsTies) {
  const double v[] = {0.2, 0.4, 0.4};
  EXPECT_EQ(daeconf::argmax(v), 1u);
}

TEST(TrainJoint, LabelOutOfRangeIsAParameterError) {
  JointModel m = JointModel::build(small_spec(Variant::plain), 5);
  const std::size_t labels[] = {0, 3};
  EXPECT_THROW(daeconf::train_joint(m, Tensor({2, 6}, 0.5), labels, {}, 5), daeconf::ParameterError);
}

TEST(TrainJoint, ZeroReconstructionWeightMatchesPlain) {
  Rng rng(6);
  Tensor x = daeconf::uniform(rng, {50, 6}, 0.0, 1.0);
  std::vector<std::size_t> labels(50);
  for (auto& l : labels) l = rng.index(3);
  daeconf::TrainOptions opt;
  opt.epochs = 3;
  opt.batch_size = 16;
  opt.lambda_rec = 0.0;
  for (auto mode : {daeconf::DecoderMode::symmetric, daeconf::DecoderMode::asymmetric}) {
    ModelSpec dae_spec = small_spec(Variant::dae), plain_spec = small_spec(Variant::plain);
    dae_spec.arch.decoder = plain_spec.arch.decoder = mode;
    JointModel dae = JointModel::build(dae_spec, 7), plain = JointModel::build(plain_spec, 7);
    EXPECT_EQ(daeconf::train_joint(dae, x, labels, opt, 8), daeconf::train_joint(plain, x, labels, opt, 8));
  }
}

TEST(TrainJoint, SameSeedSameParameters) {
  Rng rng(9);
  Tensor x = daeconf::uniform(rng, {40, 6}, 0.0, 1.0);
  std::vector<std::size_t> labels(40);
  for (auto& l : labels) l = rng.index(3);
  daeconf::TrainOptions opt;
  opt.epochs = 2;
  opt.batch_size = 8;
  for (auto v : {Variant::plain, Variant::cool, Variant::dae}) {
    JointModel a = JointModel::build(small_spec(v), 10), b = JointModel::build(small_spec(v), 10);
    daeconf::train_joint(a, x, labels, opt, 11);
    daeconf::train_joint(b, x, labels, opt, 11);
    auto pa = a.parameters(), pb = b.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
    EXPECT_EQ(a.training_info(), b.training_info());
  }
}

TEST(TrainJoint, StepCapStopsEarly) {
  JointModel m = JointModel::build(small_spec(Variant::plain), 12);
  Rng rng(12);
  std::vector<std::size_t> labels(100, 1);
  daeconf::TrainOptions opt;
  opt.epochs = 1000000;
  opt.max_steps = 7;
  opt.batch_size = 10;
  EXPECT_EQ(daeconf::train_joint(m, daeconf::uniform(rng, {100, 6}, 0.0, 1.0), labels, opt, 12).size(), 7u);
  EXPECT_EQ(m.training_info().epochs, 1u);
}

TEST(JointLoss, GradientsMatchFiniteDifferences) {
  for (const auto& row : daeconf::run_gradchecks(13)) {
    EXPECT_TRUE(row.passed) << row.name << " " << row.max_rel_error;
    EXPECT_GE(row.instances, 10u);
  }
}

TEST(ThresholdedAccuracy, Cases) {
  std::vector<Prediction> preds{fake(0, 0.95), fake(1, 0.99), fake(2, 0.91), fake(1, 0.5)};
  const std::vector<std::size_t> labels{0, 1, 2, 1};
  EXPECT_EQ(daeconf::thresholded_accuracy(preds, labels, 0.9), 0.75);
  EXPECT_EQ(daeconf::thresholded_accuracy(preds, labels, 0.0), 1.0);
  EXPECT_EQ(daeconf::thresholded_accuracy(preds, labels, 1.0), 0.0);
  preds[0].confidence = 1.0;
  EXPECT_EQ(daeconf::thresholded_accuracy(preds, labels, 1.0), 0.25);
  EXPECT_THROW(daeconf::thresholded_accuracy(preds, labels, 1.5), daeconf::ParameterError);
}

TEST(ThresholdedAccuracyProperty, NonIncreasingAndZeroIsAccuracy) {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Prediction> preds;
    std::vector<std::size_t> labels;
    for (int i = 0; i < 30; ++i) {
      preds.push_back(fake(rng.index(4), rng.uniform()));
      labels.push_back(rng.index(4));
    }
    EXPECT_EQ(daeconf::thresholded_accuracy(preds, labels, 0.0), daeconf::accuracy(preds, labels));
    double last = 1.0;
    for (double t : {0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0}) {
      const double a = daeconf::thresholded_accuracy(preds, labels, t);
      EXPECT_LE(a, last);
      last = a;
    }
  }
}

TEST(TrainJoint, DeskDigitsReachHighTrainAccuracy) {
  auto split = daeconf::load_mnist_dir(DAECONF_TEST_DATA "/digits");
  ModelSpec spec;
  spec.variant = Variant::plain;
  spec.arch = {784, {400}, false, daeconf::DecoderMode::symmetric, daeconf::OutputActivation::sigmoid};
  JointModel m = JointModel::build(spec, 15);
  daeconf::TrainOptions opt;
  opt.epochs = 20;
  daeconf::train_joint(m, split.train.inputs, split.train.labels, opt, 16);
  auto preds = daeconf::predict_batch(m, split.train.inputs);
  EXPECT_GE(daeconf::accuracy(preds, split.train.labels), 0.97);
}
