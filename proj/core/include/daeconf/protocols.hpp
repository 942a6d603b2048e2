// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "daeconf/classifier.hpp"

namespace daeconf {

struct LabeledData {
  Tensor inputs;  // [N, D]
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  LabeledData subset(std::span<const std::size_t> indices) const;
};

// ---------------------------------------------------------------------------
// 2D rings

struct RingSpec {
  std::vector<std::array<double, 2>> centers = {{-1.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}};
  double inner_radius = 0.6;
  double thickness = 0.1;
  std::size_t samples_per_ring = 1000;

  void validate() const;
};

/// Points uniform in area over each annulus; label = ring index.
LabeledData sample_rings(const RingSpec& spec, Rng& rng);

/// Euclidean distance from (x, y) to the nearest annulus (0 inside one).
double distance_to_rings(const RingSpec& spec, double x, double y);

/// Uniform points in [-extent, extent]^2 at least `min_distance` away from
/// every annulus. Labels are all zero.
LabeledData sample_background(const RingSpec& spec, std::size_t n, double min_distance, double extent, Rng& rng);

// ---------------------------------------------------------------------------
// Open-set recognition

/// 1 - sqrt(training / total).
double openness(std::size_t num_training_classes, std::size_t num_total_classes);

/// Harmonic mean 2pr / (p + r); 0 when both are 0.
double f_measure(double precision, double recall);

struct OpenSetCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// A sample is accepted when its confidence exceeds `threshold` and its
/// argmax is a known class.
///  - TP: known-class sample accepted with the correct label.
///  - FP: accepted unknown-class sample, or known-class sample accepted with a
///        wrong label.
///  - FN: known-class sample that is not a TP.
///  - TN: rejected unknown-class sample.
/// precision = TP / (TP + FP) (0 when nothing is accepted),
/// recall = TP / (TP + FN).
OpenSetCounts open_set_score(std::span<const std::size_t> predicted, std::span<const double> confidence,
                             std::span<const std::size_t> labels, std::span<const std::size_t> known,
                             double threshold);
OpenSetCounts open_set_score(std::span<const Prediction> predictions, std::span<const std::size_t> labels,
                             std::span<const std::size_t> known, double threshold);

struct OpenSetTask {
  std::size_t num_known = 1;
  std::size_t total_classes = 10;
  std::size_t repetitions = 5;
  double threshold = 0.99;
  /// Cap on training samples drawn from the known classes (0 = no cap).
  std::size_t max_train = 2000;
  /// Explicit known-class sets, one per repetition. Drawn at random from the
  /// seed when empty.
  std::vector<std::vector<std::size_t>> known_sets;
  std::size_t workers = 1;

  void validate() const;
};

struct OpenSetRepetition {
  std::size_t repetition = 0;
  std::vector<std::size_t> known;
  OpenSetCounts counts;
};

struct OpenSetResult {
  std::size_t num_known = 0;
  double openness = 0.0;
  std::vector<OpenSetRepetition> repetitions;
  double mean_f = 0.0;
  double std_f = 0.0;
};

/// Known-class subset for repetition `rep`; depends only on (seed, rep), so
/// every variant sees the same subsets.
std::vector<std::size_t> draw_known_classes(std::size_t num_known, std::size_t total, std::uint64_t seed,
                                            std::size_t rep);

/// Trains one model per repetition on known-class samples only (all output
/// units stay allocated; unknown-class targets are always zero) and scores it
/// on the full test set.
OpenSetResult open_set_run(const ModelSpec& spec, const TrainOptions& options, const LabeledData& train,
                           const LabeledData& test, const OpenSetTask& task, std::uint64_t seed);

// ---------------------------------------------------------------------------
// ROC

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1), non-decreasing
  double auc = 0.0;
};

/// Sweeps a threshold over the distinct scores (ties form one step) and
/// integrates with the trapezoid rule.
RocCurve roc_and_auc(std::span<const double> scores, std::span<const bool> is_positive);

double trapezoid_auc(std::span<const RocPoint> points);

/// TPR of `curve` at `fpr`, linear between points; on a vertical run the
/// highest TPR is used.
double tpr_at(const RocCurve& curve, double fpr);

/// Vertical averaging on a uniform FPR grid of `grid_points` points, with
/// (0, 0) prepended.
RocCurve average_roc(std::span<const RocCurve> curves, std::size_t grid_points = 101);

struct OneClassResult {
  std::size_t target_class = 0;
  RocCurve roc;
};

/// Trains on samples of `target_class` only; scores are the model's
/// confidence channel and positives are the target-class test samples.
OneClassResult one_class_run(const ModelSpec& spec, const TrainOptions& options, const LabeledData& train,
                             const LabeledData& test, std::size_t target_class, std::size_t max_train,
                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// 2D confidence fields

struct GridSpec {
  double x_min = -2.5;
  double x_max = 2.5;
  double y_min = -2.5;
  double y_max = 2.5;
  std::size_t nx = 101;
  std::size_t ny = 101;

  void validate() const;
  double x(std::size_t col) const;
  /// Row 0 is the top of the plot (y_max).
  double y(std::size_t row) const;
};

/// Fields over the grid, each [ny, nx].
struct ConfidenceField {
  GridSpec grid;
  Tensor score_no_gate;  // exp(-alpha / D * ||r(x) - x||)
  Tensor gate;           // curvature gate
  Tensor score;          // model confidence
  Tensor label;          // argmax of y
};

ConfidenceField confidence_map(const JointModel& model, const GridSpec& grid);

}  // namespace daeconf
