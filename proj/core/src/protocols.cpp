// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>

#include "parallel.hpp"

namespace daeconf {

LabeledData LabeledData::subset(std::span<const std::size_t> indices) const {
  LabeledData out;
  out.inputs = inputs.gather_rows(indices);
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels.at(i));
  return out;
}


// ---------------------------------------------------------------------------
// Rings

void RingSpec::validate() const {
  if (centers.empty()) throw ParameterError("RingSpec: no centers");
  if (!(inner_radius > 0.0) || !(thickness > 0.0))
    throw ParameterError("RingSpec: inner_radius and thickness must be positive");
}

LabeledData sample_rings(const RingSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t n = spec.centers.size() * spec.samples_per_ring;
  LabeledData d{Tensor({std::max<std::size_t>(n, 1), 2}), {}};
  d.labels.reserve(n);
  const double r1 = spec.inner_radius, r2 = spec.inner_radius + spec.thickness;
  std::size_t row = 0;
  for (std::size_t c = 0; c < spec.centers.size(); ++c)
    for (std::size_t i = 0; i < spec.samples_per_ring; ++i, ++row) {
      const double r = std::sqrt(rng.uniform() * (r2 * r2 - r1 * r1) + r1 * r1);
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      d.inputs(row, 0) = spec.centers[c][0] + r * std::cos(theta);
      d.inputs(row, 1) = spec.centers[c][1] + r * std::sin(theta);
      d.labels.push_back(c);
    }
  return d;
}

double distance_to_rings(const RingSpec& spec, double x, double y) {
  double best = std::numeric_limits<double>::infinity();
  const double r1 = spec.inner_radius, r2 = spec.inner_radius + spec.thickness;
  for (const auto& c : spec.centers) {
    const double d = std::hypot(x - c[0], y - c[1]);
    best = std::min(best, std::max({0.0, r1 - d, d - r2}));
  }
  return best;
}

LabeledData sample_background(const RingSpec& spec, std::size_t n, double min_distance, double extent, Rng& rng) {
  spec.validate();
  if (n == 0) throw ParameterError("sample_background: n must be positive");
  LabeledData d{Tensor({n, 2}), std::vector<std::size_t>(n, 0)};
  for (std::size_t i = 0; i < n;) {
    const double x = rng.uniform(-extent, extent), y = rng.uniform(-extent, extent);
    if (distance_to_rings(spec, x, y) < min_distance) continue;
    d.inputs(i, 0) = x;
    d.inputs(i, 1) = y;
    ++i;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Open set

double openness(std::size_t num_training_classes, std::size_t num_total_classes) {
  if (num_training_classes == 0 || num_total_classes == 0)
    throw ParameterError("openness: class counts must be positive");
  if (num_training_classes > num_total_classes)
    throw ParameterError("openness: more training classes than total classes");
  return 1.0 - std::sqrt(static_cast<double>(num_training_classes) / static_cast<double>(num_total_classes));
}

double f_measure(double precision, double recall) {
  if (precision < 0.0 || precision > 1.0 || recall < 0.0 || recall > 1.0)
    throw ParameterError("f_measure: precision and recall must lie in [0, 1]");
  if (precision + recall == 0.0) return 0.0;
  if (precision == recall) return precision;
  return 2.0 * precision * recall / (precision + recall);
}

OpenSetCounts open_set_score(std::span<const std::size_t> predicted, std::span<const double> confidence,
                             std::span<const std::size_t> labels, std::span<const std::size_t> known,
                             double threshold) {
  if (predicted.size() != labels.size() || confidence.size() != labels.size())
    throw DimensionError("open_set_score: size mismatch");
  if (known.empty()) throw ParameterError("open_set_score: empty known-class set");
  auto is_known = [&](std::size_t c) { return std::find(known.begin(), known.end(), c) != known.end(); };
  OpenSetCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool accepted = confidence[i] > threshold && is_known(predicted[i]);
    const bool known_sample = is_known(labels[i]);
    if (known_sample) {
      if (accepted && predicted[i] == labels[i]) {
        ++c.true_positives;
      } else {
        ++c.false_negatives;
        if (accepted) ++c.false_positives;
      }
    } else if (accepted) {
      ++c.false_positives;
    } else {
      ++c.true_negatives;
    }
  }
  const double tp = static_cast<double>(c.true_positives);
  const std::size_t accepted = c.true_positives + c.false_positives;
  const std::size_t positives = c.true_positives + c.false_negatives;
  c.precision = accepted ? tp / static_cast<double>(accepted) : 0.0;
  c.recall = positives ? tp / static_cast<double>(positives) : 0.0;
  c.f = f_measure(c.precision, c.recall);
  return c;
}

OpenSetCounts open_set_score(std::span<const Prediction> predictions, std::span<const std::size_t> labels,
                             std::span<const std::size_t> known, double threshold) {
  std::vector<std::size_t> predicted;
  std::vector<double> conf;
  for (const auto& p : predictions) {
    predicted.push_back(p.label);
    conf.push_back(p.confidence);
  }
  return open_set_score(predicted, conf, labels, known, threshold);
}

void OpenSetTask::validate() const {
  if (num_known == 0 || num_known > total_classes)
    throw ParameterError("OpenSetTask: num_known must lie in [1, total_classes]");
  if (repetitions == 0) throw ParameterError("OpenSetTask: repetitions must be positive");
  if (!known_sets.empty() && known_sets.size() != repetitions)
    throw ParameterError("OpenSetTask: need one known set per repetition");
  for (const auto& s : known_sets)
    if (s.empty()) throw ParameterError("OpenSetTask: empty known-class set");
}

std::vector<std::size_t> draw_known_classes(std::size_t num_known, std::size_t total, std::uint64_t seed,
                                            std::size_t rep) {
  std::vector<std::size_t> all(total);
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng(derive_seed(derive_seed(seed, 0x6B6E6F776EULL), rep));
  rng.shuffle(all);
  all.resize(num_known);
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

std::vector<std::size_t> training_indices(const LabeledData& train, std::span<const std::size_t> classes,
                                          std::size_t max_train, std::uint64_t seed) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (std::find(classes.begin(), classes.end(), train.labels[i]) != classes.end()) idx.push_back(i);
  if (max_train && idx.size() > max_train) {
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(max_train);
    std::sort(idx.begin(), idx.end());
  }
  if (idx.empty()) throw ParameterError("no training samples for the requested classes");
  return idx;
}

}  // namespace

OpenSetResult open_set_run(const ModelSpec& spec, const TrainOptions& options, const LabeledData& train,
                           const LabeledData& test, const OpenSetTask& task, std::uint64_t seed) {
  task.validate();
  OpenSetResult res;
  res.num_known = task.num_known;
  res.openness = openness(task.num_known, task.total_classes);
  res.repetitions.resize(task.repetitions);
  detail::parallel_for(task.repetitions, task.workers, [&](std::size_t rep) {
    auto known = task.known_sets.empty() ? draw_known_classes(task.num_known, task.total_classes, seed, rep)
                                         : task.known_sets[rep];
    const std::uint64_t rep_seed = derive_seed(seed, 1000 + rep);
    auto idx = training_indices(train, known, task.max_train, derive_seed(rep_seed, 7));
    LabeledData sub = train.subset(idx);
    JointModel model = JointModel::build(spec, derive_seed(rep_seed, 1));
    train_joint(model, sub.inputs, sub.labels, options, derive_seed(rep_seed, 2));
    auto preds = predict_batch(model, test.inputs);
    res.repetitions[rep] = {rep, known, open_set_score(preds, test.labels, known, task.threshold)};
  });
  double s = 0.0, s2 = 0.0;
  for (const auto& r : res.repetitions) s += r.counts.f;
  const double n = static_cast<double>(res.repetitions.size());
  res.mean_f = s / n;
  for (const auto& r : res.repetitions) s2 += (r.counts.f - res.mean_f) * (r.counts.f - res.mean_f);
  res.std_f = std::sqrt(s2 / n);
  return res;
}

// ---------------------------------------------------------------------------
// ROC

double trapezoid_auc(std::span<const RocPoint> points) {
  double a = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    a += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
  return a;
}

RocCurve roc_and_auc(std::span<const double> scores, std::span<const bool> is_positive) {
  if (scores.size() != is_positive.size()) throw DimensionError("roc_and_auc: size mismatch");
  const auto P = static_cast<std::size_t>(std::count(is_positive.begin(), is_positive.end(), true));
  const std::size_t N = scores.size() - P;
  if (P == 0 || N == 0) throw ParameterError("roc_and_auc: need at least one positive and one negative");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RocCurve c;
  c.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  // Twice the area in units of 1/(P*N); integer so the result is one rounding.
  unsigned long long area2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::size_t tp0 = tp, fp0 = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i) (is_positive[order[i]] ? tp : fp)++;
    area2 += static_cast<unsigned long long>(fp - fp0) * (tp0 + tp);
    c.points.push_back({static_cast<double>(fp) / static_cast<double>(N), static_cast<double>(tp) / static_cast<double>(P)});
  }
  c.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(P) * static_cast<double>(N));
  return c;
}

double tpr_at(const RocCurve& curve, double fpr) {
  const auto& p = curve.points;
  if (p.empty()) throw ParameterError("tpr_at: empty curve");
  double best = -1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].fpr == fpr) best = std::max(best, p[i].tpr);
    if (i + 1 < p.size() && p[i].fpr < fpr && fpr < p[i + 1].fpr) {
      const double t = (fpr - p[i].fpr) / (p[i + 1].fpr - p[i].fpr);
      return p[i].tpr + t * (p[i + 1].tpr - p[i].tpr);
    }
  }
  if (best >= 0.0) return best;
  return fpr < p.front().fpr ? p.front().tpr : p.back().tpr;
}

RocCurve average_roc(std::span<const RocCurve> curves, std::size_t grid_points) {
  if (curves.empty()) throw ParameterError("average_roc: no curves");
  if (grid_points < 2) throw ParameterError("average_roc: need at least two grid points");
  RocCurve avg;
  avg.points.push_back({0.0, 0.0});
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double f = static_cast<double>(g) / static_cast<double>(grid_points - 1);
    double t = 0.0;
    for (const auto& c : curves) t += tpr_at(c, f);
    avg.points.push_back({f, t / static_cast<double>(curves.size())});
  }
  avg.auc = trapezoid_auc(avg.points);
  return avg;
}

OneClassResult one_class_run(const ModelSpec& spec, const TrainOptions& options, const LabeledData& train,
                             const LabeledData& test, std::size_t target_class, std::size_t max_train,
                             std::uint64_t seed) {
  if (target_class >= spec.classes) throw ParameterError("one_class_run: target class out of range");
  const std::size_t cls[] = {target_class};
  auto idx = training_indices(train, cls, max_train, derive_seed(seed, 7));
  LabeledData sub = train.subset(idx);
  JointModel model = JointModel::build(spec, derive_seed(seed, 1));
  train_joint(model, sub.inputs, sub.labels, options, derive_seed(seed, 2));
  auto preds = predict_batch(model, test.inputs);
  std::vector<double> scores;
  auto positive = std::make_unique<bool[]>(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    scores.push_back(preds[i].confidence);
    positive[i] = test.labels[i] == target_class;
  }
  return {target_class, roc_and_auc(scores, std::span<const bool>(positive.get(), preds.size()))};
}

// ---------------------------------------------------------------------------
// Confidence fields

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) throw ParameterError("GridSpec: need at least 2x2 points");
  if (!(x_max > x_min) || !(y_max > y_min)) throw ParameterError("GridSpec: empty extent");
}

double GridSpec::x(std::size_t col) const {
  return x_min + (x_max - x_min) * static_cast<double>(col) / static_cast<double>(nx - 1);
}

double GridSpec::y(std::size_t row) const {
  return y_max - (y_max - y_min) * static_cast<double>(row) / static_cast<double>(ny - 1);
}

ConfidenceField confidence_map(const JointModel& model, const GridSpec& grid) {
  grid.validate();
  if (model.input_dim() != 2) throw ParameterError("confidence_map: model input must be 2-dimensional");
  Tensor pts({grid.nx * grid.ny, 2});
  for (std::size_t r = 0; r < grid.ny; ++r)
    for (std::size_t c = 0; c < grid.nx; ++c) {
      pts(r * grid.nx + c, 0) = grid.x(c);
      pts(r * grid.nx + c, 1) = grid.y(r);
    }
  auto preds = predict_batch(model, pts);
  ConfidenceField f{grid, Tensor({grid.ny, grid.nx}), Tensor({grid.ny, grid.nx}), Tensor({grid.ny, grid.nx}),
                    Tensor({grid.ny, grid.nx})};
  const auto& params = model.confidence_params();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    f.label[i] = static_cast<double>(p.label);
    f.score[i] = p.confidence;
    if (p.report) {
      f.gate[i] = p.report->gate;
      f.score_no_gate[i] = confidence_score(p.report->recon_error, 1.0, params.alpha, model.input_dim());
    } else {
      f.gate[i] = 1.0;
      f.score_no_gate[i] = p.confidence;
    }
  }
  return f;
}

}  // namespace daeconf
