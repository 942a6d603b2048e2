// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/classifier.hpp"

#include <algorithm>
#include <numeric>

namespace daeconf {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::plain: return "plain";
    case Variant::cool: return "cool";
    case Variant::dae: return "dae";
  }
  return "unknown";
}

Variant parse_variant(const std::string& s) {
  if (s == "plain") return Variant::plain;
  if (s == "cool") return Variant::cool;
  if (s == "dae") return Variant::dae;
  throw ParameterError("unknown variant '" + s + "' (expected plain|cool|dae)");
}

JointModel::JointModel(Variant variant, DaeModel dae, LayerStack head, std::size_t classes, std::size_t omega,
                       ConfidenceParams confidence)
    : variant_(variant),
      dae_(std::move(dae)),
      head_(std::move(head)),
      classes_(classes),
      omega_(variant == Variant::cool ? omega : 1),
      confidence_(confidence) {
  if (classes_ == 0) throw ParameterError("JointModel: need at least one class");
  if (omega_ == 0) throw ParameterError("JointModel: omega must be >= 1");
  if (head_.empty() || head_.layer(head_.size() - 1).kind() != LayerKind::softmax)
    throw ParameterError("JointModel: head must end in a softmax");
  if (head_.in_features() != 0 && head_.in_features() != dae_.code_dim())
    throw DimensionError("JointModel: head input width != encoder output width");
  if (head_.out_features() != units()) throw DimensionError("JointModel: head width != number of output units");
  if (variant_ == Variant::dae && !dae_.has_decoder()) throw ParameterError("JointModel: dae variant needs a decoder");
  confidence_.validate();
}

JointModel JointModel::build(const ModelSpec& spec, std::uint64_t seed) {
  Rng enc_rng(derive_seed(seed, 1));
  Rng dec_rng(derive_seed(seed, 2));
  Rng head_rng(derive_seed(seed, 3));
  DaeModel dae = spec.variant == Variant::dae ? DaeModel::build(spec.arch, spec.sigma, enc_rng, dec_rng)
                                              : DaeModel::build_encoder_only(spec.arch, enc_rng);
  const std::size_t units = spec.variant == Variant::cool ? spec.classes * spec.omega : spec.classes;
  const std::size_t code = dae.code_dim();
  auto w = make_parameter("head.weight", Tensor({code, units}));
  auto b = make_parameter("head.bias", Tensor({units}));
  init_glorot_uniform(*w, code, units, head_rng);
  LayerStack head;
  head.emplace<Dense>(w, b);
  head.emplace<Softmax>();
  return JointModel(spec.variant, std::move(dae), std::move(head), spec.classes, spec.omega, spec.confidence);
}

std::size_t JointModel::units() const { return classes_ * omega_; }

void JointModel::set_confidence_params(const ConfidenceParams& p) {
  p.validate();
  confidence_ = p;
}

std::vector<ParamPtr> JointModel::parameters() const {
  std::vector<ParamPtr> out = dae_.parameters();
  for (auto& p : head_.parameters())
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  return out;
}

JointModel JointModel::clone() const {
  ParamMap map;
  JointModel m;
  m.variant_ = variant_;
  m.dae_ = dae_.clone(map);
  m.head_ = head_.clone(map);
  m.classes_ = classes_;
  m.omega_ = omega_;
  m.confidence_ = confidence_;
  m.info_ = info_;
  return m;
}

Tensor JointModel::unit_probs(const Tensor& x) const { return head_.infer(dae_.encoder().infer(x)); }

Tensor JointModel::class_probs(const Tensor& x) const {
  Tensor u = unit_probs(x);
  return variant_ == Variant::cool ? cool_aggregate(u, classes_, omega_).class_probs : u;
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw ParameterError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

std::vector<Prediction> predict_batch(const JointModel& model, const Tensor& x) {
  if (x.rank() != 2 || x.cols() != model.input_dim())
    throw DimensionError("predict: expected [N, " + std::to_string(model.input_dim()) + "] input, got " +
                         shape_string(x.shape()));
  const std::size_t n = x.rows(), K = model.classes();
  Tensor h = model.dae().encoder().infer(x);
  Tensor units = model.head().infer(h);
  std::vector<Prediction> out(n);

  if (model.variant() == Variant::cool) {
    CoolOutput c = cool_aggregate(units, K, model.omega());
    for (std::size_t i = 0; i < n; ++i) {
      auto& p = out[i];
      p.probs = c.class_probs.row(i).reshaped({K});
      p.scaled = c.confidence.row(i).reshaped({K});
      p.label = argmax(p.probs.data());
      p.confidence = p.scaled[p.label];
    }
    return out;
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& p = out[i];
    p.probs = units.row(i).reshaped({K});
    p.label = argmax(p.probs.data());
    p.confidence = p.probs[p.label];
    p.scaled = p.probs;
  }
  if (model.variant() == Variant::dae) {
    const auto& params = model.confidence_params();
    Tensor r = model.dae().decoder().infer(h);
    for (std::size_t i = 0; i < n; ++i) {
      auto& p = out[i];
      ConfidenceReport rep;
      rep.recon_error = l2_norm(r.row(i) - x.row(i));
      rep.gamma = gamma(model.dae(), x.row(i), params);
      rep.gate = params.use_gate ? gate(rep.gamma, params.beta) : 1.0;
      rep.score = confidence_score(rep.recon_error, rep.gate, params.alpha, model.input_dim());
      p.report = rep;
      p.confidence = rep.score;
      p.scaled = p.probs * rep.score;
    }
  }
  return out;
}

Prediction predict(const JointModel& model, const Tensor& x) {
  if (x.size() != model.input_dim())
    throw DimensionError("predict: expected a single sample of width " + std::to_string(model.input_dim()));
  return predict_batch(model, x.reshaped({1, model.input_dim()}))[0];
}

double joint_loss(const JointModel& model, const Tensor& x, std::span<const std::size_t> labels, const Tensor* noisy,
                  const TrainOptions& options, Gradients* grads) {
  const auto& enc = model.dae().encoder();
  const auto& head = model.head();
  Tensor targets = model.variant() == Variant::cool ? cool_unit_targets(labels, model.classes(), model.omega())
                                                    : one_hot(labels, model.classes());
  Tape te, th;
  Tensor h = enc.forward(x, Mode::train, &te);
  Tensor p = head.forward(h, Mode::train, &th);
  double loss = cross_entropy(p, targets);
  Tensor gh;
  if (grads) gh = head.backward(th, cross_entropy_grad(p, targets), grads);
  if (noisy && model.variant() == Variant::dae && options.lambda_rec != 0.0) {
    const auto& dec = model.dae().decoder();
    Tape te2, td;
    Tensor r = dec.forward(enc.forward(*noisy, Mode::train, &te2), Mode::train, &td);
    loss += options.lambda_rec * mse(r, x);
    if (grads) enc.backward(te2, dec.backward(td, mse_grad(r, x) * options.lambda_rec, grads), grads);
  }
  if (grads) enc.backward(te, gh, grads);
  const auto params = model.parameters();
  if (grads) {
    loss += apply_weight_decay(params, options.lambda_l2, *grads);
  } else if (options.lambda_l2 != 0.0) {
    loss += options.lambda_l2 * weight_l2(params);
  }
  return loss;
}

std::vector<double> train_joint(JointModel& model, const Tensor& inputs, std::span<const std::size_t> labels,
                                const TrainOptions& options, std::uint64_t seed) {
  if (inputs.rank() != 2 || inputs.rows() == 0) throw ParameterError("train_joint: empty inputs");
  if (inputs.cols() != model.input_dim()) throw DimensionError("train_joint: input width mismatch");
  if (labels.size() != inputs.rows()) throw DimensionError("train_joint: label count != sample count");
  for (auto l : labels)
    if (l >= model.classes())
      throw ParameterError("train_joint: label " + std::to_string(l) + " outside [0, " +
                           std::to_string(model.classes()) + ")");
  if (options.batch_size == 0) throw ParameterError("train_joint: batch_size must be positive");

  Rng order_rng(derive_seed(seed, 10));
  Rng noise_rng(derive_seed(seed, 11));
  Adam adam(options.adam);
  const auto params = model.parameters();
  const bool reconstruct_term = model.variant() == Variant::dae && options.lambda_rec != 0.0;
  const std::size_t n = inputs.rows();

  std::vector<std::size_t> order(n);
  std::vector<std::size_t> batch_labels;
  std::vector<double> curve;
  std::size_t steps = 0;
  std::size_t epochs_run = 0;
  auto exhausted = [&] { return options.max_steps && steps >= options.max_steps; };
  for (std::size_t epoch = 0; epoch < options.epochs && !exhausted(); ++epoch, ++epochs_run) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < n && !exhausted(); start += options.batch_size) {
      const std::size_t end = std::min(n, start + options.batch_size);
      auto idx = std::span<const std::size_t>(order).subspan(start, end - start);
      Tensor xb = inputs.gather_rows(idx);
      batch_labels.clear();
      for (auto i : idx) batch_labels.push_back(labels[i]);
      Tensor noisy;
      if (reconstruct_term) noisy = corrupt(xb, model.dae().sigma(), noise_rng);
      Gradients grads;
      const double loss = joint_loss(model, xb, batch_labels, reconstruct_term ? &noisy : nullptr, options, &grads);
      adam.step(params, grads);
      curve.push_back(loss);
      ++steps;
    }
  }
  auto& info = model.training_info();
  info.seed = seed;
  info.epochs += epochs_run;
  info.losses.insert(info.losses.end(), curve.begin(), curve.end());
  return curve;
}

double accuracy(std::span<const Prediction> predictions, std::span<const std::size_t> labels) {
  return thresholded_accuracy(predictions, labels, 0.0);
}

double thresholded_accuracy(std::span<const Prediction> predictions, std::span<const std::size_t> labels,
                            double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ParameterError("thresholded_accuracy: threshold outside [0, 1]");
  if (predictions.size() != labels.size()) throw DimensionError("thresholded_accuracy: size mismatch");
  if (predictions.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i].label == labels[i] && predictions[i].confidence >= threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double thresholded_accuracy(const JointModel& model, const Tensor& inputs, std::span<const std::size_t> labels,
                            double threshold) {
  auto preds = predict_batch(model, inputs);
  return thresholded_accuracy(preds, labels, threshold);
}

}  // namespace daeconf
