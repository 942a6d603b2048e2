// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/fooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace daeconf {

std::string to_string(FoolingTarget t) { return t == FoolingTarget::unscaled_y ? "unscaled_y" : "scaled_y"; }

FoolingTarget parse_fooling_target(const std::string& s) {
  if (s == "unscaled_y" || s == "y") return FoolingTarget::unscaled_y;
  if (s == "scaled_y" || s == "y_scaled") return FoolingTarget::scaled_y;
  throw ParameterError("unknown fooling target '" + s + "' (expected unscaled_y|scaled_y)");
}

void FoolingConfig::validate() const {
  if (trials_per_class == 0) throw ParameterError("fooling: trials_per_class must be positive");
  if (max_updates == 0) throw ParameterError("fooling: max_updates must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("fooling: threshold must lie in (0, 1)");
  if (!(eta > 0.0)) throw ParameterError("fooling: eta must be positive");
}

Fgn::Fgn(std::size_t dim, Rng& rng)
    : z_(uniform(rng, {1, dim}, 0.0, 1.0)), weight_(uniform(rng, {dim, dim}, -0.01, 0.01)), bias_({dim}) {}

Tensor Fgn::generate() const {
  Tensor a = matmul(z_, weight_);
  add_row_vector(a, bias_);
  // sigmoid rounds to exactly 1 past ~37 in double; keep pixels interior.
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  for (auto& v : a.data()) v = std::clamp(sigmoid(v), lo, hi);
  return a;
}

void Fgn::sgd_step(const Tensor& image, const Tensor& grad_image, double eta) {
  const std::size_t D = dim();
  for (std::size_t j = 0; j < D; ++j) {
    const double s = image[j];
    const double da = grad_image[j] * s * (1.0 - s);
    if (da == 0.0) continue;
    bias_[j] -= eta * da;
    for (std::size_t i = 0; i < D; ++i) weight_(i, j) -= eta * z_[i] * da;
  }
}

namespace {

struct Evaluation {
  double output = 0.0;  // y~_k
  Tensor grad;          // dL/dx, empty when not requested
};

/// One pass through the frozen model: the success output y~_k and, when
/// requested, the gradient of -log(signal_k) w.r.t. the input. The curvature
/// gate is treated as a constant in the scaled-output gradient.
/// When the ungated dae output is already at or below `threshold`, the gate
/// (which never exceeds 1) is skipped and the bound is reported instead.
Evaluation evaluate(const JointModel& m, const Tensor& x, std::size_t k, FoolingTarget target, bool want_grad,
                    double threshold) {
  const auto& enc = m.dae().encoder();
  const auto& head = m.head();
  const std::size_t omega = m.omega();
  Tape te, th;
  Tensor h = enc.forward(x, Mode::train, &te);
  Tensor u = head.forward(h, Mode::train, &th);
  Tensor gu({1, m.units()});
  Evaluation ev;

  switch (m.variant()) {
    case Variant::plain: {
      ev.output = u[k];
      gu[k] = -1.0 / std::max(u[k], kProbFloor);
      break;
    }
    case Variant::cool: {
      double s = 0.0, prod = std::pow(static_cast<double>(omega), static_cast<double>(omega));
      for (std::size_t j = 0; j < omega; ++j) {
        s += u[k * omega + j];
        prod *= u[k * omega + j];
      }
      ev.output = prod;
      for (std::size_t j = 0; j < omega; ++j) {
        const std::size_t unit = k * omega + j;
        gu[unit] = target == FoolingTarget::scaled_y ? -1.0 / std::max(u[unit], kProbFloor)
                                                      : -1.0 / std::max(s, kProbFloor);
      }
      break;
    }
    case Variant::dae: {
      const auto& params = m.confidence_params();
      const double D = static_cast<double>(m.input_dim());
      Tape td;
      Tensor r = m.dae().decoder().forward(h, Mode::train, &td);
      Tensor e = r - x;
      const double err = l2_norm(e);
      const double upper = u[k] * std::exp(-params.alpha / D * err);
      ev.output = upper;
      if (params.use_gate && upper > threshold) ev.output = upper * gate(gamma(m.dae(), x, params), params.beta);
      gu[k] = -1.0 / std::max(u[k], kProbFloor);
      if (want_grad && target == FoolingTarget::scaled_y && err > 0.0) {
        const double c = params.alpha / D / err;
        Tensor gr = e * c;
        Tensor gh_dec = m.dae().decoder().backward(td, gr, nullptr);
        Tensor gh = head.backward(th, gu, nullptr);
        gh += gh_dec;
        ev.grad = enc.backward(te, gh, nullptr);
        ev.grad -= gr;
        return ev;
      }
      break;
    }
  }
  if (want_grad) ev.grad = enc.backward(te, head.backward(th, gu, nullptr), nullptr);
  return ev;
}

}  // namespace

double scaled_output(const JointModel& model, const Tensor& x, std::size_t class_k) {
  if (class_k >= model.classes()) throw ParameterError("scaled_output: class out of range");
  return evaluate(model, x.reshaped({1, model.input_dim()}), class_k, FoolingTarget::unscaled_y, false,
                  -std::numeric_limits<double>::infinity())
      .output;
}

FoolingAttempt fooling_attempt(const JointModel& target, std::size_t class_k, const FoolingConfig& config,
                               Rng& rng) {
  config.validate();
  if (class_k >= target.classes()) throw ParameterError("fooling_attempt: class out of range");
  Fgn fgn(target.input_dim(), rng);
  FoolingAttempt out;
  out.target_class = class_k;
  for (std::size_t step = 1; step <= config.max_updates; ++step) {
    Tensor image = fgn.generate();
    const bool last = step == config.max_updates;
    Evaluation ev = evaluate(target, image, class_k, config.target, !last, config.threshold);
    out.final_output = ev.output;
    out.sample = image;
    out.steps = step;
    if (ev.output > config.threshold) {
      out.success = true;
      return out;
    }
    if (!last) fgn.sgd_step(image, ev.grad, config.eta);
  }
  return out;
}

FoolingReport summarize_fooling(std::vector<FoolingAttempt> attempts, std::size_t classes,
                                std::size_t trials_per_class) {
  FoolingReport rep;
  rep.classes = classes;
  rep.trials_per_class = trials_per_class;
  rep.successes_per_class.assign(classes, 0);
  double step_sum = 0.0;
  for (const auto& a : attempts) {
    if (!a.success) continue;
    ++rep.successes;
    ++rep.successes_per_class.at(a.target_class);
    step_sum += static_cast<double>(a.steps);
  }
  const double total = static_cast<double>(classes * trials_per_class);
  rep.rate = total > 0 ? static_cast<double>(rep.successes) / total : 0.0;
  if (rep.successes > 0) rep.mean_steps = step_sum / static_cast<double>(rep.successes);
  rep.attempts = std::move(attempts);
  return rep;
}

FoolingReport fooling_campaign(const JointModel& target, const FoolingConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t K = target.classes();
  const std::size_t total = K * config.trials_per_class;
  std::vector<FoolingAttempt> attempts(total);
  detail::parallel_for(total, config.workers, [&](std::size_t j) {
    Rng rng(derive_seed(seed, j));
    attempts[j] = fooling_attempt(target, j / config.trials_per_class, config, rng);
  });
  return summarize_fooling(std::move(attempts), K, config.trials_per_class);
}

}  // namespace daeconf
