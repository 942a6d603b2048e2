// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <benchmark/benchmark.h>

#include "daeconf/classifier.hpp"
#include "daeconf/dae.hpp"
#include "daeconf/fooling.hpp"
#include "daeconf/protocols.hpp"

using namespace daeconf;

namespace {

JointModel dense_model(Variant v, std::size_t hidden) {
  ModelSpec spec;
  spec.variant = v;
  spec.arch = {784, {hidden}, false, DecoderMode::symmetric, OutputActivation::sigmoid};
  return JointModel::build(spec, 1);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Tensor a = uniform(rng, {n, n}, -1, 1), b = uniform(rng, {n, n}, -1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_JointStep(benchmark::State& state) {
  JointModel m = dense_model(Variant::dae, 400);
  Rng rng(2);
  Tensor x = uniform(rng, {64, 784}, 0, 1);
  Tensor noisy = corrupt(x, 0.2, rng);
  std::vector<std::size_t> labels(64);
  for (auto& l : labels) l = rng.index(10);
  TrainOptions opt;
  for (auto _ : state) {
    Gradients g;
    benchmark::DoNotOptimize(joint_loss(m, x, labels, &noisy, opt, &g));
  }
}
BENCHMARK(BM_JointStep)->Unit(benchmark::kMillisecond);

void BM_JacobianDiag(benchmark::State& state) {
  JointModel m = dense_model(Variant::dae, 400);
  Rng rng(3);
  Tensor x = uniform(rng, {784}, 0, 1);
  ConfidenceParams p;
  p.jacobian = static_cast<JacobianMethod>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(jacobian_diag(m.dae(), x, p));
  state.SetLabel(to_string(p.jacobian));
}
BENCHMARK(BM_JacobianDiag)
    ->Arg(static_cast<int>(JacobianMethod::forward))
    ->Arg(static_cast<int>(JacobianMethod::reverse))
    ->Unit(benchmark::kMillisecond);

void BM_PredictBatch(benchmark::State& state) {
  JointModel m = dense_model(static_cast<Variant>(state.range(0)), 400);
  Rng rng(4);
  Tensor x = uniform(rng, {100, 784}, 0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(m, x));
  state.SetLabel(to_string(m.variant()));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_PredictBatch)
    ->Arg(static_cast<int>(Variant::plain))
    ->Arg(static_cast<int>(Variant::dae))
    ->Unit(benchmark::kMillisecond);

void BM_FoolingUpdate(benchmark::State& state) {
  JointModel m = dense_model(Variant::dae, 400);
  FoolingConfig c;
  c.max_updates = 10;
  c.trials_per_class = 1;
  c.threshold = 0.9;
  c.eta = 1e-3;
  for (auto _ : state) {
    Rng rng(5);
    benchmark::DoNotOptimize(fooling_attempt(m, 0, c, rng));
  }
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_FoolingUpdate)->Unit(benchmark::kMillisecond);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  std::vector<double> s(n);
  auto pos = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = rng.uniform(0, 1);
    pos[i] = rng.index(2) == 1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_and_auc(s, std::span<const bool>(pos.get(), n)));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
