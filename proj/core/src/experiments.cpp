// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <set>

#include "daeconf/checkpoint.hpp"
#include "daeconf/csv.hpp"
#include "daeconf/gradcheck.hpp"
#include "daeconf/idx.hpp"
#include "daeconf/plot.hpp"
#include "daeconf/protocols.hpp"
#include "json.hpp"
#include "parallel.hpp"

#ifndef DAECONF_VERSION
#define DAECONF_VERSION "0.0.0"
#endif

namespace daeconf {

const char* version() { return DAECONF_VERSION; }

std::filesystem::path resolve_out_dir(const ExperimentConfig& config) {
  if (!config.out_dir.empty()) return config.out_dir;
  if (const char* env = std::getenv("DAECONF_OUT_DIR"); env && *env)
    return std::filesystem::path(env) / to_string(config.task);
  return std::filesystem::path("runs") / to_string(config.task);
}

namespace {

// Seed streams.
constexpr std::uint64_t kModelStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kDataStream = 3;
constexpr std::uint64_t kFoolStream = 4;

class Run {
 public:
  Run(const ExperimentConfig& c, std::ostream* log) : c_(c), log_(log), dir_(resolve_out_dir(c)) {
    std::filesystem::create_directories(dir_);
  }

  const ExperimentConfig& config() const { return c_; }
  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path file(const std::string& name) {
    files_.insert(name);
    const auto p = dir_ / name;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    return p;
  }

  void csv(const std::string& name, const CsvTable& t) { t.write(file(name)); }

  void say(const std::string& line) {
    summary_.push_back(line);
    if (log_) *log_ << line << '\n' << std::flush;
  }

  void progress(const std::string& line) {
    if (log_) *log_ << "  " << line << '\n' << std::flush;
  }

  RunResult finish(int exit_code, double seconds) {
    RunResult r{dir_, {files_.begin(), files_.end()}, summary_, seconds, exit_code};
    return r;
  }

 private:
  const ExperimentConfig& c_;
  std::ostream* log_;
  std::filesystem::path dir_;
  std::set<std::string> files_;
  std::vector<std::string> summary_;
};

TrainOptions effective_options(const ExperimentConfig& c) {
  TrainOptions o = train_options(c);
  // With an update cap, epochs only need to be large enough to reach it.
  if (o.max_steps) o.epochs = std::max(o.epochs, o.max_steps);
  return o;
}

double tail_mean(const std::vector<double>& v, std::size_t n) {
  if (v.empty()) return std::nan("");
  n = std::min(n, v.size());
  return std::accumulate(v.end() - static_cast<std::ptrdiff_t>(n), v.end(), 0.0) / static_cast<double>(n);
}

void write_loss(Run& run, const std::string& name, const std::vector<double>& losses) {
  CsvTable t({"step", "loss"});
  for (std::size_t i = 0; i < losses.size(); ++i) t.add_row({static_cast<unsigned long long>(i + 1), losses[i]});
  run.csv(name, t);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Data

IdxSplit load_data(const ExperimentConfig& c) {
  if (c.data_dir.empty()) throw ConfigError("data_dir", "this task needs a dataset directory");
  IdxSplit s = load_mnist_dir(c.data_dir);
  if (c.max_train && s.train.size() > c.max_train) {
    std::vector<std::size_t> idx(s.train.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(c.seed, kDataStream));
    rng.shuffle(idx);
    idx.resize(c.max_train);
    std::sort(idx.begin(), idx.end());
    s.train = s.train.subset(idx);
  }
  return s;
}

std::pair<std::size_t, std::size_t> image_dims(std::size_t d) {
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d))));
  if (side * side == d) return {side, side};
  return {1, d};
}

JointModel train_variant(Run& run, Variant v, const LabeledData& train, std::size_t classes) {
  const auto& c = run.config();
  JointModel m = JointModel::build(model_spec(c, v, train.inputs.cols(), classes), derive_seed(c.seed, kModelStream));
  run.progress("training " + to_string(v) + " on " + std::to_string(train.size()) + " samples");
  train_joint(m, train.inputs, train.labels, effective_options(c), derive_seed(c.seed, kTrainStream));
  return m;
}

// ---------------------------------------------------------------------------
// 2D rings and confidence fields

void emit_field(Run& run, const JointModel& m, const std::string& tag) {
  const auto& c = run.config();
  GridSpec g;
  g.nx = g.ny = c.grid;
  ConfidenceField f = confidence_map(m, g);
  CsvTable t({"row", "col", "x", "y", "score_no_gate", "gate", "score", "label"});
  for (std::size_t r = 0; r < g.ny; ++r)
    for (std::size_t col = 0; col < g.nx; ++col)
      t.add_row({static_cast<unsigned long long>(r), static_cast<unsigned long long>(col), g.x(col), g.y(r),
                 f.score_no_gate(r, col), f.gate(r, col), f.score(r, col),
                 static_cast<unsigned long long>(f.label(r, col))});
  run.csv("field_" + tag + ".csv", t);
  const double cell = std::max(1.0, 404.0 / static_cast<double>(c.grid));
  write_svg_heatmap(f.label, run.file(tag + "_labels.svg"),
                    {"argmax label", cell, 0.0, static_cast<double>(m.classes() - 1)});
  write_svg_heatmap(f.score_no_gate, run.file(tag + "_score_no_gate.svg"), {"score without gate", cell, 0.0, 1.0});
  write_svg_heatmap(f.gate, run.file(tag + "_gate.svg"), {"curvature gate", cell, 0.0, 1.0});
  write_svg_heatmap(f.score, run.file(tag + "_score.svg"), {"confidence", cell, 0.0, 1.0});
}

int run_rings(Run& run) {
  const auto& c = run.config();
  RingSpec spec;
  spec.samples_per_ring = c.ring_samples;
  Rng data_rng(derive_seed(c.seed, kDataStream));
  LabeledData train = sample_rings(spec, data_rng);
  LabeledData held = sample_rings(spec, data_rng);
  LabeledData background = sample_background(spec, held.size(), c.background_distance, 2.5, data_rng);

  CsvTable summary(
      {"variant", "steps", "final_loss", "mean_conf_ring", "mean_conf_background", "ratio", "label_accuracy"});
  for (Variant v : c.variants) {
    JointModel m = train_variant(run, v, train, spec.centers.size());
    const auto& losses = m.training_info().losses;
    auto ph = predict_batch(m, held.inputs);
    auto pb = predict_batch(m, background.inputs);
    double ring = 0.0, bg = 0.0;
    for (const auto& p : ph) ring += p.confidence;
    for (const auto& p : pb) bg += p.confidence;
    ring /= static_cast<double>(ph.size());
    bg /= static_cast<double>(pb.size());
    const double acc = accuracy(ph, held.labels);
    summary.add_row({to_string(v), static_cast<unsigned long long>(losses.size()), tail_mean(losses, 50), ring, bg,
                     bg > 0.0 ? ring / bg : std::numeric_limits<double>::infinity(), acc});
    write_loss(run, "loss_" + to_string(v) + ".csv", losses);
    save_checkpoint(m, run.file(to_string(v) + ".ckpt"));
    emit_field(run, m, to_string(v));
    run.say(to_string(v) + ": ring confidence " + fmt("%.4g", ring) + ", background " + fmt("%.4g", bg) +
            ", held-out label accuracy " + fmt("%.4f", acc));
  }
  run.csv("rings_summary.csv", summary);
  return 0;
}

int run_confmap(Run& run) {
  const auto& c = run.config();
  if (c.checkpoint.empty()) throw ConfigError("checkpoint", "confmap needs a 2D checkpoint (see the rings task)");
  JointModel m = load_checkpoint(c.checkpoint);
  if (m.input_dim() != 2) throw ConfigError("checkpoint", "confmap needs a model with 2D inputs");
  emit_field(run, m, to_string(m.variant()));
  run.say("wrote confidence fields for " + c.checkpoint);
  return 0;
}

// ---------------------------------------------------------------------------
// Image tasks

int run_train(Run& run) {
  const auto& c = run.config();
  IdxSplit data = load_data(c);
  CsvTable t({"variant", "train_samples", "epochs", "steps", "final_loss", "train_accuracy", "test_accuracy"});
  for (Variant v : c.variants) {
    JointModel m = train_variant(run, v, data.train, 10);
    const auto& info = m.training_info();
    const double tr = accuracy(predict_batch(m, data.train.inputs), data.train.labels);
    const double te = accuracy(predict_batch(m, data.test.inputs), data.test.labels);
    t.add_row({to_string(v), static_cast<unsigned long long>(data.train.size()),
               static_cast<unsigned long long>(info.epochs), static_cast<unsigned long long>(info.losses.size()),
               tail_mean(info.losses, 50), tr, te});
    write_loss(run, "loss_" + to_string(v) + ".csv", info.losses);
    save_checkpoint(m, run.file(to_string(v) + ".ckpt"));
    run.say(to_string(v) + ": train accuracy " + fmt("%.4f", tr) + ", test accuracy " + fmt("%.4f", te));
  }
  run.csv("train_summary.csv", t);
  return 0;
}

int run_eval(Run& run) {
  const auto& c = run.config();
  JointModel m = load_checkpoint(c.checkpoint);
  IdxSplit data = load_data(c);
  auto preds = predict_batch(m, data.test.inputs);
  std::set<double> thresholds = {0.0, 0.5, 0.9, 0.99, c.threshold};
  CsvTable t({"threshold", "accuracy", "thresholded_accuracy"});
  const double acc = accuracy(preds, data.test.labels);
  for (double th : thresholds) {
    const double ta = thresholded_accuracy(preds, data.test.labels, th);
    t.add_row({th, acc, ta});
    run.say("threshold " + fmt("%.2f", th) + ": thresholded accuracy " + fmt("%.4f", ta));
  }
  run.csv("eval.csv", t);
  return 0;
}

int run_fool(Run& run) {
  const auto& c = run.config();
  std::vector<JointModel> models;
  std::optional<IdxSplit> data;
  if (!c.checkpoint.empty()) {
    models.push_back(load_checkpoint(c.checkpoint));
    if (!c.data_dir.empty()) data = load_data(c);
  } else {
    data = load_data(c);
    for (Variant v : c.variants) models.push_back(train_variant(run, v, data->train, 10));
  }
  const FoolingConfig fc = fooling_config(c);
  CsvTable attempts({"variant", "class", "trial", "success", "steps", "final_output"});
  CsvTable summary({"variant", "target", "threshold", "eta", "trials_per_class", "attempts", "successes", "rate",
                    "mean_steps", "test_accuracy", "thresholded_accuracy"});
  for (const auto& m : models) {
    const std::string v = to_string(m.variant());
    run.progress("fooling " + v);
    FoolingReport rep = fooling_campaign(m, fc, derive_seed(c.seed, kFoolStream));
    const auto [rows, cols] = image_dims(m.input_dim());
    IdxFile archive;
    archive.dims = {static_cast<std::uint32_t>(rep.attempts.size()), static_cast<std::uint32_t>(rows),
                    static_cast<std::uint32_t>(cols)};
    for (std::size_t j = 0; j < rep.attempts.size(); ++j) {
      const auto& a = rep.attempts[j];
      const std::size_t trial = j % fc.trials_per_class;
      attempts.add_row({v, static_cast<unsigned long long>(a.target_class), static_cast<unsigned long long>(trial),
                        std::string(a.success ? "1" : "0"), static_cast<unsigned long long>(a.steps),
                        a.final_output});
      for (double px : a.sample.data())
        archive.payload.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(px, 0.0, 1.0))));
      if (a.success)
        write_pgm(a.sample, rows, cols,
                  run.file("samples/" + v + "_c" + std::to_string(a.target_class) + "_t" + std::to_string(trial) +
                           ".pgm"));
    }
    save_idx(archive, run.file("samples/" + v + "_all-idx3-ubyte"));
    std::string mean = rep.mean_steps ? format_real(*rep.mean_steps) : "";
    double acc = std::nan(""), tacc = std::nan("");
    if (data) {
      auto preds = predict_batch(m, data->test.inputs);
      acc = accuracy(preds, data->test.labels);
      tacc = thresholded_accuracy(preds, data->test.labels, c.threshold);
    }
    summary.add_row({v, to_string(fc.target), fc.threshold, fc.eta, static_cast<unsigned long long>(fc.trials_per_class),
                     static_cast<unsigned long long>(rep.attempts.size()), static_cast<unsigned long long>(rep.successes),
                     rep.rate, mean, acc, tacc});
    run.say(v + ": fooling rate " + fmt("%.3f", rep.rate) +
            (rep.mean_steps ? " (" + fmt("%.1f", *rep.mean_steps) + " steps)" : " (-)"));
  }
  run.csv("fooling_attempts.csv", attempts);
  run.csv("fooling_summary.csv", summary);
  return 0;
}

int run_openset(Run& run) {
  const auto& c = run.config();
  IdxSplit data = load_data(c);
  CsvTable detail({"variant", "num_known", "openness", "repetition", "known_classes", "tp", "fp", "fn", "tn",
                   "precision", "recall", "f"});
  CsvTable summary({"variant", "num_known", "openness", "mean_f", "std_f"});
  std::vector<Series> curves;
  TrainOptions opts = effective_options(c);
  for (Variant v : c.variants) {
    Series s{to_string(v), {}, {}};
    for (std::size_t k : c.known) {
      OpenSetTask task;
      task.num_known = k;
      task.repetitions = c.repetitions;
      task.threshold = c.threshold;
      task.max_train = 0;  // already capped at load time
      task.workers = c.workers;
      run.progress("open set " + to_string(v) + ", " + std::to_string(k) + " known");
      OpenSetResult r = open_set_run(model_spec(c, v, data.train.inputs.cols(), 10), opts, data.train, data.test,
                                     task, derive_seed(c.seed, kModelStream));
      for (const auto& rep : r.repetitions) {
        std::string known;
        for (auto cls : rep.known) known += (known.empty() ? "" : " ") + std::to_string(cls);
        const auto& n = rep.counts;
        detail.add_row({to_string(v), static_cast<unsigned long long>(k), r.openness,
                        static_cast<unsigned long long>(rep.repetition), known,
                        static_cast<unsigned long long>(n.true_positives),
                        static_cast<unsigned long long>(n.false_positives),
                        static_cast<unsigned long long>(n.false_negatives),
                        static_cast<unsigned long long>(n.true_negatives), n.precision, n.recall, n.f});
      }
      summary.add_row({to_string(v), static_cast<unsigned long long>(k), r.openness, r.mean_f, r.std_f});
      s.x.push_back(r.openness);
      s.y.push_back(r.mean_f);
      run.say(to_string(v) + ", " + std::to_string(k) + " known (openness " + fmt("%.3f", r.openness) + "): F " +
              fmt("%.4f", r.mean_f) + " +- " + fmt("%.4f", r.std_f));
    }
    curves.push_back(std::move(s));
  }
  run.csv("openset.csv", detail);
  run.csv("openset_summary.csv", summary);
  write_svg_curves(curves, run.file("openset.svg"),
                   {"open-set recognition", "openness", "F-measure", 0.0, 0.7, 0.0, 1.0});
  return 0;
}

int run_oneclass(Run& run) {
  const auto& c = run.config();
  IdxSplit data = load_data(c);
  CsvTable aucs({"variant", "class", "auc"});
  CsvTable roc({"variant", "class", "fpr", "tpr"});
  CsvTable avg({"variant", "fpr", "tpr"});
  std::vector<Series> curves;
  TrainOptions opts = effective_options(c);
  for (Variant v : c.variants) {
    const ModelSpec spec = model_spec(c, v, data.train.inputs.cols(), 10);
    std::vector<OneClassResult> results(c.classes.size());
    run.progress("one-class " + to_string(v));
    detail::parallel_for(c.classes.size(), c.workers, [&](std::size_t i) {
      results[i] = one_class_run(spec, opts, data.train, data.test, c.classes[i], 0,
                                 derive_seed(derive_seed(c.seed, kModelStream), c.classes[i]));
    });
    std::vector<RocCurve> per_class;
    double mean_auc = 0.0;
    for (const auto& r : results) {
      aucs.add_row({to_string(v), static_cast<unsigned long long>(r.target_class), r.roc.auc});
      for (const auto& p : r.roc.points)
        roc.add_row({to_string(v), static_cast<unsigned long long>(r.target_class), p.fpr, p.tpr});
      per_class.push_back(r.roc);
      mean_auc += r.roc.auc / static_cast<double>(results.size());
    }
    RocCurve a = average_roc(per_class);
    Series s{to_string(v) + " (AUC " + fmt("%.3f", a.auc) + ")", {}, {}};
    for (const auto& p : a.points) {
      avg.add_row({to_string(v), p.fpr, p.tpr});
      s.x.push_back(p.fpr);
      s.y.push_back(p.tpr);
    }
    curves.push_back(std::move(s));
    run.say(to_string(v) + ": mean AUC " + fmt("%.4f", mean_auc) + ", averaged-curve AUC " + fmt("%.4f", a.auc));
  }
  run.csv("oneclass.csv", aucs);
  run.csv("roc.csv", roc);
  run.csv("roc_average.csv", avg);
  write_svg_curves(curves, run.file("roc_average.svg"),
                   {"1-class recognition", "false positive rate", "true positive rate"});
  return 0;
}

int run_gradcheck(Run& run) {
  const auto rows = run_gradchecks(run.config().seed);
  CsvTable t({"check", "instances", "max_rel_error", "passed"});
  bool ok = true;
  for (const auto& r : rows) {
    t.add_row({r.name, static_cast<unsigned long long>(r.instances), r.max_rel_error,
               std::string(r.passed ? "1" : "0")});
    ok = ok && r.passed;
    run.say(r.name + ": max relative error " + fmt("%.3e", r.max_rel_error) + (r.passed ? " ok" : " FAILED"));
  }
  run.csv("gradcheck.csv", t);
  return ok ? 0 : 1;
}

void write_manifest(const ExperimentConfig& c, const RunResult& r) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(c)));
  nlohmann::json m;
  m["tool"] = "daeconf";
  m["version"] = version();
  m["task"] = to_string(c.task);
  m["seed"] = c.seed;
  m["config_hash"] = hash;
  m["config"] = emit_config(c);
  m["wall_seconds"] = r.wall_seconds;
  m["exit_code"] = r.exit_code;
  m["files"] = r.files;
  const std::string text = m.dump(2) + "\n";
  write_file(r.out_dir / "manifest.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Run run(config, log);
  int code = 0;
  switch (config.task) {
    case Task::rings: code = run_rings(run); break;
    case Task::confmap: code = run_confmap(run); break;
    case Task::train: code = run_train(run); break;
    case Task::eval: code = run_eval(run); break;
    case Task::fool: code = run_fool(run); break;
    case Task::openset: code = run_openset(run); break;
    case Task::oneclass: code = run_oneclass(run); break;
    case Task::gradcheck: code = run_gradcheck(run); break;
  }
  RunResult r = run.finish(code, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  write_manifest(config, r);
  return r;
}

}  // namespace daeconf
