// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "daeconf/classifier.hpp"
#include "daeconf/errors.hpp"
#include "daeconf/fooling.hpp"

namespace daeconf {

enum class Task { rings, fool, openset, oneclass, gradcheck, confmap, train, eval };

std::string to_string(Task t);
Task parse_task(const std::string& s);
const std::vector<Task>& all_tasks();

/// Invalid configuration; `field()` names the offending key.
class ConfigError : public ParameterError {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Everything a run needs. Text form is one `key = value` per line; lists are
/// comma-separated; `#` starts a comment.
struct ExperimentConfig {
  Task task = Task::rings;
  std::vector<Variant> variants = {Variant::dae};
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string out_dir;     // empty: $DAECONF_OUT_DIR/<task>, else runs/<task>
  std::string data_dir;    // directory with the four MNIST-named IDX files
  std::string checkpoint;  // model to load instead of training

  // architecture
  std::vector<std::size_t> hidden = {200, 200};
  bool convolutional = false;
  DecoderMode decoder = DecoderMode::symmetric;
  OutputActivation output = OutputActivation::linear;

  // confidence score
  double alpha = 40.0;
  double beta = 5.0;
  double sigma = 0.2;
  bool use_gate = true;
  JacobianMethod jacobian = JacobianMethod::forward;

  // training
  double eta = 1e-3;
  std::size_t epochs = 100;
  std::size_t steps = 0;  // update cap, 0 = epochs only
  std::size_t batch = 64;
  double lambda_rec = 1.0;
  double lambda_l2 = 0.0;
  std::size_t omega = 10;
  std::size_t max_train = 0;  // training-sample cap, 0 = all

  double threshold = 0.9;

  // fooling
  std::size_t trials = 20;
  std::size_t max_updates = 10000;
  double fgn_eta = 1e-5;
  FoolingTarget fool_target = FoolingTarget::unscaled_y;

  // open-set and 1-class
  std::vector<std::size_t> known = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t repetitions = 5;
  std::vector<std::size_t> classes = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

  // 2D rings
  std::size_t ring_samples = 1000;
  std::size_t grid = 101;
  double background_distance = 0.5;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Defaults for a task, taken from the published settings where they exist.
ExperimentConfig default_config(Task task);

/// Keys in emission order.
const std::vector<std::string>& config_keys();

/// Parses and assigns one field. Throws ConfigError on an unknown key or a
/// malformed value.
void set_field(ExperimentConfig& config, const std::string& key, const std::string& value);
std::string get_field(const ExperimentConfig& config, const std::string& key);

/// Starts from default_config(task) (task read first, `rings` when absent),
/// then applies every line. Duplicate keys are rejected.
ExperimentConfig parse_config(const std::string& text);
std::string emit_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of emit_config(config).
std::uint64_t config_hash(const ExperimentConfig& config);

ModelSpec model_spec(const ExperimentConfig& config, Variant variant, std::size_t input_dim, std::size_t classes);
TrainOptions train_options(const ExperimentConfig& config);
FoolingConfig fooling_config(const ExperimentConfig& config);

}  // namespace daeconf
