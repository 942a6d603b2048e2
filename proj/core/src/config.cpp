// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "daeconf/idx.hpp"

namespace daeconf {

namespace {

const std::vector<std::pair<Task, const char*>> kTasks = {
    {Task::rings, "rings"},         {Task::fool, "fool"},       {Task::openset, "openset"},
    {Task::oneclass, "oneclass"},   {Task::gradcheck, "gradcheck"}, {Task::confmap, "confmap"},
    {Task::train, "train"},         {Task::eval, "eval"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(trim(item));
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) throw ConfigError(key, "'" + v + "' is not a valid number");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  // from_chars for double is unavailable in libstdc++ 11
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key, "'" + v + "' is not a valid number");
  return d;
}

std::string emit_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "'" + v + "' is not true or false");
}

template <typename F>
auto wrap(const std::string& key, F f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(v)) out.push_back(parse_number<std::size_t>(key, item));
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + f(v[i]);
  return out;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SIZE_FIELD(name)                                                                         \
  Field {                                                                                        \
    #name, [](ExperimentConfig& c, const std::string& v) { c.name = parse_number<std::size_t>(#name, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.name); }                         \
  }
#define REAL_FIELD(name)                                                                            \
  Field {                                                                                           \
    #name, [](ExperimentConfig& c, const std::string& v) { c.name = parse_real(#name, v); },        \
        [](const ExperimentConfig& c) { return emit_real(c.name); }                                 \
  }
#define BOOL_FIELD(name)                                                                            \
  Field {                                                                                           \
    #name, [](ExperimentConfig& c, const std::string& v) { c.name = parse_bool(#name, v); },        \
        [](const ExperimentConfig& c) { return std::string(c.name ? "true" : "false"); }            \
  }
#define STRING_FIELD(name)                                                                          \
  Field {                                                                                           \
    #name, [](ExperimentConfig& c, const std::string& v) { c.name = v; },                           \
        [](const ExperimentConfig& c) { return c.name; }                                            \
  }
#define LIST_FIELD(name)                                                                            \
  Field {                                                                                           \
    #name, [](ExperimentConfig& c, const std::string& v) { c.name = parse_sizes(#name, v); },       \
        [](const ExperimentConfig& c) { return join(c.name, [](std::size_t x) { return std::to_string(x); }); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"task", [](ExperimentConfig& c, const std::string& v) { c.task = wrap("task", [&] { return parse_task(v); }); },
       [](const ExperimentConfig& c) { return to_string(c.task); }},
      {"variant",
       [](ExperimentConfig& c, const std::string& v) {
         c.variants.clear();
         for (const auto& item : split_list(v)) c.variants.push_back(wrap("variant", [&] { return parse_variant(item); }));
       },
       [](const ExperimentConfig& c) { return join(c.variants, [](Variant x) { return to_string(x); }); }},
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); },
       [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      SIZE_FIELD(workers),
      STRING_FIELD(out_dir),
      STRING_FIELD(data_dir),
      STRING_FIELD(checkpoint),
      LIST_FIELD(hidden),
      BOOL_FIELD(convolutional),
      {"decoder",
       [](ExperimentConfig& c, const std::string& v) { c.decoder = wrap("decoder", [&] { return parse_decoder_mode(v); }); },
       [](const ExperimentConfig& c) { return to_string(c.decoder); }},
      {"output",
       [](ExperimentConfig& c, const std::string& v) {
         c.output = wrap("output", [&] { return parse_output_activation(v); });
       },
       [](const ExperimentConfig& c) { return to_string(c.output); }},
      REAL_FIELD(alpha),
      REAL_FIELD(beta),
      REAL_FIELD(sigma),
      BOOL_FIELD(use_gate),
      {"jacobian",
       [](ExperimentConfig& c, const std::string& v) {
         c.jacobian = wrap("jacobian", [&] { return parse_jacobian_method(v); });
       },
       [](const ExperimentConfig& c) { return to_string(c.jacobian); }},
      REAL_FIELD(eta),
      SIZE_FIELD(epochs),
      SIZE_FIELD(steps),
      SIZE_FIELD(batch),
      REAL_FIELD(lambda_rec),
      REAL_FIELD(lambda_l2),
      SIZE_FIELD(omega),
      SIZE_FIELD(max_train),
      REAL_FIELD(threshold),
      SIZE_FIELD(trials),
      SIZE_FIELD(max_updates),
      REAL_FIELD(fgn_eta),
      {"fool_target",
       [](ExperimentConfig& c, const std::string& v) {
         c.fool_target = wrap("fool_target", [&] { return parse_fooling_target(v); });
       },
       [](const ExperimentConfig& c) { return to_string(c.fool_target); }},
      LIST_FIELD(known),
      SIZE_FIELD(repetitions),
      LIST_FIELD(classes),
      SIZE_FIELD(ring_samples),
      SIZE_FIELD(grid),
      REAL_FIELD(background_distance),
  };
  return table;
}

const Field& field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  throw ConfigError(key, "unknown key");
}

bool is_image_task(Task t) { return t != Task::rings && t != Task::confmap && t != Task::gradcheck; }

}  // namespace

std::string to_string(Task t) {
  for (const auto& [task, name] : kTasks)
    if (task == t) return name;
  return "?";
}

Task parse_task(const std::string& s) {
  for (const auto& [task, name] : kTasks)
    if (s == name) return task;
  throw ParameterError("unknown task '" + s + "'");
}

const std::vector<Task>& all_tasks() {
  static const std::vector<Task> tasks = [] {
    std::vector<Task> t;
    for (const auto& [task, name] : kTasks) t.push_back(task);
    return t;
  }();
  return tasks;
}

ConfigError::ConfigError(std::string field, const std::string& message)
    : ParameterError("config field '" + field + "': " + message), field_(std::move(field)) {}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, what);
  };
  require(!variants.empty(), "variant", "at least one variant is required");
  require(workers >= 1, "workers", "must be at least 1");
  require(!hidden.empty(), "hidden", "at least one hidden layer is required");
  require(std::all_of(hidden.begin(), hidden.end(), [](std::size_t h) { return h > 0; }), "hidden",
          "layer widths must be positive");
  require(!(convolutional && decoder == DecoderMode::symmetric), "decoder",
          "convolutional encoders need an asymmetric decoder");
  require(alpha > 0.0, "alpha", "must be positive");
  require(beta > 0.0, "beta", "must be positive");
  require(sigma >= 0.0, "sigma", "must be non-negative");
  require(eta > 0.0, "eta", "must be positive");
  require(batch >= 1, "batch", "must be at least 1");
  require(epochs >= 1 || steps >= 1, "epochs", "epochs or steps must be positive");
  require(lambda_rec >= 0.0, "lambda_rec", "must be non-negative");
  require(lambda_l2 >= 0.0, "lambda_l2", "must be non-negative");
  require(omega >= 1, "omega", "must be at least 1");
  require(threshold >= 0.0 && threshold <= 1.0, "threshold", "must lie in [0, 1]");
  require(trials >= 1, "trials", "must be at least 1");
  require(max_updates >= 1, "max_updates", "must be at least 1");
  require(fgn_eta > 0.0, "fgn_eta", "must be positive");
  require(repetitions >= 1, "repetitions", "must be at least 1");
  require(std::all_of(known.begin(), known.end(), [](std::size_t k) { return k >= 1 && k <= 10; }), "known",
          "known-class counts must lie in [1, 10]");
  require(!known.empty(), "known", "at least one known-class count is required");
  require(std::all_of(classes.begin(), classes.end(), [](std::size_t k) { return k < 10; }), "classes",
          "class indices must lie in [0, 9]");
  require(!classes.empty(), "classes", "at least one class is required");
  require(ring_samples >= 1, "ring_samples", "must be at least 1");
  require(grid >= 2, "grid", "must be at least 2");
  require(background_distance >= 0.0, "background_distance", "must be non-negative");
  if (task == Task::fool || task == Task::eval)
    require(threshold > 0.0 && threshold < 1.0, "threshold", "must lie strictly inside (0, 1)");
  if (task == Task::eval) require(!checkpoint.empty(), "checkpoint", "eval needs a checkpoint");
}

ExperimentConfig default_config(Task task) {
  ExperimentConfig c;
  c.task = task;
  if (!is_image_task(task)) {
    c.steps = 50000;  // 2D settings are otherwise the struct defaults
    return c;
  }
  c.hidden = {400};
  c.convolutional = true;
  c.decoder = DecoderMode::asymmetric;
  c.output = OutputActivation::sigmoid;
  c.beta = 10.0;
  c.epochs = 100;
  switch (task) {
    case Task::fool:
      c.variants = {Variant::plain, Variant::cool, Variant::dae};
      c.alpha = 20.0;
      c.threshold = 0.9;
      break;
    case Task::openset:
      c.variants = {Variant::plain, Variant::cool, Variant::dae};
      c.alpha = 3.0;
      c.threshold = 0.99;
      break;
    case Task::oneclass:
      c.variants = {Variant::cool, Variant::dae};
      c.alpha = 3.0;
      c.sigma = 0.3;
      c.lambda_l2 = 10.0;
      break;
    default:
      c.alpha = 20.0;
      c.threshold = 0.9;
      break;
  }
  return c;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_field(ExperimentConfig& config, const std::string& key, const std::string& value) {
  field(key).set(config, trim(value));
}

std::string get_field(const ExperimentConfig& config, const std::string& key) { return field(key).get(config); }

ExperimentConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(ss, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    field(key);  // rejects unknown keys
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    entries.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  Task task = Task::rings;
  for (const auto& [k, v] : entries)
    if (k == "task") task = wrap("task", [&] { return parse_task(v); });
  ExperimentConfig c = default_config(task);
  for (const auto& [k, v] : entries) set_field(c, k, v);
  return c;
}

std::string emit_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : emit_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ModelSpec model_spec(const ExperimentConfig& c, Variant variant, std::size_t input_dim, std::size_t classes) {
  ModelSpec s;
  s.variant = variant;
  s.arch = {input_dim, c.hidden, c.convolutional, c.decoder, c.output};
  s.classes = classes;
  s.omega = c.omega;
  s.sigma = c.sigma;
  s.confidence.alpha = c.alpha;
  s.confidence.beta = c.beta;
  s.confidence.jacobian = c.jacobian;
  s.confidence.use_gate = c.use_gate;
  return s;
}

TrainOptions train_options(const ExperimentConfig& c) {
  TrainOptions o;
  o.epochs = c.epochs;
  o.max_steps = c.steps;
  o.batch_size = c.batch;
  o.lambda_rec = c.lambda_rec;
  o.lambda_l2 = c.lambda_l2;
  o.adam.eta = c.eta;
  return o;
}

FoolingConfig fooling_config(const ExperimentConfig& c) {
  FoolingConfig f;
  f.trials_per_class = c.trials;
  f.max_updates = c.max_updates;
  f.threshold = c.threshold;
  f.eta = c.fgn_eta;
  f.target = c.fool_target;
  f.workers = c.workers;
  return f;
}

}  // namespace daeconf
