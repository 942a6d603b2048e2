// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <unordered_map>

#include "daeconf/idx.hpp"
#include "json.hpp"

namespace daeconf {

using nlohmann::json;

namespace {

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto u = std::bit_cast<std::uint64_t>(v);
  for (int s = 0; s < 64; s += 8) out.push_back(static_cast<std::uint8_t>(u >> s));
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t u = 0;
  for (int i = 7; i >= 0; --i) u = u << 8 | p[i];
  return std::bit_cast<double>(u);
}

json geometry_json(const ImageGeometry& g) { return json::array({g.channels, g.height, g.width}); }

ImageGeometry geometry_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("checkpoint: geometry must be [channels, height, width]");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
}

class Writer {
 public:
  json stack(const LayerStack& s) {
    json layers = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Layer& l = s.layer(i);
      json d{{"kind", to_string(l.kind())}};
      if (auto* dense = dynamic_cast<const Dense*>(&l)) {
        d["weight"] = index(dense->weight());
        d["bias"] = index(dense->bias());
        d["transposed"] = dense->transposed();
      } else if (auto* conv = dynamic_cast<const Conv2d*>(&l)) {
        d["weight"] = index(conv->weight());
        d["bias"] = index(conv->bias());
        d["input"] = geometry_json(conv->input_geometry());
      } else if (auto* pool = dynamic_cast<const MaxPool2x2*>(&l)) {
        d["input"] = geometry_json(pool->input_geometry());
      }
      layers.push_back(std::move(d));
    }
    return layers;
  }

  json parameter_table() const {
    json t = json::array();
    for (const auto& p : params_) t.push_back({{"name", p->name}, {"shape", p->value.shape()}});
    return t;
  }

  const std::vector<ParamPtr>& params() const { return params_; }

 private:
  std::size_t index(const ParamPtr& p) {
    auto [it, fresh] = ids_.try_emplace(p.get(), params_.size());
    if (fresh) params_.push_back(p);
    return it->second;
  }

  std::vector<ParamPtr> params_;
  std::unordered_map<const Parameter*, std::size_t> ids_;
};

LayerKind parse_kind(const std::string& s) {
  for (auto k : {LayerKind::dense, LayerKind::conv2d, LayerKind::maxpool2x2, LayerKind::relu, LayerKind::sigmoid,
                 LayerKind::softmax})
    if (to_string(k) == s) return k;
  throw FormatError("checkpoint: unknown layer kind '" + s + "'");
}

LayerStack build_stack(const json& layers, const std::vector<ParamPtr>& params) {
  auto param = [&](const json& d, const char* key) {
    const auto i = d.at(key).get<std::size_t>();
    if (i >= params.size()) throw FormatError("checkpoint: parameter index out of range");
    return params[i];
  };
  LayerStack s;
  for (const auto& d : layers) {
    switch (parse_kind(d.at("kind").get<std::string>())) {
      case LayerKind::dense:
        s.emplace<Dense>(param(d, "weight"), param(d, "bias"), d.at("transposed").get<bool>());
        break;
      case LayerKind::conv2d:
        s.emplace<Conv2d>(param(d, "weight"), param(d, "bias"), geometry_from(d.at("input")));
        break;
      case LayerKind::maxpool2x2:
        s.emplace<MaxPool2x2>(geometry_from(d.at("input")));
        break;
      case LayerKind::relu:
        s.emplace<Relu>();
        break;
      case LayerKind::sigmoid:
        s.emplace<Sigmoid>();
        break;
      case LayerKind::softmax:
        s.emplace<Softmax>();
        break;
    }
  }
  return s;
}

std::string read_line(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  std::size_t end = pos;
  while (end < bytes.size() && bytes[end] != '\n') ++end;
  if (end == bytes.size()) throw FormatError("checkpoint: truncated preamble at offset " + std::to_string(pos));
  std::string line(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(end));
  pos = end + 1;
  return line;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const JointModel& model) {
  Writer w;
  json h;
  h["encoder"] = w.stack(model.dae().encoder());
  h["decoder"] = w.stack(model.dae().decoder());
  h["head"] = w.stack(model.head());
  h["parameters"] = w.parameter_table();
  h["variant"] = to_string(model.variant());
  h["classes"] = model.classes();
  h["omega"] = model.omega();
  h["input_dim"] = model.input_dim();
  h["sigma"] = model.dae().sigma();
  const auto& c = model.confidence_params();
  h["confidence"] = {{"alpha", c.alpha},
                     {"beta", c.beta},
                     {"jacobian", to_string(c.jacobian)},
                     {"fd_step", c.fd_step},
                     {"use_gate", c.use_gate}};
  const auto& info = model.training_info();
  h["training"] = {{"seed", info.seed}, {"epochs", info.epochs}, {"losses", info.losses.size()}};

  const std::string header = h.dump(2) + "\n";
  const std::string preamble = std::string(kCheckpointMagic) + "\n" + std::to_string(kCheckpointVersion) + "\n" +
                               std::to_string(header.size()) + "\n";
  std::vector<std::uint8_t> out(preamble.begin(), preamble.end());
  out.insert(out.end(), header.begin(), header.end());
  for (const auto& p : w.params())
    for (double v : p->value.data()) put_f64(out, v);
  for (double v : info.losses) put_f64(out, v);
  return out;
}

JointModel deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (read_line(bytes, pos) != kCheckpointMagic) throw FormatError("checkpoint: bad magic");
  const std::string version = read_line(bytes, pos);
  if (version != std::to_string(kCheckpointVersion))
    throw UnsupportedVersionError("checkpoint: unsupported format version '" + version + "' (this build reads " +
                                  std::to_string(kCheckpointVersion) + ")");
  std::size_t header_len = 0;
  try {
    header_len = std::stoull(read_line(bytes, pos));
  } catch (const std::logic_error&) {
    throw FormatError("checkpoint: bad header length");
  }
  if (bytes.size() - pos < header_len) throw FormatError("checkpoint: truncated header");
  json h;
  try {
    h = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + header_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  }
  pos += header_len;

  try {
    std::vector<ParamPtr> params;
    for (const auto& p : h.at("parameters")) {
      Tensor t(p.at("shape").get<Shape>());
      const std::size_t need = t.size() * 8;
      if (bytes.size() - pos < need)
        throw FormatError("checkpoint: truncated parameter '" + p.at("name").get<std::string>() + "' at offset " +
                          std::to_string(pos));
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = get_f64(bytes.data() + pos + 8 * i);
      pos += need;
      params.push_back(make_parameter(p.at("name").get<std::string>(), std::move(t)));
    }
    TrainingInfo info;
    info.seed = h.at("training").at("seed").get<std::uint64_t>();
    info.epochs = h.at("training").at("epochs").get<std::size_t>();
    const auto n_losses = h.at("training").at("losses").get<std::size_t>();
    if ((bytes.size() - pos) != n_losses * 8) throw FormatError("checkpoint: loss blob length mismatch");
    for (std::size_t i = 0; i < n_losses; ++i) info.losses.push_back(get_f64(bytes.data() + pos + 8 * i));

    const auto& cj = h.at("confidence");
    ConfidenceParams conf;
    conf.alpha = cj.at("alpha").get<double>();
    conf.beta = cj.at("beta").get<double>();
    conf.jacobian = parse_jacobian_method(cj.at("jacobian").get<std::string>());
    conf.fd_step = cj.at("fd_step").get<double>();
    conf.use_gate = cj.at("use_gate").get<bool>();

    DaeModel dae(build_stack(h.at("encoder"), params), build_stack(h.at("decoder"), params),
                 h.at("sigma").get<double>(), h.at("input_dim").get<std::size_t>());
    JointModel m(parse_variant(h.at("variant").get<std::string>()), std::move(dae), build_stack(h.at("head"), params),
                 h.at("classes").get<std::size_t>(), h.at("omega").get<std::size_t>(), conf);
    m.training_info() = std::move(info);
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  }
}

void save_checkpoint(const JointModel& model, const std::filesystem::path& path) {
  write_file(path, serialize_checkpoint(model));
}

JointModel load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace daeconf
