// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

#include "daeconf/checkpoint.hpp"
#include "daeconf/csv.hpp"
#include "daeconf/idx.hpp"
#include "daeconf/plot.hpp"
#include "nlohmann/json.hpp"

using daeconf::JointModel;
using daeconf::Rng;
using daeconf::Tensor;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> be32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v)};
}

// Two 2x2 images: bytes 0, 255, 51, 102 and 1, 2, 3, 4.
std::vector<std::uint8_t> two_image_fixture() {
  std::vector<std::uint8_t> b{0x00, 0x00, 0x08, 0x03};
  for (std::uint32_t d : {2u, 2u, 2u}) {
    auto e = be32(d);
    b.insert(b.end(), e.begin(), e.end());
  }
  for (std::uint8_t v : {0, 255, 51, 102, 1, 2, 3, 4}) b.push_back(v);
  return b;
}

template <typename F>
std::string error_message(F&& f) {
  try {
    f();
  } catch (const daeconf::FormatError& e) {
    return e.what();
  }
  return "";
}

// Minimal well-formedness: one root element, balanced and properly nested
// tags, quoted attributes, no stray '<' or '&' in text.
::testing::AssertionResult well_formed_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0, roots = 0;
  if (s.rfind("<?xml", 0) == 0) {
    i = s.find("?>");
    if (i == std::string::npos) return ::testing::AssertionFailure() << "unterminated prolog";
    i += 2;
  }
  auto entity_ok = [&](std::size_t at) {
    for (const char* e : {"&amp;", "&lt;", "&gt;", "&quot;", "&apos;"})
      if (s.compare(at, std::strlen(e), e) == 0) return true;
    return false;
  };
  while (i < s.size()) {
    if (s[i] != '<') {
      if (s[i] == '&' && !entity_ok(i)) return ::testing::AssertionFailure() << "bare & at " << i;
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(s[i])))
        return ::testing::AssertionFailure() << "text outside the root at " << i;
      ++i;
      continue;
    }
    const bool closing = i + 1 < s.size() && s[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    std::size_t name_start = j;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '-' || s[j] == ':')) ++j;
    const std::string name = s.substr(name_start, j - name_start);
    if (name.empty()) return ::testing::AssertionFailure() << "empty tag name at " << i;
    bool self_closing = false;
    while (true) {
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j >= s.size()) return ::testing::AssertionFailure() << "unterminated tag " << name;
      if (s[j] == '>') break;
      if (s[j] == '/' && j + 1 < s.size() && s[j + 1] == '>') {
        self_closing = true;
        ++j;
        break;
      }
      if (closing) return ::testing::AssertionFailure() << "attributes on closing tag " << name;
      const std::size_t a = j;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '-' || s[j] == ':')) ++j;
      if (j == a || j + 1 >= s.size() || s[j] != '=' || s[j + 1] != '"')
        return ::testing::AssertionFailure() << "malformed attribute in " << name;
      const std::size_t end = s.find('"', j + 2);
      if (end == std::string::npos) return ::testing::AssertionFailure() << "unterminated attribute in " << name;
      const std::string value = s.substr(j + 2, end - j - 2);
      if (value.find('<') != std::string::npos) return ::testing::AssertionFailure() << "'<' in attribute";
      j = end + 1;
    }
    if (closing) {
      if (stack.empty() || stack.back() != name)
        return ::testing::AssertionFailure() << "mismatched </" << name << ">";
      stack.pop_back();
    } else {
      if (stack.empty()) ++roots;
      if (!self_closing) stack.push_back(name);
    }
    i = j + 1;
  }
  if (!stack.empty()) return ::testing::AssertionFailure() << "unclosed <" << stack.back() << ">";
  if (roots != 1) return ::testing::AssertionFailure() << roots << " root elements";
  return ::testing::AssertionSuccess();
}

std::multiset<std::string> fills(const std::string& svg) {
  std::multiset<std::string> out;
  for (std::size_t at = svg.find("<rect"); at != std::string::npos; at = svg.find("<rect", at + 1)) {
    const std::size_t f = svg.find("fill=\"", at);
    out.insert(svg.substr(f + 6, 7));
  }
  return out;
}

daeconf::ModelSpec spec_for(daeconf::Variant v, bool conv, daeconf::DecoderMode mode) {
  daeconf::ModelSpec s;
  s.variant = v;
  s.arch = conv ? daeconf::Architecture{784, {20}, true, daeconf::DecoderMode::asymmetric,
                                        daeconf::OutputActivation::sigmoid}
                : daeconf::Architecture{12, {9, 5}, false, mode, daeconf::OutputActivation::sigmoid};
  s.classes = 4;
  s.omega = 3;
  s.sigma = 0.15;
  s.confidence.alpha = 7.5;
  s.confidence.beta = 3.25;
  s.confidence.jacobian = conv ? daeconf::JacobianMethod::forward : daeconf::JacobianMethod::reverse;
  s.confidence.use_gate = false;
  return s;
}

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("daeconf_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Idx, TwoImageFixtureDecodesExactly) {
  auto f = daeconf::parse_idx(two_image_fixture());
  EXPECT_EQ(f.dims, (std::vector<std::uint32_t>{2, 2, 2}));
  EXPECT_EQ(f.count(), 8u);
  Tensor t = f.as_images();
  ASSERT_EQ(t.shape(), (daeconf::Shape{2, 2, 2}));
  const double expected[] = {0.0, 1.0, 0.2, 0.4, 1.0 / 255, 2.0 / 255, 3.0 / 255, 4.0 / 255};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(t[i], expected[i]);
  EXPECT_EQ(daeconf::encode_idx(f), two_image_fixture());
}

TEST(Idx, MnistSizedHeader) {
  std::vector<std::uint8_t> b{0x00, 0x00, 0x08, 0x03};
  for (std::uint32_t d : {60000u, 28u, 28u}) {
    auto e = be32(d);
    b.insert(b.end(), e.begin(), e.end());
  }
  b.resize(b.size() + 60000u * 28u * 28u, 7);
  auto f = daeconf::parse_idx(b);
  EXPECT_EQ(f.dims, (std::vector<std::uint32_t>{60000, 28, 28}));
  EXPECT_EQ(f.payload.size(), 60000u * 784u);
}

TEST(Idx, LabelFile) {
  std::vector<std::uint8_t> b{0x00, 0x00, 0x08, 0x01};
  auto e = be32(4);
  b.insert(b.end(), e.begin(), e.end());
  for (std::uint8_t v : {3, 0, 9, 1}) b.push_back(v);
  EXPECT_EQ(daeconf::parse_idx(b).as_labels(), (std::vector<std::size_t>{3, 0, 9, 1}));
}

TEST(Idx, TruncationNamesTheMissingLength) {
  auto b = two_image_fixture();
  b.pop_back();
  const std::string msg = error_message([&] { daeconf::parse_idx(b); });
  EXPECT_NE(msg.find("expected 8 bytes at offset 16"), std::string::npos) << msg;
  EXPECT_NE(msg.find("missing 1"), std::string::npos) << msg;
  auto header_only = two_image_fixture();
  header_only.resize(10);
  EXPECT_THROW(daeconf::parse_idx(header_only), daeconf::FormatError);
}

TEST(Idx, BadMagicAndTypeAreFormatErrors) {
  auto b = two_image_fixture();
  b[0] = 0x01;
  EXPECT_NE(error_message([&] { daeconf::parse_idx(b); }).find("magic"), std::string::npos);
  b = two_image_fixture();
  b[2] = 0x0D;
  EXPECT_NE(error_message([&] { daeconf::parse_idx(b); }).find("0x0d"), std::string::npos);
  b = two_image_fixture();
  b.push_back(0);
  EXPECT_THROW(daeconf::parse_idx(b), daeconf::FormatError);
  EXPECT_THROW(daeconf::parse_idx(std::vector<std::uint8_t>{0, 0}), daeconf::FormatError);
}

TEST(Idx, FileRoundTripAndDataset) {
  fs::path dir = temp_dir("idx");
  daeconf::IdxFile images = daeconf::parse_idx(two_image_fixture());
  daeconf::IdxFile labels{{2}, {5, 6}};
  daeconf::save_idx(images, dir / "nested" / "img");
  daeconf::save_idx(labels, dir / "lab");
  auto back = daeconf::load_idx(dir / "nested" / "img");
  EXPECT_EQ(back.dims, images.dims);
  EXPECT_EQ(back.payload, images.payload);
  auto ds = daeconf::load_idx_dataset(dir / "nested" / "img", dir / "lab");
  EXPECT_EQ(ds.inputs.shape(), (daeconf::Shape{2, 4}));
  EXPECT_EQ(ds.labels, (std::vector<std::size_t>{5, 6}));
  EXPECT_THROW(daeconf::load_idx_dataset(dir / "nested" / "img", dir / "missing"), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Idx, MissingMnistDirectoryNamesThePath) {
  try {
    daeconf::load_mnist_dir("/nonexistent/mnist");
    FAIL() << "no exception";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/mnist/train-images-idx3-ubyte"), std::string::npos) << e.what();
  }
}

TEST(Idx, BundledDigitsFixture) {
  auto split = daeconf::load_mnist_dir(DAECONF_TEST_DATA "/digits");
  EXPECT_EQ(split.train.inputs.cols(), 784u);
  EXPECT_EQ(split.train.size(), split.train.inputs.rows());
  EXPECT_EQ(split.test.size(), 500u);
  for (auto l : split.train.labels) ASSERT_LE(l, 9u);
  double lo = 1.0, hi = 0.0;
  for (double v : split.train.inputs.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_EQ(lo, 0.0);
  EXPECT_LE(hi, 1.0);
}

TEST(Idx, OfficialMnistWhenPresent) {
  const char* dir = std::getenv("DAECONF_MNIST_DIR");
  if (!dir || !fs::exists(fs::path(dir) / "train-labels-idx1-ubyte")) GTEST_SKIP() << "DAECONF_MNIST_DIR not set";
  auto labels = daeconf::load_idx(fs::path(dir) / "train-labels-idx1-ubyte");
  ASSERT_EQ(labels.dims, (std::vector<std::uint32_t>{60000}));
  for (auto l : labels.as_labels()) ASSERT_LE(l, 9u);
  auto images = daeconf::load_idx(fs::path(dir) / "train-images-idx3-ubyte");
  EXPECT_EQ(images.dims, (std::vector<std::uint32_t>{60000, 28, 28}));
}

TEST(CheckpointProperty, RoundTripIsByteIdenticalWithIdenticalPredictions) {
  Rng rng(1);
  int built = 0;
  for (auto v : {daeconf::Variant::plain, daeconf::Variant::cool, daeconf::Variant::dae})
    for (auto mode : {daeconf::DecoderMode::symmetric, daeconf::DecoderMode::asymmetric})
      for (bool conv : {false, true}) {
        if (conv && (mode == daeconf::DecoderMode::symmetric || v == daeconf::Variant::cool)) continue;
        ++built;
        JointModel m = JointModel::build(spec_for(v, conv, mode), 10 + built);
        for (auto& p : m.parameters())
          for (auto& x : p->value.data()) x += rng.uniform(-0.1, 0.1);
        m.training_info() = {77, 3, {0.5, 0.25, std::nextafter(0.125, 1.0)}};
        const auto bytes = daeconf::serialize_checkpoint(m);
        JointModel back = daeconf::deserialize_checkpoint(bytes);
        EXPECT_EQ(daeconf::serialize_checkpoint(back), bytes);
        EXPECT_EQ(back.training_info(), m.training_info());
        EXPECT_EQ(back.confidence_params(), m.confidence_params());
        EXPECT_EQ(back.variant(), m.variant());
        const std::size_t d = m.input_dim();
        Tensor x = daeconf::uniform(rng, {3, d}, 0.0, 1.0);
        auto a = daeconf::predict_batch(m, x), b = daeconf::predict_batch(back, x);
        for (std::size_t i = 0; i < 3; ++i) {
          EXPECT_EQ(a[i].probs, b[i].probs);
          EXPECT_EQ(a[i].scaled, b[i].scaled);
          EXPECT_EQ(a[i].confidence, b[i].confidence);
          EXPECT_EQ(a[i].label, b[i].label);
        }
      }
  EXPECT_EQ(built, 8);
}

TEST(Checkpoint, FileRoundTrip) {
  fs::path dir = temp_dir("ckpt");
  JointModel m = JointModel::build(spec_for(daeconf::Variant::dae, false, daeconf::DecoderMode::symmetric), 3);
  daeconf::save_checkpoint(m, dir / "m.ckpt");
  EXPECT_EQ(daeconf::serialize_checkpoint(daeconf::load_checkpoint(dir / "m.ckpt")), daeconf::serialize_checkpoint(m));
  fs::remove_all(dir);
}

TEST(Checkpoint, TiedWeightsAreStoredOnceAndStayTied) {
  JointModel m = JointModel::build(spec_for(daeconf::Variant::dae, false, daeconf::DecoderMode::symmetric), 4);
  const auto bytes = daeconf::serialize_checkpoint(m);
  const std::string text(bytes.begin(), bytes.end());
  // preamble: magic, version, header length
  std::size_t p1 = text.find('\n'), p2 = text.find('\n', p1 + 1), p3 = text.find('\n', p2 + 1);
  const std::size_t header_len = std::stoull(text.substr(p2 + 1, p3 - p2 - 1));
  auto h = nlohmann::json::parse(text.substr(p3 + 1, header_len));
  // 2 encoder weights + 2 encoder biases + 2 decoder biases + head weight and bias
  EXPECT_EQ(h["parameters"].size(), 8u);
  EXPECT_EQ(h["parameters"].size(), m.parameters().size());
  std::size_t values = 0;
  for (const auto& p : m.parameters()) values += p->value.size();
  EXPECT_EQ(bytes.size(), p3 + 1 + header_len + 8 * values);

  JointModel back = daeconf::deserialize_checkpoint(bytes);
  const auto& enc = dynamic_cast<const daeconf::Dense&>(back.dae().encoder().layer(0));
  const auto& dec = dynamic_cast<const daeconf::Dense&>(back.dae().decoder().layer(back.dae().decoder().size() - 2));
  EXPECT_EQ(enc.weight().get(), dec.weight().get());
  EXPECT_TRUE(dec.transposed());
}

TEST(Checkpoint, CorruptedMagicAndVersion) {
  JointModel m = JointModel::build(spec_for(daeconf::Variant::plain, false, daeconf::DecoderMode::symmetric), 5);
  auto bytes = daeconf::serialize_checkpoint(m);
  auto bad = bytes;
  bad[0] ^= 0x20;
  EXPECT_THROW(daeconf::deserialize_checkpoint(bad), daeconf::FormatError);
  const std::string text(bytes.begin(), bytes.end());
  const std::size_t p1 = text.find('\n');
  std::string v2 = text.substr(0, p1 + 1) + "2" + text.substr(text.find('\n', p1 + 1));
  EXPECT_THROW(daeconf::deserialize_checkpoint(std::vector<std::uint8_t>(v2.begin(), v2.end())),
               daeconf::UnsupportedVersionError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(daeconf::deserialize_checkpoint(truncated), daeconf::FormatError);
}

TEST(Svg, ConstantFieldIsOneColor) {
  const std::string svg = daeconf::svg_heatmap(Tensor({5, 7}, 0.3), {"constant <field> & co", 4.0, {}, {}});
  EXPECT_TRUE(well_formed_xml(svg));
  auto f = fills(svg);
  EXPECT_EQ(f.size(), 35u);
  EXPECT_EQ(std::set<std::string>(f.begin(), f.end()).size(), 1u);
  EXPECT_EQ(*f.begin(), "#440154");
}

TEST(Svg, DistinctValuesGetDistinctFills) {
  const std::string svg = daeconf::svg_heatmap(Tensor::matrix({{0.0, 1.0}, {2.0, 3.0}}));
  EXPECT_TRUE(well_formed_xml(svg));
  auto f = fills(svg);
  EXPECT_EQ(f.size(), 4u);
  EXPECT_EQ(std::set<std::string>(f.begin(), f.end()).size(), 4u);
  EXPECT_EQ(f.count("#440154"), 1u);
  EXPECT_EQ(f.count("#fde725"), 1u);
}

TEST(Svg, NonFiniteFieldIsAParameterError) {
  Tensor t({2, 2}, 0.5);
  t[3] = std::nan("");
  EXPECT_THROW(daeconf::svg_heatmap(t), daeconf::ParameterError);
  EXPECT_THROW(daeconf::color_ramp(std::nan("")), daeconf::ParameterError);
}

TEST(Svg, CurvesAreWellFormed) {
  std::vector<daeconf::Series> s{{"dae \"sym\"", {0, 0.5, 1}, {0, 0.9, 1}}, {"cool <b>", {0, 1}, {0, 1}}};
  daeconf::CurveOptions o;
  o.title = "ROC & friends";
  o.x_label = "FPR";
  o.y_label = "TPR";
  EXPECT_TRUE(well_formed_xml(daeconf::svg_curves(s, o)));
  EXPECT_TRUE(well_formed_xml(daeconf::svg_curves({}, o)));
  s[0].y[1] = INFINITY;
  EXPECT_THROW(daeconf::svg_curves(s, o), daeconf::ParameterError);
}

TEST(ColorRamp, ControlPoints) {
  EXPECT_EQ(daeconf::to_hex(daeconf::color_ramp(0.0)), "#440154");
  EXPECT_EQ(daeconf::to_hex(daeconf::color_ramp(0.25)), "#3b528b");
  EXPECT_EQ(daeconf::to_hex(daeconf::color_ramp(0.5)), "#21918c");
  EXPECT_EQ(daeconf::to_hex(daeconf::color_ramp(0.75)), "#5ec962");
  EXPECT_EQ(daeconf::to_hex(daeconf::color_ramp(1.0)), "#fde725");
  EXPECT_EQ(daeconf::color_ramp(-3.0), daeconf::color_ramp(0.0));
  // midway between the first two points: (0x44 + 0x3b) / 2 = 63.5 -> 64
  EXPECT_EQ(daeconf::color_ramp(0.125).r, 64);
}

TEST(Pgm, ZeroImage) {
  auto bytes = daeconf::encode_pgm(Tensor({28, 28}), 28, 28);
  const std::string header = "P5\n28 28\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 784);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(header.size())), header);
  for (std::size_t i = header.size(); i < bytes.size(); ++i) ASSERT_EQ(bytes[i], 0);
}

TEST(Pgm, RoundsAndClamps) {
  auto bytes = daeconf::encode_pgm(Tensor::vector({-1.0, 0.5, 1.0, 2.0}), 2, 2);
  const std::vector<std::uint8_t> tail(bytes.end() - 4, bytes.end());
  EXPECT_EQ(tail, (std::vector<std::uint8_t>{0, 128, 255, 255}));
  EXPECT_THROW(daeconf::encode_pgm(Tensor({3}), 2, 2), daeconf::DimensionError);
}

TEST(Csv, Formatting) {
  daeconf::CsvTable t({"name", "value", "count"});
  t.add_row({std::string("a,b"), 0.1, 3LL});
  t.add_row({std::string("say \"hi\""), std::nan(""), 4ULL});
  t.add_row({std::string("plain"), -INFINITY, -2LL});
  EXPECT_EQ(t.str(),
            "name,value,count\n"
            "\"a,b\",0.10000000000000001,3\n"
            "\"say \"\"hi\"\"\",nan,4\n"
            "plain,-inf,-2\n");
  EXPECT_THROW(t.add_row({1.0}), daeconf::DimensionError);
}

TEST(CsvProperty, RealsRoundTrip) {
  Rng rng(6);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.index(200)) - 100);
    EXPECT_EQ(std::strtod(daeconf::format_real(v).c_str(), nullptr), v);
  }
}
