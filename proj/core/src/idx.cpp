// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#include "daeconf/idx.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <string>

namespace daeconf {

std::size_t IdxFile::count() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t d) { return a * d; });
}

Tensor IdxFile::as_images() const {
  Shape shape(dims.begin(), dims.end());
  Tensor t(shape);
  for (std::size_t i = 0; i < payload.size(); ++i) t[i] = static_cast<double>(payload[i]) / 255.0;
  return t;
}

std::vector<std::size_t> IdxFile::as_labels() const { return {payload.begin(), payload.end()}; }

IdxFile parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4)
    throw FormatError("IDX: truncated magic, expected 4 bytes at offset 0, found " + std::to_string(bytes.size()));
  if (bytes[0] != 0 || bytes[1] != 0) throw FormatError("IDX: bad magic (first two bytes must be zero)");
  if (bytes[2] != kIdxUnsignedByte)
  {
    char code[8];
    std::snprintf(code, sizeof code, "0x%02x", bytes[2]);
    throw FormatError(std::string("IDX: unsupported element type ") + code + " (only 0x08 is supported)");
  }
  const std::size_t rank = bytes[3];
  if (rank == 0) throw FormatError("IDX: bad magic (rank 0)");
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header)
    throw FormatError("IDX: truncated header, expected " + std::to_string(header - 4) + " bytes of dimensions at offset 4, found " +
                      std::to_string(bytes.size() - 4));
  IdxFile f;
  for (std::size_t r = 0; r < rank; ++r) {
    const auto* p = bytes.data() + 4 + 4 * r;
    f.dims.push_back(std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 | std::uint32_t{p[2]} << 8 | p[3]);
  }
  const std::size_t n = f.count();
  if (bytes.size() - header < n)
    throw FormatError("IDX: truncated payload, expected " + std::to_string(n) + " bytes at offset " +
                      std::to_string(header) + ", found " + std::to_string(bytes.size() - header) + " (missing " +
                      std::to_string(n - (bytes.size() - header)) + ")");
  if (bytes.size() - header > n)
    throw FormatError("IDX: " + std::to_string(bytes.size() - header - n) + " trailing bytes after payload at offset " +
                      std::to_string(header + n));
  f.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return f;
}

std::vector<std::uint8_t> encode_idx(const IdxFile& file) {
  if (file.dims.empty() || file.dims.size() > 255) throw ParameterError("IDX: rank must lie in [1, 255]");
  if (file.payload.size() != file.count()) throw DimensionError("IDX: payload size does not match dims");
  std::vector<std::uint8_t> out = {0, 0, kIdxUnsignedByte, static_cast<std::uint8_t>(file.dims.size())};
  for (auto d : file.dims)
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(d >> s));
  out.insert(out.end(), file.payload.begin(), file.payload.end());
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

IdxFile load_idx(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  try {
    return parse_idx(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_idx(const IdxFile& file, const std::filesystem::path& path) { write_file(path, encode_idx(file)); }

LabeledData load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
  IdxFile img = load_idx(images);
  IdxFile lab = load_idx(labels);
  if (img.dims.size() < 2) throw FormatError(images.string() + ": image file needs rank >= 2");
  if (lab.dims.size() != 1) throw FormatError(labels.string() + ": label file needs rank 1");
  if (img.dims[0] != lab.dims[0])
    throw FormatError("image count " + std::to_string(img.dims[0]) + " != label count " + std::to_string(lab.dims[0]));
  const std::size_t n = img.dims[0];
  const std::size_t d = n ? img.count() / n : 0;
  LabeledData out{img.as_images().reshaped({n, d}), lab.as_labels()};
  return out;
}

IdxSplit load_mnist_dir(const std::filesystem::path& dir) {
  const char* names[] = {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                         "t10k-labels-idx1-ubyte"};
  for (const char* n : names)
    if (!std::filesystem::exists(dir / n)) throw std::runtime_error("dataset file not found: '" + (dir / n).string() + "'");
  return {load_idx_dataset(dir / names[0], dir / names[1]), load_idx_dataset(dir / names[2], dir / names[3])};
}

}  // namespace daeconf
