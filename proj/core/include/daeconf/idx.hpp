// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "daeconf/protocols.hpp"
#include "daeconf/tensor.hpp"

namespace daeconf {

inline constexpr std::uint8_t kIdxUnsignedByte = 0x08;

/// Decoded IDX file: 0x00 0x00 <dtype> <rank>, `rank` big-endian u32 extents,
/// then the row-major payload. Only unsigned-byte payloads are supported.
struct IdxFile {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;

  std::size_t count() const;  // product of dims
  /// Payload as reals in [0, 1] (byte / 255) with shape `dims`.
  Tensor as_images() const;
  /// Payload as integers.
  std::vector<std::size_t> as_labels() const;
};

/// Throws FormatError on a bad magic number, an unsupported element type or a
/// truncated header/payload.
IdxFile parse_idx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_idx(const IdxFile& file);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

IdxFile load_idx(const std::filesystem::path& path);
void save_idx(const IdxFile& file, const std::filesystem::path& path);

/// Images file (rank >= 2) plus labels file (rank 1) as one dataset with
/// images flattened to rows in [0, 1].
LabeledData load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);

struct IdxSplit {
  LabeledData train;
  LabeledData test;
};

/// Loads the four standard MNIST-named files (train-images-idx3-ubyte, ...)
/// from `dir`. Throws std::runtime_error naming the first missing path.
IdxSplit load_mnist_dir(const std::filesystem::path& dir);

}  // namespace daeconf
