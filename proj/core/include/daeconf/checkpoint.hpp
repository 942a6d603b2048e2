// Copyright 2026 The daeconf Authors
// Licensed under the Apache License, Version 2.0 (see LICENSE file)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "daeconf/classifier.hpp"

namespace daeconf {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointMagic = "DAECONF-CHECKPOINT";

/// Layout:
///   line 1  magic
///   line 2  format version
///   line 3  byte length of the JSON header
///   JSON header (indented, keys sorted) followed by a newline
///   parameter blobs in header order, then the loss curve, all as
///   little-endian IEEE-754 doubles.
///
/// Every distinct parameter is stored once; a tied decoder layer refers to
/// the encoder weight by index.
std::vector<std::uint8_t> serialize_checkpoint(const JointModel& model);
JointModel deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const JointModel& model, const std::filesystem::path& path);
JointModel load_checkpoint(const std::filesystem::path& path);

}  // namespace daeconf
