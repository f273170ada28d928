// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hullforge {

/// Soft foreground matte: per-pixel foreground probability in [0, 1],
/// row-major, origin at the top-left, y down.
struct SoftMatte {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

SoftMatte make_matte(int width, int height, float fill = 0.0f);

/// Bilinear sample at continuous pixel coordinates.  Integer coordinates
/// return the pixel value exactly; anything outside [0, w-1] x [0, h-1]
/// samples as 0 (certain background).
double sample_matte(const SoftMatte& matte, double x, double y);

/// 8-bit binary PGM (P5, maxval 255).  Probabilities quantise to
/// round(v * 255) on save and divide by 255 on load.
SoftMatte load_matte(const std::filesystem::path& path);
void save_matte(const SoftMatte& matte, const std::filesystem::path& path);

}  // namespace hullforge
