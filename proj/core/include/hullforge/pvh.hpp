// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "hullforge/calib.hpp"
#include "hullforge/matte.hpp"
#include "hullforge/voxel_grid.hpp"

namespace hullforge {

/// How per-view foreground probabilities combine into one occupancy.
///
/// - PaperLiteral: product of 1/(1+e^p) per view, the fusion rule exactly as
///   printed in the original formulation.  Decreasing in its inputs, so it
///   darkens as evidence accumulates; kept selectable for fidelity
///   experiments.
/// - CalibratedSigmoid (default): product of per-view sharpened sigmoids
///   (1+e^-5) / (1+e^(-10(p-1/2))), normalised so a view reporting 1
///   contributes a factor of exactly 1.
/// - Product: plain product of the per-view probabilities.
enum class FusionMode { PaperLiteral, CalibratedSigmoid, Product };

FusionMode fusion_mode_from_string(const std::string& name);
std::string to_string(FusionMode mode);

/// Combines per-view probabilities (each in [0,1]) into one occupancy in
/// [0,1].  The inputs are sorted before multiplying, so the result is
/// bitwise independent of camera order.  Throws Error("validation") on an
/// empty list or out-of-range input.
double fuse_views(std::span<const double> per_view, FusionMode mode);

/// Foreground probability of one world point in one view: the bilinear
/// matte sample at the projected position, or 0 when the point is out of
/// view (out-of-view points carve, they do not abstain).
double per_view_probability(const CameraCalibration& cam, const SoftMatte& matte, const Vec3& p);

/// Grid placement: origin is the centre of voxel (0,0,0).
struct GridSpec {
  Vec3f origin = Vec3f::Zero();
  float voxel_size = 0.0f;
  int nx = 0, ny = 0, nz = 0;

  /// Covers `box` with dims^3 cubic voxels; throws Error("config") unless
  /// the box extents agree to within 1e-9 relative (cubic voxels only).
  static GridSpec covering(const Box3& box, int dims);
};

/// Computes the full occupancy grid for one frame.  `mattes` pairs up with
/// `cameras` by index and every matte must match its camera's image size.
/// Deterministic: voxel values do not depend on camera order or on
/// `threads`.
VoxelGrid compute_pvh(const std::vector<CameraCalibration>& cameras,
                      const std::vector<SoftMatte>& mattes, const GridSpec& spec,
                      FusionMode mode, unsigned threads = 1);

}  // namespace hullforge
