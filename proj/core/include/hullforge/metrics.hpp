// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hullforge/calib.hpp"
#include "hullforge/matte.hpp"
#include "hullforge/voxel_grid.hpp"

namespace hullforge {

// Mean squared occupancy error between two grids of identical shape.
// Accumulated in double regardless of grid size.
double voxel_mse(const VoxelGrid& a, const VoxelGrid& b);

// Peak signal-to-noise ratio in dB with peak 1.0 (occupancies live in
// [0, 1]). Identical inputs give +infinity; report writers serialise that
// as the string "inf".
double psnr_from_mse(double mse);
double voxel_psnr(const VoxelGrid& a, const VoxelGrid& b);

// Structural similarity on 2D images, the standard formulation: 11x11
// Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, dynamic range 1.0,
// averaged over all window placements that fit entirely inside the image.
// Symmetric in its arguments and exactly 1 for identical inputs.
// Throws Error("shape") on size mismatch, Error("validation") when either
// side of the image is smaller than the window.
double image_ssim(const SoftMatte& a, const SoftMatte& b);

// Renders the silhouette of an occupancy grid as seen by `cam`: each pixel
// ray marches through the grid with trilinear interpolation at half-voxel
// steps, and the pixel is 1 when any sample reaches `iso`. An iso above the
// grid maximum yields an all-zero matte.
SoftMatte reproject_silhouette(const VoxelGrid& grid, const CameraCalibration& cam, double iso);

// Intersection over union of two binary mattes (threshold 0.5). Both empty
// counts as IoU 1.
double binary_iou(const SoftMatte& a, const SoftMatte& b);

// One named row of an evaluation table: grid-space numbers plus optional
// silhouette-reprojection numbers against a reference camera.
struct EvalRow {
  std::string label;
  double mse = 0.0;
  double psnr = 0.0;
  std::optional<double> silhouette_psnr;
  std::optional<double> silhouette_ssim;
  std::optional<double> silhouette_iou;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::map<std::string, std::string> context;  // free-form, e.g. frame range

  const EvalRow* find(const std::string& label) const;
};

// JSON round trip for reports. PSNR of identical grids serialises as "inf".
void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

// Published full-scale reference points for the refinement stage, used to
// annotate evaluation output: mean squared occupancy error of 24.6e-3 on
// raw hulls dropping to 7.71e-3 after refinement.
inline constexpr double kReferenceInputMse = 24.6e-3;
inline constexpr double kReferenceRefinedMse = 7.71e-3;

}  // namespace hullforge
