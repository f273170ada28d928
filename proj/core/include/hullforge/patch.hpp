// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <vector>

#include "hullforge/voxel_grid.hpp"

namespace hullforge {

/// Cubic patch window walked over the grid at a fixed stride.
struct PatchSpec {
  int size = 32;
  int stride = 16;
};

/// One extracted cube.  `corner` is the minimum (x,y,z) voxel index;
/// `values` holds size^3 occupancies, x-fastest like the grid.
struct Patch {
  std::array<int, 3> corner{0, 0, 0};
  std::vector<float> values;
};

/// Patches plus everything needed to rebuild the source grid's geometry.
struct PatchSet {
  PatchSpec spec;
  std::array<int, 3> grid_dims{0, 0, 0};
  Vec3f grid_origin = Vec3f::Zero();
  float voxel_size = 0.0f;
  std::vector<Patch> entries;
};

/// Patch corner positions along one axis: multiples of `stride` while the
/// window fits, plus a final corner clamped to dim - size when the last
/// stride step would overrun.  Every voxel is covered.  Requires
/// size <= dim and 1 <= stride <= size.
std::vector<int> patch_corners(int dim, int size, int stride);

/// Copies the size^3 block at `corner` (must fit inside the grid).
Patch extract_patch_at(const VoxelGrid& grid, const std::array<int, 3>& corner, int size);

/// All patch windows except the fully empty ones: a window whose occupancy
/// sum is exactly zero carries no carving evidence and is dropped.
PatchSet extract_patches(const VoxelGrid& grid, const PatchSpec& spec);

/// Rebuilds a grid by averaging every patch that covers each voxel
/// (unweighted mean), writing `fill` where nothing does, then clamping to
/// [0,1].  Accumulation runs in sorted corner order, so the output is
/// bitwise independent of entry order.
VoxelGrid reassemble(const PatchSet& patches, float fill = 0.0f);

}  // namespace hullforge
