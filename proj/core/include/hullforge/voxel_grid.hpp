// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hullforge/geometry.hpp"

namespace hullforge {

/// Dense occupancy grid with cubic voxels.  `origin` is the world position
/// of the centre of voxel (0,0,0); voxel (x,y,z) is centred at
/// origin + voxel_size * (x,y,z).  Storage is x-fastest.
///
/// Origin and voxel size are kept in single precision to match the file
/// format, so save/load round-trips are bit-exact.
struct VoxelGrid {
  Vec3f origin = Vec3f::Zero();
  float voxel_size = 0.0f;
  int nx = 0, ny = 0, nz = 0;
  std::vector<float> occupancy;

  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * ny + y) * nx + x;
  }
  const float& at(int x, int y, int z) const { return occupancy[index(x, y, z)]; }
  float& at(int x, int y, int z) { return occupancy[index(x, y, z)]; }
  std::size_t voxel_count() const { return occupancy.size(); }
  bool same_shape(const VoxelGrid& other) const {
    return nx == other.nx && ny == other.ny && nz == other.nz;
  }
  Vec3 voxel_center(int x, int y, int z) const {
    return origin.cast<double>() + static_cast<double>(voxel_size) * Vec3(x, y, z);
  }
};

VoxelGrid make_grid(const Vec3f& origin, float voxel_size, int nx, int ny, int nz,
                    float fill = 0.0f);

/// Binary grid file: magic "PVH1", then little-endian u32 nx, ny, nz,
/// f32 voxel_size, f32 origin xyz, then nx*ny*nz f32 occupancies
/// (x-fastest).  load_grid validates dimensions, payload length, and that
/// every value is a probability in [0, 1].
void save_grid(const VoxelGrid& grid, const std::filesystem::path& path);
VoxelGrid load_grid(const std::filesystem::path& path);

}  // namespace hullforge
