// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/patch.hpp"

#include <algorithm>
#include <numeric>

#include "hullforge/errors.hpp"

namespace hullforge {

namespace {

void check_spec(const PatchSpec& spec, const std::array<int, 3>& dims) {
  if (spec.size <= 0) throw Error("validation", "patch size must be positive");
  if (spec.stride < 1 || spec.stride > spec.size) {
    throw Error("validation", "patch stride must lie in [1, size]");
  }
  for (const int d : dims) {
    if (spec.size > d) {
      throw Error("validation", "patch size exceeds a grid dimension");
    }
  }
}

}  // namespace

std::vector<int> patch_corners(int dim, int size, int stride) {
  if (size <= 0 || size > dim) throw Error("validation", "patch size must lie in [1, dim]");
  if (stride < 1 || stride > size) throw Error("validation", "patch stride must lie in [1, size]");
  std::vector<int> corners;
  for (int c = 0; c <= dim - size; c += stride) corners.push_back(c);
  if (corners.back() != dim - size) corners.push_back(dim - size);
  return corners;
}

Patch extract_patch_at(const VoxelGrid& grid, const std::array<int, 3>& corner, int size) {
  for (int i = 0; i < 3; ++i) {
    const int dim = i == 0 ? grid.nx : (i == 1 ? grid.ny : grid.nz);
    if (corner[i] < 0 || corner[i] + size > dim) {
      throw Error("validation", "patch window falls outside the grid");
    }
  }
  Patch patch;
  patch.corner = corner;
  patch.values.resize(static_cast<std::size_t>(size) * size * size);
  float* dst = patch.values.data();
  for (int z = 0; z < size; ++z) {
    for (int y = 0; y < size; ++y) {
      const float* src = grid.occupancy.data() + grid.index(corner[0], corner[1] + y, corner[2] + z);
      std::copy(src, src + size, dst);
      dst += size;
    }
  }
  return patch;
}

PatchSet extract_patches(const VoxelGrid& grid, const PatchSpec& spec) {
  PatchSet set;
  set.spec = spec;
  set.grid_dims = {grid.nx, grid.ny, grid.nz};
  set.grid_origin = grid.origin;
  set.voxel_size = grid.voxel_size;
  check_spec(spec, set.grid_dims);

  const auto xs = patch_corners(grid.nx, spec.size, spec.stride);
  const auto ys = patch_corners(grid.ny, spec.size, spec.stride);
  const auto zs = patch_corners(grid.nz, spec.size, spec.stride);
  for (const int z : zs) {
    for (const int y : ys) {
      for (const int x : xs) {
        Patch patch = extract_patch_at(grid, {x, y, z}, spec.size);
        const bool empty =
            std::all_of(patch.values.begin(), patch.values.end(), [](float v) { return v == 0.0f; });
        if (!empty) set.entries.push_back(std::move(patch));
      }
    }
  }
  return set;
}

VoxelGrid reassemble(const PatchSet& patches, float fill) {
  const auto& dims = patches.grid_dims;
  check_spec(patches.spec, dims);
  const int size = patches.spec.size;
  const std::size_t patch_len = static_cast<std::size_t>(size) * size * size;

  VoxelGrid grid = make_grid(patches.grid_origin, patches.voxel_size, dims[0], dims[1], dims[2]);
  std::vector<double> sums(grid.voxel_count(), 0.0);
  std::vector<std::uint32_t> counts(grid.voxel_count(), 0);

  // Visit entries in sorted corner order so overlapping sums accumulate the
  // same way no matter how the caller ordered the set.
  std::vector<std::size_t> order(patches.entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = patches.entries[a].corner;
    const auto& cb = patches.entries[b].corner;
    return std::tie(ca[2], ca[1], ca[0]) < std::tie(cb[2], cb[1], cb[0]);
  });

  for (const std::size_t idx : order) {
    const Patch& patch = patches.entries[idx];
    if (patch.values.size() != patch_len) {
      throw Error("validation", "patch payload does not match the window size");
    }
    for (int i = 0; i < 3; ++i) {
      if (patch.corner[i] < 0 || patch.corner[i] + size > dims[i]) {
        throw Error("validation", "patch corner falls outside the grid");
      }
    }
    const float* src = patch.values.data();
    for (int z = 0; z < size; ++z) {
      for (int y = 0; y < size; ++y) {
        const std::size_t base = grid.index(patch.corner[0], patch.corner[1] + y, patch.corner[2] + z);
        for (int x = 0; x < size; ++x) {
          sums[base + x] += static_cast<double>(src[x]);
          ++counts[base + x];
        }
        src += size;
      }
    }
  }

  for (std::size_t i = 0; i < grid.voxel_count(); ++i) {
    float v = counts[i] > 0 ? static_cast<float>(sums[i] / counts[i]) : fill;
    grid.occupancy[i] = std::clamp(v, 0.0f, 1.0f);
  }
  return grid;
}

}  // namespace hullforge
