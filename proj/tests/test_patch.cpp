// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hullforge/errors.hpp"
#include "hullforge/patch.hpp"
#include "hullforge/rng.hpp"

using namespace hullforge;

namespace {

VoxelGrid random_grid(int n, std::uint64_t seed) {
  VoxelGrid grid = make_grid(Vec3f(-1.0f, -1.0f, -1.0f), 2.0f / n, n, n, n);
  Rng rng(seed);
  for (float& v : grid.occupancy) v = static_cast<float>(rng.uniform());
  return grid;
}

float max_abs_diff(const VoxelGrid& a, const VoxelGrid& b) {
  REQUIRE(a.same_shape(b));
  float worst = 0.0f;
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) {
    worst = std::max(worst, std::abs(a.occupancy[i] - b.occupancy[i]));
  }
  return worst;
}

}  // namespace

TEST_SUITE("patch") {
  TEST_CASE("corner positions along one axis") {
    CHECK(patch_corners(64, 32, 32) == std::vector<int>{0, 32});
    CHECK(patch_corners(64, 32, 16) == std::vector<int>{0, 16, 32});
    CHECK(patch_corners(64, 32, 8) == std::vector<int>{0, 8, 16, 24, 32});
    CHECK(patch_corners(64, 16, 8) == std::vector<int>{0, 8, 16, 24, 32, 40, 48});
    // Last window would overrun: clamp it so coverage stays complete.
    CHECK(patch_corners(10, 4, 3) == std::vector<int>{0, 3, 6});
    CHECK(patch_corners(10, 4, 4) == std::vector<int>{0, 4, 6});
    CHECK(patch_corners(8, 8, 8) == std::vector<int>{0});
  }

  TEST_CASE("corner lists always tile the axis") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const int dim = 2 + static_cast<int>(rng.uniform_index(63));
      const int size = 1 + static_cast<int>(rng.uniform_index(dim));
      const int stride = 1 + static_cast<int>(rng.uniform_index(size));
      const auto corners = patch_corners(dim, size, stride);
      REQUIRE(!corners.empty());
      CHECK(corners.front() == 0);
      CHECK(corners.back() == dim - size);
      std::vector<char> covered(dim, 0);
      for (std::size_t i = 0; i < corners.size(); ++i) {
        if (i > 0) CHECK(corners[i] > corners[i - 1]);
        CHECK(corners[i] + size <= dim);
        for (int k = 0; k < size; ++k) covered[corners[i] + k] = 1;
      }
      CHECK(std::count(covered.begin(), covered.end(), 1) == dim);
    }
  }

  TEST_CASE("corner arguments are validated") {
    CHECK_THROWS_AS(patch_corners(8, 16, 8), Error);
    CHECK_THROWS_AS(patch_corners(8, 4, 0), Error);
    CHECK_THROWS_AS(patch_corners(8, 4, 5), Error);
  }

  TEST_CASE("extraction yields the expected window count") {
    const VoxelGrid grid = random_grid(64, 11);
    CHECK(extract_patches(grid, {32, 32}).entries.size() == 8);
    CHECK(extract_patches(grid, {32, 16}).entries.size() == 27);
  }

  TEST_CASE("all-zero windows are dropped") {
    VoxelGrid grid = make_grid(Vec3f::Zero(), 1.0f, 16, 16, 16);
    const PatchSpec spec{8, 8};
    CHECK(extract_patches(grid, spec).entries.empty());

    // One occupied voxel brings back exactly the windows that see it.
    grid.at(3, 3, 3) = 0.7f;
    const PatchSet one = extract_patches(grid, spec);
    REQUIRE(one.entries.size() == 1);
    CHECK(one.entries[0].corner == std::array<int, 3>{0, 0, 0});
    CHECK(one.entries[0].values[(3 * 8 + 3) * 8 + 3] == 0.7f);
  }

  TEST_CASE("extract_patch_at copies the block verbatim") {
    const VoxelGrid grid = random_grid(16, 29);
    const std::array<int, 3> corner{5, 2, 9};
    const Patch p = extract_patch_at(grid, corner, 4);
    CHECK(p.corner == corner);
    REQUIRE(p.values.size() == 64);
    for (int z = 0; z < 4; ++z) {
      for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
          CHECK(p.values[(z * 4 + y) * 4 + x] == grid.at(5 + x, 2 + y, 9 + z));
        }
      }
    }
    CHECK_THROWS_AS(extract_patch_at(grid, {14, 0, 0}, 4), Error);
  }

  TEST_CASE("non-overlapping extraction reassembles exactly") {
    const VoxelGrid grid = random_grid(64, 41);
    const VoxelGrid back = reassemble(extract_patches(grid, {32, 32}));
    CHECK(max_abs_diff(grid, back) == 0.0f);
    CHECK(back.origin == grid.origin);
    CHECK(back.voxel_size == grid.voxel_size);
  }

  TEST_CASE("overlapping extraction reassembles within float rounding") {
    const VoxelGrid grid = random_grid(64, 43);
    for (const PatchSpec spec : {PatchSpec{32, 16}, PatchSpec{32, 8}, PatchSpec{16, 8}}) {
      const VoxelGrid back = reassemble(extract_patches(grid, spec));
      CHECK(max_abs_diff(grid, back) <= 1e-6f);
    }
  }

  TEST_CASE("round trip survives windows dropped as empty") {
    // One occupied corner cluster: only the window at (0,0,0) sees it, the
    // other 26 are dropped and must come back as fill (zero).
    VoxelGrid grid = make_grid(Vec3f::Zero(), 1.0f, 32, 32, 32);
    Rng rng(47);
    for (int z = 0; z < 8; ++z) {
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          grid.at(x, y, z) = static_cast<float>(rng.uniform(0.1, 1.0));
        }
      }
    }
    const PatchSet set = extract_patches(grid, {16, 8});
    CHECK(set.entries.size() == 1);
    const VoxelGrid back = reassemble(set);
    CHECK(max_abs_diff(grid, back) <= 1e-6f);
  }

  TEST_CASE("reassembly is bitwise invariant to entry order") {
    const VoxelGrid grid = random_grid(48, 53);
    PatchSet set = extract_patches(grid, {16, 8});
    const VoxelGrid base = reassemble(set);
    Rng rng(59);
    for (int trial = 0; trial < 5; ++trial) {
      rng.shuffle(set.entries);
      const VoxelGrid shuffled = reassemble(set);
      CHECK(base.occupancy == shuffled.occupancy);
    }
  }

  TEST_CASE("overlap averaging is an unweighted mean") {
    // Two 4-wide patches on an 6-wide axis (stride 2): voxels 2..3 are
    // covered twice.  Hand the reassembler constant patches 0.2 and 0.6 and
    // read back 0.4 in the overlap.
    PatchSet set;
    set.spec = {4, 2};
    set.grid_dims = {6, 4, 4};
    set.grid_origin = Vec3f::Zero();
    set.voxel_size = 1.0f;
    Patch a;
    a.corner = {0, 0, 0};
    a.values.assign(64, 0.2f);
    Patch b;
    b.corner = {2, 0, 0};
    b.values.assign(64, 0.6f);
    set.entries = {a, b};
    const VoxelGrid out = reassemble(set);
    CHECK(out.at(1, 1, 1) == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(out.at(2, 1, 1) == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(out.at(3, 1, 1) == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(out.at(4, 1, 1) == doctest::Approx(0.6).epsilon(1e-6));
  }

  TEST_CASE("reassembly fills uncovered voxels and clamps the mean") {
    PatchSet set;
    set.spec = {2, 2};
    set.grid_dims = {4, 2, 2};
    set.grid_origin = Vec3f::Zero();
    set.voxel_size = 1.0f;
    Patch hot;
    hot.corner = {0, 0, 0};
    hot.values.assign(8, 1.5f);  // From a net output overshooting 1.
    set.entries = {hot};
    const VoxelGrid out = reassemble(set, 0.25f);
    CHECK(out.at(0, 0, 0) == 1.0f);   // Clamped.
    CHECK(out.at(3, 1, 1) == 0.25f);  // Untouched by any patch: fill.
  }

  TEST_CASE("reassembly validates patch placement") {
    PatchSet set;
    set.spec = {4, 4};
    set.grid_dims = {4, 4, 4};
    set.grid_origin = Vec3f::Zero();
    set.voxel_size = 1.0f;
    Patch p;
    p.corner = {2, 0, 0};  // Overruns a 4-wide grid.
    p.values.assign(64, 0.5f);
    set.entries = {p};
    CHECK_THROWS_AS(reassemble(set), Error);

    set.entries[0].corner = {0, 0, 0};
    set.entries[0].values.resize(10);  // Wrong payload size.
    CHECK_THROWS_AS(reassemble(set), Error);
  }
}
