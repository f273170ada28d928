// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "hullforge/errors.hpp"
#include "hullforge/metrics.hpp"
#include "hullforge/rng.hpp"
#include "hullforge/synth.hpp"

using namespace hullforge;

namespace {

std::filesystem::path temp_dir(const char* leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "hullforge_tests" / leaf;
  std::filesystem::create_directories(dir);
  return dir;
}

VoxelGrid random_grid(int n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  VoxelGrid grid = make_grid(Vec3f::Zero(), 1.0f, n, n, n);
  Rng rng(seed);
  for (float& v : grid.occupancy) v = static_cast<float>(rng.uniform(lo, hi));
  return grid;
}

SoftMatte random_matte(int w, int h, std::uint64_t seed) {
  SoftMatte m = make_matte(w, h);
  Rng rng(seed);
  for (float& v : m.values) v = static_cast<float>(rng.uniform());
  return m;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("voxel mse computes the plain mean of squares") {
    VoxelGrid a = make_grid(Vec3f::Zero(), 1.0f, 2, 1, 1);
    VoxelGrid b = a;
    a.occupancy = {0.5f, 0.0f};
    b.occupancy = {0.25f, 0.0f};
    CHECK(voxel_mse(a, b) == doctest::Approx(0.03125).epsilon(1e-12));
  }

  TEST_CASE("voxel mse is symmetric and zero only on equality") {
    const VoxelGrid a = random_grid(8, 1);
    const VoxelGrid b = random_grid(8, 2);
    CHECK(voxel_mse(a, b) == voxel_mse(b, a));
    CHECK(voxel_mse(a, a) == 0.0);
    CHECK(voxel_mse(a, b) > 0.0);

    const VoxelGrid small = random_grid(4, 3);
    CHECK_THROWS_AS(voxel_mse(a, small), Error);
  }

  TEST_CASE("psnr reference points") {
    CHECK(psnr_from_mse(1.0) == doctest::Approx(0.0));
    CHECK(psnr_from_mse(0.01) == doctest::Approx(20.0));
    CHECK(psnr_from_mse(0.0) == std::numeric_limits<double>::infinity());
    const VoxelGrid a = random_grid(8, 5);
    CHECK(voxel_psnr(a, a) == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("psnr decreases as noise grows") {
    const VoxelGrid clean = random_grid(12, 7, 0.0, 0.5);
    double prev = std::numeric_limits<double>::infinity();
    for (int level = 1; level <= 10; ++level) {
      VoxelGrid noisy = clean;
      // Shift keeps everything inside [0,1], so mse grows strictly.
      for (float& v : noisy.occupancy) v += 0.03f * static_cast<float>(level);
      const double p = voxel_psnr(clean, noisy);
      CHECK(p < prev);
      prev = p;
    }
  }

  TEST_CASE("ssim of an image with itself is exactly one") {
    const SoftMatte m = random_matte(24, 18, 11);
    CHECK(image_ssim(m, m) == 1.0);
  }

  TEST_CASE("ssim is symmetric bit for bit") {
    const SoftMatte a = random_matte(20, 16, 13);
    const SoftMatte b = random_matte(20, 16, 17);
    CHECK(image_ssim(a, b) == image_ssim(b, a));
  }

  TEST_CASE("ssim degrades under noise and dips negative on inversion") {
    const SoftMatte a = random_matte(24, 24, 19);
    SoftMatte noisy = a;
    Rng rng(23);
    for (float& v : noisy.values) {
      v = std::clamp(v + static_cast<float>(rng.uniform(-0.2, 0.2)), 0.0f, 1.0f);
    }
    const double degraded = image_ssim(a, noisy);
    CHECK(degraded < 1.0);
    CHECK(degraded > 0.0);

    SoftMatte checker = make_matte(16, 16);
    SoftMatte inverse = make_matte(16, 16);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        const float v = (x + y) % 2 == 0 ? 1.0f : 0.0f;
        checker.at(x, y) = v;
        inverse.at(x, y) = 1.0f - v;
      }
    }
    CHECK(image_ssim(checker, inverse) < 0.0);
  }

  TEST_CASE("ssim validates shapes and sizes") {
    const SoftMatte a = random_matte(20, 16, 29);
    const SoftMatte b = random_matte(16, 20, 31);
    CHECK_THROWS_AS(image_ssim(a, b), Error);
    const SoftMatte tiny = random_matte(10, 16, 37);
    CHECK_THROWS_AS(image_ssim(tiny, tiny), Error);
  }

  TEST_CASE("binary iou on hand-built mattes") {
    SoftMatte a = make_matte(4, 1);
    SoftMatte b = make_matte(4, 1);
    a.values = {1.0f, 1.0f, 0.0f, 0.0f};
    b.values = {1.0f, 0.0f, 1.0f, 0.0f};
    CHECK(binary_iou(a, b) == doctest::Approx(1.0 / 3.0));
    CHECK(binary_iou(a, a) == 1.0);

    const SoftMatte empty = make_matte(4, 1);
    CHECK(binary_iou(empty, empty) == 1.0);
    CHECK(binary_iou(a, empty) == 0.0);
  }

  TEST_CASE("reprojecting an empty grid gives an empty silhouette") {
    const VoxelGrid grid = make_grid(Vec3f(-1.0f, -1.0f, -1.0f), 0.25f, 8, 8, 8);
    RingParams ring;
    ring.cameras = 1;
    const CameraRig rig = make_camera_ring(ring);
    const SoftMatte sil = reproject_silhouette(grid, rig.cameras[0], 0.5);
    for (const float v : sil.values) CHECK(v == 0.0f);

    // Iso above the occupancy maximum: nothing reaches it.
    VoxelGrid half = grid;
    std::fill(half.occupancy.begin(), half.occupancy.end(), 0.4f);
    const SoftMatte none = reproject_silhouette(half, rig.cameras[0], 0.5);
    for (const float v : none.values) CHECK(v == 0.0f);
  }

  TEST_CASE("reprojected sphere overlaps the rendered silhouette") {
    // An exact occupancy grid of a sphere, reprojected through a real
    // camera, must line up with the analytic rendering of the same sphere
    // to within the voxel staircase.
    const double radius = 0.8;
    RingParams ring;
    ring.cameras = 1;
    const CameraRig rig = make_camera_ring(ring);
    const CameraCalibration& cam = rig.cameras[0];

    ScenePrimitive p;
    p.kind = ScenePrimitive::Kind::Sphere;
    p.center = Vec3(0, 0, 0);
    p.dims = Vec3(radius, 0, 0);
    Scene scene;
    scene.primitives.push_back(p);

    const int n = 128;
    const float voxel = 2.5f / n;
    const float half = voxel * 0.5f;
    VoxelGrid grid =
        make_grid(Vec3f(-1.25f + half, -1.25f + half, -1.25f + half), voxel, n, n, n);
    for (int z = 0; z < n; ++z) {
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          grid.at(x, y, z) = occupancy_oracle(scene, grid.voxel_center(x, y, z)) ? 1.0f : 0.0f;
        }
      }
    }

    const SoftMatte reprojected = reproject_silhouette(grid, cam, 0.5);
    const SoftMatte rendered = render_soft_matte(scene, cam, 1);
    const double iou = binary_iou(reprojected, rendered);
    INFO("iou " << iou);
    CHECK(iou >= 0.95);
  }

  TEST_CASE("reports round trip through json") {
    const auto dir = temp_dir("metrics_report");
    EvalReport report;
    EvalRow input;
    input.label = "input";
    input.mse = 24.6e-3;
    input.psnr = psnr_from_mse(input.mse);
    report.rows.push_back(input);

    EvalRow refined;
    refined.label = "refined";
    refined.mse = 0.0;
    refined.psnr = std::numeric_limits<double>::infinity();
    refined.silhouette_psnr = 31.25;
    refined.silhouette_ssim = 0.925;
    refined.silhouette_iou = 0.75;
    report.rows.push_back(refined);

    report.context["frames"] = "40";
    report.context["split"] = "test";

    const auto path = dir / "eval.json";
    save_report(report, path);
    const EvalReport back = load_report(path);

    REQUIRE(back.rows.size() == 2);
    const EvalRow* in_row = back.find("input");
    REQUIRE(in_row != nullptr);
    CHECK(in_row->mse == input.mse);
    CHECK(in_row->psnr == input.psnr);
    CHECK(!in_row->silhouette_ssim.has_value());

    const EvalRow* ref_row = back.find("refined");
    REQUIRE(ref_row != nullptr);
    CHECK(ref_row->psnr == std::numeric_limits<double>::infinity());
    CHECK(ref_row->silhouette_psnr == 31.25);
    CHECK(ref_row->silhouette_ssim == 0.925);
    CHECK(ref_row->silhouette_iou == 0.75);
    CHECK(back.context.at("frames") == "40");
    CHECK(back.find("missing") == nullptr);
  }

  TEST_CASE("report loader rejects malformed files") {
    const auto dir = temp_dir("metrics_report_bad");
    {
      std::ofstream out(dir / "bad.json");
      out << "{ not json";
    }
    CHECK_THROWS_AS(load_report(dir / "bad.json"), Error);
    CHECK_THROWS_AS(load_report(dir / "missing.json"), Error);
  }

  TEST_CASE("published reference constants keep their published values") {
    CHECK(kReferenceInputMse == 24.6e-3);
    CHECK(kReferenceRefinedMse == 7.71e-3);
    CHECK(psnr_from_mse(kReferenceRefinedMse) > psnr_from_mse(kReferenceInputMse));
  }
}
