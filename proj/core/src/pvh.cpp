// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/pvh.hpp"

#include <algorithm>
#include <cmath>

#include "hullforge/errors.hpp"
#include "hullforge/parallel.hpp"

namespace hullforge {

FusionMode fusion_mode_from_string(const std::string& name) {
  if (name == "paper_literal") return FusionMode::PaperLiteral;
  if (name == "calibrated_sigmoid") return FusionMode::CalibratedSigmoid;
  if (name == "product") return FusionMode::Product;
  throw Error("config", "unknown fusion mode '" + name +
                            "' (expected paper_literal, calibrated_sigmoid, or product)");
}

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::PaperLiteral: return "paper_literal";
    case FusionMode::CalibratedSigmoid: return "calibrated_sigmoid";
    case FusionMode::Product: return "product";
  }
  return "?";
}

namespace {

double fusion_factor(double p, FusionMode mode) {
  switch (mode) {
    case FusionMode::PaperLiteral:
      return 1.0 / (1.0 + std::exp(p));
    case FusionMode::CalibratedSigmoid:
      // Sharpened sigmoid, scaled so p = 1 maps to a factor of exactly 1:
      // both numerator and denominator evaluate exp(-5) there.
      return (1.0 + std::exp(-5.0)) / (1.0 + std::exp(-10.0 * (p - 0.5)));
    case FusionMode::Product:
      return p;
  }
  return 0.0;
}

}  // namespace

double fuse_views(std::span<const double> per_view, FusionMode mode) {
  if (per_view.empty()) throw Error("validation", "fuse_views needs at least one view");
  // Multiply in sorted order so the result is bitwise invariant under any
  // permutation of the cameras.
  double sorted[64];
  std::vector<double> heap;
  std::span<double> probs;
  if (per_view.size() <= 64) {
    std::copy(per_view.begin(), per_view.end(), sorted);
    probs = std::span<double>(sorted, per_view.size());
  } else {
    heap.assign(per_view.begin(), per_view.end());
    probs = heap;
  }
  std::sort(probs.begin(), probs.end());
  if (!(probs.front() >= 0.0 && probs.back() <= 1.0)) {
    throw Error("validation", "per-view probabilities must lie in [0,1]");
  }
  double acc = 1.0;
  for (const double p : probs) acc *= fusion_factor(p, mode);
  if (acc < 0.0) acc = 0.0;
  if (acc > 1.0) acc = 1.0;
  return acc;
}

double per_view_probability(const CameraCalibration& cam, const SoftMatte& matte, const Vec3& p) {
  const auto px = project_point(cam, p);
  if (!px) return 0.0;
  return sample_matte(matte, px->x(), px->y());
}

GridSpec GridSpec::covering(const Box3& box, int dims) {
  if (dims <= 0) throw Error("config", "grid dimension must be positive");
  const Vec3 ext = box.extent();
  if (!(ext.minCoeff() > 0.0)) throw Error("config", "capture volume is degenerate");
  const double size = ext.x() / dims;
  if (std::abs(ext.y() / dims - size) > 1e-9 * size ||
      std::abs(ext.z() / dims - size) > 1e-9 * size) {
    throw Error("config", "capture volume must be a cube to derive cubic voxels");
  }
  GridSpec spec;
  spec.voxel_size = static_cast<float>(size);
  spec.origin = (box.min + 0.5 * size * Vec3::Ones()).cast<float>();
  spec.nx = spec.ny = spec.nz = dims;
  return spec;
}

VoxelGrid compute_pvh(const std::vector<CameraCalibration>& cameras,
                      const std::vector<SoftMatte>& mattes, const GridSpec& spec,
                      FusionMode mode, unsigned threads) {
  if (cameras.empty()) throw Error("validation", "hull needs at least one camera");
  if (cameras.size() != mattes.size()) {
    throw Error("validation", "camera and matte counts differ");
  }
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    if (mattes[c].width != cameras[c].image_width ||
        mattes[c].height != cameras[c].image_height) {
      throw Error("validation",
                  "matte size does not match camera '" + cameras[c].camera_id + "'");
    }
  }

  VoxelGrid grid = make_grid(spec.origin, spec.voxel_size, spec.nx, spec.ny, spec.nz);
  const std::size_t n_cams = cameras.size();
  const double h = spec.voxel_size;

  // Each worker owns a contiguous range of z slabs, so writes never overlap
  // and per-voxel results are identical under any worker count.
  parallel_for_chunks(static_cast<std::size_t>(spec.nz), threads, [&](std::size_t z0, std::size_t z1) {
    std::vector<Vec3> row_start(n_cams);  // camera-frame point at x = 0 of the row
    std::vector<Vec3> x_step(n_cams);     // camera-frame delta for x -> x+1
    std::vector<double> probs(n_cams);
    for (std::size_t c = 0; c < n_cams; ++c) {
      x_step[c] = h * cameras[c].rotation.col(0);
    }
    for (std::size_t z = z0; z < z1; ++z) {
      for (int y = 0; y < spec.ny; ++y) {
        const Vec3 p0 = grid.voxel_center(0, y, static_cast<int>(z));
        for (std::size_t c = 0; c < n_cams; ++c) {
          row_start[c] = world_to_camera(cameras[c], p0);
        }
        float* out = &grid.at(0, y, static_cast<int>(z));
        for (int x = 0; x < spec.nx; ++x) {
          for (std::size_t c = 0; c < n_cams; ++c) {
            const CameraCalibration& cam = cameras[c];
            const Vec3 v = row_start[c] + static_cast<double>(x) * x_step[c];
            double p = 0.0;
            if (v.z() > 1e-6) {
              const double px = cam.focal_px * v.x() / v.z() + cam.optical_center.x();
              const double py = cam.focal_px * v.y() / v.z() + cam.optical_center.y();
              if (px >= 0.0 && px <= cam.image_width - 1 && py >= 0.0 &&
                  py <= cam.image_height - 1) {
                p = sample_matte(mattes[c], px, py);
              }
            }
            probs[c] = p;
          }
          out[x] = static_cast<float>(fuse_views(probs, mode));
        }
      }
    }
  });
  return grid;
}

}  // namespace hullforge
