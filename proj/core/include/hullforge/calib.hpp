// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hullforge/geometry.hpp"

namespace hullforge {

/// Calibrated pinhole camera.  `rotation` maps world to camera coordinates,
/// so a world point p lands at rotation * (p - cop) in the camera frame.
/// The camera looks down +z; images are row-major with the origin at the
/// top-left pixel and y growing downwards.
struct CameraCalibration {
  std::string camera_id;
  Mat3 rotation = Mat3::Identity();
  Vec3 cop = Vec3::Zero();  ///< centre of projection, world metres
  double focal_px = 0.0;
  Vec2 optical_center = Vec2::Zero();  ///< principal point, pixels
  int image_width = 0;
  int image_height = 0;
};

/// A set of cameras observing one capture volume.
struct CameraRig {
  std::vector<CameraCalibration> cameras;
  Box3 capture_volume;

  const CameraCalibration& camera(const std::string& id) const;
};

/// World point -> camera-frame point.
inline Vec3 world_to_camera(const CameraCalibration& cam, const Vec3& p) {
  return cam.rotation * (p - cam.cop);
}

/// Projects a world point to pixel coordinates, or nullopt when the point
/// is behind the camera (camera-frame z <= 1e-6) or falls outside the
/// sampling rectangle [0, w-1] x [0, h-1].
std::optional<Vec2> project_point(const CameraCalibration& cam, const Vec3& p);

/// Returns one human-readable message per defect; empty means valid.
/// Checks rotation orthonormality (det +1 within 1e-6), positive focal
/// length, positive image dimensions, a principal point inside the image,
/// unique camera ids, and a non-degenerate capture volume.
std::vector<std::string> validate_rig(const CameraRig& rig);

/// JSON rig files.  load_rig throws Error("io"/"parse"/"validation").
CameraRig load_rig(const std::filesystem::path& path);
void save_rig(const CameraRig& rig, const std::filesystem::path& path);

}  // namespace hullforge
