// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hullforge/calib.hpp"
#include "hullforge/matte.hpp"

namespace hullforge {

/// Solid primitive in world space.  `dims` depends on the kind:
///   Sphere:  (radius, -, -)
///   Capsule: (radius, half_length, -), axis along local z
///   Box:     half-extents
struct ScenePrimitive {
  enum class Kind { Sphere, Capsule, Box };
  Kind kind = Kind::Sphere;
  Vec3 center = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();  ///< local -> world
  Vec3 dims = Vec3::Zero();
};

struct Scene {
  std::vector<ScenePrimitive> primitives;
};

bool primitive_contains(const ScenePrimitive& prim, const Vec3& p);

/// True when the ray origin + t*dir (t >= 0, dir unit length) meets the
/// solid.  Boundary grazes count as hits.
bool ray_hits_primitive(const ScenePrimitive& prim, const Vec3& origin, const Vec3& dir);

/// Ground-truth occupancy at a world point: 1 inside any primitive, else 0.
int occupancy_oracle(const Scene& scene, const Vec3& p);

/// Horizontal ring of inward-looking cameras around the origin, ids
/// "cam00", "cam01", ...  Camera i sits at azimuth 2*pi*i/count and aims at
/// the capture volume centre, so the centre projects to the principal
/// point.  The capture volume is the cube of the given half extent.
struct RingParams {
  int cameras = 8;
  double radius = 2.2;
  double height = 0.0;
  int image_width = 160;
  int image_height = 120;
  double focal_px = 80.0;
  double volume_half_extent = 1.25;
};
CameraRig make_camera_ring(const RingParams& params);

/// Renders the scene's silhouette into one camera.  Each pixel casts
/// supersample^2 jitter-free subrays on a regular grid; the matte value is
/// the hit fraction, so edges come out soft.  supersample = 1 samples the
/// pixel centre only.
SoftMatte render_soft_matte(const Scene& scene, const CameraCalibration& cam, int supersample);

/// A dataset is a list of frames grouped into scene families: one body
/// shape (or primitive cluster) per family, re-posed every frame.  Families
/// are split whole into train or test, so the splits never share a shape.
struct DatasetParams {
  std::string scene_kind = "humanoid";  ///< "humanoid" or "cluster"
  int frames = 240;
  int frames_per_family = 20;
  double train_fraction = 5.0 / 6.0;
  int supersample = 4;
  std::uint64_t seed = 1;
};

/// Deterministic scene for (family, frame): same params give the same
/// geometry on every platform and thread count.
Scene make_family_scene(const DatasetParams& params, int family, int frame_in_family);

struct ManifestFrame {
  int frame = 0;
  int family = 0;
  std::string split;  ///< "train" or "test"
  /// (camera id, matte path relative to the manifest) sorted by camera id.
  std::vector<std::pair<std::string, std::string>> mattes;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::string scene_kind;
  int frames_per_family = 0;
  int supersample = 0;
  int image_width = 0;
  int image_height = 0;
  std::string rig_path;  ///< relative to the manifest
  std::vector<std::string> cameras;
  std::vector<ManifestFrame> frames;
};

/// Renders every frame of every camera into out_dir/mattes, writes
/// out_dir/rig.json and out_dir/manifest.json, and returns the manifest.
/// Re-running with the same inputs reproduces every output byte.
DatasetManifest generate_dataset(const DatasetParams& params, const CameraRig& rig,
                                 const std::filesystem::path& out_dir, unsigned threads = 1);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace hullforge
