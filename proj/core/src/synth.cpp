// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hullforge/errors.hpp"
#include "hullforge/parallel.hpp"
#include "hullforge/rng.hpp"

namespace hullforge {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

double point_segment_dist_sq(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 e = b - a;
  const double len_sq = e.squaredNorm();
  double s = len_sq > 0.0 ? e.dot(p - a) / len_sq : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * e)).squaredNorm();
}

void capsule_endpoints(const ScenePrimitive& prim, Vec3& a, Vec3& b) {
  const Vec3 axis = prim.orientation.col(2) * prim.dims.y();
  a = prim.center - axis;
  b = prim.center + axis;
}

}  // namespace

bool primitive_contains(const ScenePrimitive& prim, const Vec3& p) {
  switch (prim.kind) {
    case ScenePrimitive::Kind::Sphere:
      return (p - prim.center).squaredNorm() <= prim.dims.x() * prim.dims.x();
    case ScenePrimitive::Kind::Capsule: {
      Vec3 a, b;
      capsule_endpoints(prim, a, b);
      return point_segment_dist_sq(p, a, b) <= prim.dims.x() * prim.dims.x();
    }
    case ScenePrimitive::Kind::Box: {
      const Vec3 local = prim.orientation.transpose() * (p - prim.center);
      return (local.cwiseAbs().array() <= prim.dims.array()).all();
    }
  }
  return false;
}

bool ray_hits_primitive(const ScenePrimitive& prim, const Vec3& origin, const Vec3& dir) {
  switch (prim.kind) {
    case ScenePrimitive::Kind::Sphere: {
      const Vec3 w = prim.center - origin;
      const double t = std::max(0.0, dir.dot(w));
      return (w - t * dir).squaredNorm() <= prim.dims.x() * prim.dims.x();
    }
    case ScenePrimitive::Kind::Capsule: {
      // Closest approach between the ray and the capsule's spine segment.
      Vec3 a, b;
      capsule_endpoints(prim, a, b);
      const Vec3 e = b - a;
      const Vec3 w = origin - a;
      const double ee = e.squaredNorm();
      const double de = dir.dot(e);
      const double dw = dir.dot(w);
      const double denom = ee - de * de;
      double s = denom > 1e-12 ? (e.dot(w) - dw * de) / denom : 0.0;
      s = std::clamp(s, 0.0, 1.0);
      double t = s * de - dw;
      if (t < 0.0) {
        t = 0.0;
        s = ee > 0.0 ? std::clamp(e.dot(w) / ee, 0.0, 1.0) : 0.0;
      }
      const double dist_sq = (w + t * dir - s * e).squaredNorm();
      return dist_sq <= prim.dims.x() * prim.dims.x();
    }
    case ScenePrimitive::Kind::Box: {
      const Vec3 ol = prim.orientation.transpose() * (origin - prim.center);
      const Vec3 dl = prim.orientation.transpose() * dir;
      double tmin = -1e30, tmax = 1e30;
      for (int i = 0; i < 3; ++i) {
        if (std::abs(dl[i]) < 1e-12) {
          if (std::abs(ol[i]) > prim.dims[i]) return false;
          continue;
        }
        double t1 = (-prim.dims[i] - ol[i]) / dl[i];
        double t2 = (prim.dims[i] - ol[i]) / dl[i];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
      }
      return tmax >= std::max(tmin, 0.0);
    }
  }
  return false;
}

int occupancy_oracle(const Scene& scene, const Vec3& p) {
  for (const auto& prim : scene.primitives) {
    if (primitive_contains(prim, p)) return 1;
  }
  return 0;
}

CameraRig make_camera_ring(const RingParams& params) {
  if (params.cameras <= 0) throw Error("config", "ring needs at least one camera");
  if (!(params.radius > 0.0) || !(params.focal_px > 0.0) ||
      !(params.volume_half_extent > 0.0)) {
    throw Error("config", "ring radius, focal length, and volume extent must be positive");
  }
  if (params.image_width < 2 || params.image_height < 2) {
    throw Error("config", "ring image dimensions must be at least 2x2");
  }

  CameraRig rig;
  rig.capture_volume.min = -params.volume_half_extent * Vec3::Ones();
  rig.capture_volume.max = params.volume_half_extent * Vec3::Ones();
  const Vec3 up(0.0, 0.0, 1.0);
  for (int i = 0; i < params.cameras; ++i) {
    const double theta = 2.0 * kPi * i / params.cameras;
    CameraCalibration cam;
    char id[16];
    std::snprintf(id, sizeof id, "cam%02d", i);
    cam.camera_id = id;
    cam.cop = Vec3(params.radius * std::cos(theta), params.radius * std::sin(theta),
                   params.height);
    const Vec3 forward = (-cam.cop).normalized();  // aim at the volume centre
    const Vec3 sideways = forward.cross(up);
    if (sideways.norm() < 1e-9) {
      throw Error("config", "camera looks straight along the vertical axis");
    }
    const Vec3 right = sideways.normalized();
    const Vec3 down = forward.cross(right);
    cam.rotation.row(0) = right;
    cam.rotation.row(1) = down;  // image y grows downwards
    cam.rotation.row(2) = forward;
    cam.focal_px = params.focal_px;
    cam.image_width = params.image_width;
    cam.image_height = params.image_height;
    cam.optical_center = Vec2((params.image_width - 1) / 2.0, (params.image_height - 1) / 2.0);
    rig.cameras.push_back(std::move(cam));
  }
  return rig;
}

SoftMatte render_soft_matte(const Scene& scene, const CameraCalibration& cam, int supersample) {
  if (supersample < 1) throw Error("validation", "supersample must be at least 1");
  SoftMatte matte = make_matte(cam.image_width, cam.image_height);
  const Mat3 cam_to_world = cam.rotation.transpose();
  const double inv_ss = 1.0 / supersample;
  const double inv_count = 1.0 / (supersample * supersample);
  for (int py = 0; py < cam.image_height; ++py) {
    for (int px = 0; px < cam.image_width; ++px) {
      int hits = 0;
      for (int sy = 0; sy < supersample; ++sy) {
        const double y = py + (sy + 0.5) * inv_ss - 0.5;
        for (int sx = 0; sx < supersample; ++sx) {
          const double x = px + (sx + 0.5) * inv_ss - 0.5;
          const Vec3 dir_cam((x - cam.optical_center.x()) / cam.focal_px,
                             (y - cam.optical_center.y()) / cam.focal_px, 1.0);
          const Vec3 dir = (cam_to_world * dir_cam).normalized();
          for (const auto& prim : scene.primitives) {
            if (ray_hits_primitive(prim, cam.cop, dir)) {
              ++hits;
              break;
            }
          }
        }
      }
      matte.at(px, py) = static_cast<float>(hits * inv_count);
    }
  }
  return matte;
}

namespace {

ScenePrimitive capsule_from(const Vec3& attach, const Vec3& dir, double radius,
                            double half_length) {
  ScenePrimitive prim;
  prim.kind = ScenePrimitive::Kind::Capsule;
  prim.orientation =
      Eigen::Quaterniond::FromTwoVectors(Vec3(0, 0, 1), dir).toRotationMatrix();
  prim.center = attach + dir * half_length;
  prim.dims = Vec3(radius, half_length, 0.0);
  return prim;
}

Vec3 random_unit(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vec3(s * std::cos(phi), s * std::sin(phi), z);
}

// One upright figure: torso box, head sphere, two arm and two leg capsules,
// re-posed per frame by joint angles, whole-body yaw, and head bob.  All
// proportions keep the figure inside the +-0.9 m core of the volume.
Scene humanoid_scene(Rng fam, Rng fr) {
  const double torso_hx = 0.11 + fam.uniform(-0.03, 0.03);
  const double torso_hy = 0.07 + fam.uniform(-0.02, 0.02);
  const double torso_hz = 0.24 + fam.uniform(-0.04, 0.04);
  const double head_r = 0.09 + fam.uniform(-0.015, 0.015);
  const double arm_r = 0.04 + fam.uniform(-0.008, 0.008);
  const double arm_hl = 0.26 + fam.uniform(-0.04, 0.04);
  const double leg_r = 0.055 + fam.uniform(-0.01, 0.01);
  const double leg_hl = 0.36 + fam.uniform(-0.04, 0.04);
  const double torso_z = 0.30;

  const double yaw = fr.uniform(0.0, 2.0 * kPi);
  const double abduct_l = fr.uniform(10.0, 75.0) * kPi / 180.0;
  const double abduct_r = fr.uniform(10.0, 75.0) * kPi / 180.0;
  const double swing_l = fr.uniform(-25.0, 25.0) * kPi / 180.0;
  const double swing_r = fr.uniform(-25.0, 25.0) * kPi / 180.0;
  const double step_l = fr.uniform(-18.0, 18.0) * kPi / 180.0;
  const double step_r = fr.uniform(-18.0, 18.0) * kPi / 180.0;
  const double bob = fr.uniform(-0.02, 0.02);

  Scene scene;
  ScenePrimitive torso;
  torso.kind = ScenePrimitive::Kind::Box;
  torso.center = Vec3(0, 0, torso_z);
  torso.dims = Vec3(torso_hx, torso_hy, torso_hz);
  scene.primitives.push_back(torso);

  ScenePrimitive head;
  head.kind = ScenePrimitive::Kind::Sphere;
  head.center = Vec3(0, 0, torso_z + torso_hz + 0.04 + head_r + bob);
  head.dims = Vec3(head_r, 0, 0);
  scene.primitives.push_back(head);

  const Vec3 down(0, 0, -1);
  const Vec3 shoulder_l(torso_hx + 0.5 * arm_r, 0, torso_z + torso_hz - arm_r);
  const Vec3 shoulder_r(-(torso_hx + 0.5 * arm_r), 0, torso_z + torso_hz - arm_r);
  const Vec3 arm_dir_l = axis_angle(Vec3::UnitX(), swing_l) * axis_angle(Vec3::UnitY(), -abduct_l) * down;
  const Vec3 arm_dir_r = axis_angle(Vec3::UnitX(), swing_r) * axis_angle(Vec3::UnitY(), abduct_r) * down;
  scene.primitives.push_back(capsule_from(shoulder_l, arm_dir_l, arm_r, arm_hl));
  scene.primitives.push_back(capsule_from(shoulder_r, arm_dir_r, arm_r, arm_hl));

  const Vec3 hip_l(0.07, 0, 0);
  const Vec3 hip_r(-0.07, 0, 0);
  const Vec3 leg_dir_l = axis_angle(Vec3::UnitX(), step_l) * axis_angle(Vec3::UnitY(), -5.0 * kPi / 180.0) * down;
  const Vec3 leg_dir_r = axis_angle(Vec3::UnitX(), step_r) * axis_angle(Vec3::UnitY(), 5.0 * kPi / 180.0) * down;
  scene.primitives.push_back(capsule_from(hip_l, leg_dir_l, leg_r, leg_hl));
  scene.primitives.push_back(capsule_from(hip_r, leg_dir_r, leg_r, leg_hl));

  const Mat3 spin = axis_angle(Vec3::UnitZ(), yaw);
  for (auto& prim : scene.primitives) {
    prim.center = spin * prim.center;
    prim.orientation = spin * prim.orientation;
  }
  return scene;
}

// Loose pile of random primitives, jittered per frame.
Scene cluster_scene(Rng fam, Rng fr) {
  const int count = 3 + static_cast<int>(fam.uniform_index(5));
  Scene scene;
  for (int i = 0; i < count; ++i) {
    ScenePrimitive prim;
    const auto kind = fam.uniform_index(3);
    prim.center = Vec3(fam.uniform(-0.45, 0.45), fam.uniform(-0.45, 0.45),
                       fam.uniform(-0.45, 0.45));
    prim.orientation = axis_angle(random_unit(fam), fam.uniform(0.0, kPi));
    if (kind == 0) {
      prim.kind = ScenePrimitive::Kind::Sphere;
      prim.dims = Vec3(fam.uniform(0.08, 0.25), 0, 0);
    } else if (kind == 1) {
      prim.kind = ScenePrimitive::Kind::Capsule;
      prim.dims = Vec3(fam.uniform(0.04, 0.12), fam.uniform(0.10, 0.30), 0);
    } else {
      prim.kind = ScenePrimitive::Kind::Box;
      prim.dims = Vec3(fam.uniform(0.06, 0.22), fam.uniform(0.06, 0.22),
                       fam.uniform(0.06, 0.22));
    }
    prim.center += Vec3(fr.uniform(-0.05, 0.05), fr.uniform(-0.05, 0.05),
                        fr.uniform(-0.05, 0.05));
    prim.orientation = axis_angle(random_unit(fr), fr.uniform(0.0, 10.0 * kPi / 180.0)) *
                       prim.orientation;
    scene.primitives.push_back(prim);
  }
  return scene;
}

std::string matte_file_name(int frame, const std::string& camera_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d_", frame);
  return std::string(buf) + camera_id + ".pgm";
}

}  // namespace

Scene make_family_scene(const DatasetParams& params, int family, int frame_in_family) {
  const Rng root(params.seed);
  // Family traits and frame pose draw from independent streams, so frame k
  // of family j is reproducible in isolation.
  const Rng fam = root.fork(1000003ull * (family + 1));
  const Rng fr = root.fork(1000003ull * (family + 1) + frame_in_family + 1);
  if (params.scene_kind == "humanoid") return humanoid_scene(fam, fr);
  if (params.scene_kind == "cluster") return cluster_scene(fam, fr);
  throw Error("config", "unknown scene kind '" + params.scene_kind +
                            "' (expected humanoid or cluster)");
}

DatasetManifest generate_dataset(const DatasetParams& params, const CameraRig& rig,
                                 const std::filesystem::path& out_dir, unsigned threads) {
  if (params.frames <= 0) throw Error("validation", "dataset needs at least one frame");
  if (params.frames_per_family <= 0) {
    throw Error("validation", "frames_per_family must be positive");
  }
  if (!(params.train_fraction >= 0.0 && params.train_fraction <= 1.0)) {
    throw Error("validation", "train_fraction must lie in [0,1]");
  }
  const auto defects = validate_rig(rig);
  if (!defects.empty()) throw Error("validation", "rig is invalid: " + defects.front());

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "mattes", ec);
  if (ec) throw Error("io", "cannot create dataset directory " + out_dir.string());

  const int families = (params.frames + params.frames_per_family - 1) / params.frames_per_family;
  const int train_families = std::clamp(
      static_cast<int>(std::lround(families * params.train_fraction)), 0, families);

  DatasetManifest manifest;
  manifest.seed = params.seed;
  manifest.scene_kind = params.scene_kind;
  manifest.frames_per_family = params.frames_per_family;
  manifest.supersample = params.supersample;
  manifest.image_width = rig.cameras.front().image_width;
  manifest.image_height = rig.cameras.front().image_height;
  manifest.rig_path = "rig.json";
  for (const auto& cam : rig.cameras) manifest.cameras.push_back(cam.camera_id);

  std::vector<Scene> scenes(params.frames);
  for (int f = 0; f < params.frames; ++f) {
    const int family = f / params.frames_per_family;
    scenes[f] = make_family_scene(params, family, f % params.frames_per_family);
    ManifestFrame mf;
    mf.frame = f;
    mf.family = family;
    mf.split = family < train_families ? "train" : "test";
    for (const auto& cam : rig.cameras) {
      mf.mattes.emplace_back(cam.camera_id, "mattes/" + matte_file_name(f, cam.camera_id));
    }
    manifest.frames.push_back(std::move(mf));
  }

  const std::size_t tasks = static_cast<std::size_t>(params.frames) * rig.cameras.size();
  parallel_for_chunks(tasks, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t task = begin; task < end; ++task) {
      const int f = static_cast<int>(task / rig.cameras.size());
      const auto& cam = rig.cameras[task % rig.cameras.size()];
      const SoftMatte matte = render_soft_matte(scenes[f], cam, params.supersample);
      save_matte(matte, out_dir / "mattes" / matte_file_name(f, cam.camera_id));
    }
  });

  save_rig(rig, out_dir / "rig.json");
  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("parse", "manifest " + path.string() + ": " + e.what());
  }

  DatasetManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.scene_kind = j.at("scene_kind").get<std::string>();
    m.frames_per_family = j.at("frames_per_family").get<int>();
    m.supersample = j.at("supersample").get<int>();
    m.image_width = j.at("image_width").get<int>();
    m.image_height = j.at("image_height").get<int>();
    m.rig_path = j.at("rig").get<std::string>();
    for (const auto& c : j.at("cameras")) m.cameras.push_back(c.get<std::string>());
    for (const auto& jf : j.at("frames")) {
      ManifestFrame mf;
      mf.frame = jf.at("frame").get<int>();
      mf.family = jf.at("family").get<int>();
      mf.split = jf.at("split").get<std::string>();
      if (mf.split != "train" && mf.split != "test") {
        throw Error("validation", "manifest " + path.string() + ": bad split '" + mf.split + "'");
      }
      const json& mm = jf.at("mattes");
      for (auto it = mm.begin(); it != mm.end(); ++it) {
        mf.mattes.emplace_back(it.key(), it.value().get<std::string>());
      }
      std::sort(mf.mattes.begin(), mf.mattes.end());
      m.frames.push_back(std::move(mf));
    }
  } catch (const json::exception& e) {
    throw Error("parse", "manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  json j;
  j["seed"] = manifest.seed;
  j["scene_kind"] = manifest.scene_kind;
  j["frames_per_family"] = manifest.frames_per_family;
  j["supersample"] = manifest.supersample;
  j["image_width"] = manifest.image_width;
  j["image_height"] = manifest.image_height;
  j["rig"] = manifest.rig_path;
  j["cameras"] = manifest.cameras;
  json frames = json::array();
  for (const auto& mf : manifest.frames) {
    json mm;
    for (const auto& [cam, file] : mf.mattes) mm[cam] = file;
    frames.push_back(
        {{"frame", mf.frame}, {"family", mf.family}, {"split", mf.split}, {"mattes", mm}});
  }
  j["frames"] = std::move(frames);

  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error("io", "short write to manifest " + path.string());
}

}  // namespace hullforge
