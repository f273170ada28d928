// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/calib.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hullforge/errors.hpp"

namespace hullforge {

using nlohmann::json;

const CameraCalibration& CameraRig::camera(const std::string& id) const {
  for (const auto& cam : cameras) {
    if (cam.camera_id == id) return cam;
  }
  throw Error("validation", "no camera with id '" + id + "' in rig");
}

std::optional<Vec2> project_point(const CameraCalibration& cam, const Vec3& p) {
  const Vec3 v = world_to_camera(cam, p);
  if (v.z() <= 1e-6) return std::nullopt;
  const double x = cam.focal_px * v.x() / v.z() + cam.optical_center.x();
  const double y = cam.focal_px * v.y() / v.z() + cam.optical_center.y();
  if (x < 0.0 || x > cam.image_width - 1 || y < 0.0 || y > cam.image_height - 1) {
    return std::nullopt;
  }
  return Vec2(x, y);
}

namespace {

void validate_camera(const CameraCalibration& cam, std::vector<std::string>& out) {
  const std::string tag = "camera '" + cam.camera_id + "': ";
  const Mat3 rtr = cam.rotation.transpose() * cam.rotation;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    out.push_back(tag + "rotation is not orthonormal");
  } else if (std::abs(cam.rotation.determinant() - 1.0) > 1e-6) {
    out.push_back(tag + "rotation determinant is not +1");
  }
  if (!(cam.focal_px > 0.0)) out.push_back(tag + "focal length must be positive");
  if (cam.image_width <= 0 || cam.image_height <= 0) {
    out.push_back(tag + "image dimensions must be positive");
  } else if (cam.optical_center.x() < 0.0 || cam.optical_center.x() > cam.image_width - 1 ||
             cam.optical_center.y() < 0.0 || cam.optical_center.y() > cam.image_height - 1) {
    out.push_back(tag + "principal point lies outside the image");
  }
  if (!cam.cop.allFinite()) out.push_back(tag + "centre of projection is not finite");
}

}  // namespace

std::vector<std::string> validate_rig(const CameraRig& rig) {
  std::vector<std::string> out;
  if (rig.cameras.empty()) out.push_back("rig has no cameras");
  std::set<std::string> seen;
  for (const auto& cam : rig.cameras) {
    if (cam.camera_id.empty()) out.push_back("camera with empty id");
    if (!seen.insert(cam.camera_id).second) {
      out.push_back("duplicate camera id '" + cam.camera_id + "'");
    }
    validate_camera(cam, out);
  }
  if (!((rig.capture_volume.max.array() > rig.capture_volume.min.array()).all())) {
    out.push_back("capture volume is degenerate");
  }
  return out;
}

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error("parse", what + " must be an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

CameraRig load_rig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open rig file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("parse", "rig file " + path.string() + ": " + e.what());
  }

  CameraRig rig;
  try {
    const json& vol = j.at("capture_volume");
    rig.capture_volume.min = vec3_from_json(vol.at("min"), "capture_volume.min");
    rig.capture_volume.max = vec3_from_json(vol.at("max"), "capture_volume.max");
    for (const json& jc : j.at("cameras")) {
      CameraCalibration cam;
      cam.camera_id = jc.at("id").get<std::string>();
      const json& jr = jc.at("rotation");
      if (!jr.is_array() || jr.size() != 9) {
        throw Error("parse", "rotation must be a row-major array of 9 numbers");
      }
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) cam.rotation(r, c) = jr[3 * r + c].get<double>();
      }
      cam.cop = vec3_from_json(jc.at("cop"), "cop");
      cam.focal_px = jc.at("focal_px").get<double>();
      const json& oc = jc.at("optical_center");
      if (!oc.is_array() || oc.size() != 2) {
        throw Error("parse", "optical_center must be an array of 2 numbers");
      }
      cam.optical_center = Vec2(oc[0].get<double>(), oc[1].get<double>());
      cam.image_width = jc.at("image_width").get<int>();
      cam.image_height = jc.at("image_height").get<int>();
      rig.cameras.push_back(std::move(cam));
    }
  } catch (const json::exception& e) {
    throw Error("parse", "rig file " + path.string() + ": " + e.what());
  }

  const auto defects = validate_rig(rig);
  if (!defects.empty()) {
    std::ostringstream msg;
    msg << "rig file " << path.string() << " is invalid:";
    for (const auto& d : defects) msg << " [" << d << "]";
    throw Error("validation", msg.str());
  }
  return rig;
}

void save_rig(const CameraRig& rig, const std::filesystem::path& path) {
  json j;
  j["capture_volume"] = {{"min", vec3_to_json(rig.capture_volume.min)},
                         {"max", vec3_to_json(rig.capture_volume.max)}};
  json cams = json::array();
  for (const auto& cam : rig.cameras) {
    json jr = json::array();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) jr.push_back(cam.rotation(r, c));
    }
    cams.push_back({{"id", cam.camera_id},
                    {"rotation", jr},
                    {"cop", vec3_to_json(cam.cop)},
                    {"focal_px", cam.focal_px},
                    {"optical_center", json::array({cam.optical_center.x(), cam.optical_center.y()})},
                    {"image_width", cam.image_width},
                    {"image_height", cam.image_height}});
  }
  j["cameras"] = std::move(cams);

  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write rig file " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error("io", "short write to rig file " + path.string());
}

}  // namespace hullforge
