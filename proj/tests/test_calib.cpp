// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hullforge/calib.hpp"
#include "hullforge/errors.hpp"
#include "hullforge/synth.hpp"

using namespace hullforge;

namespace {

CameraCalibration axis_camera() {
  CameraCalibration cam;
  cam.camera_id = "probe";
  cam.focal_px = 500.0;
  cam.optical_center = Vec2(320.0, 240.0);
  cam.image_width = 640;
  cam.image_height = 480;
  return cam;
}

std::filesystem::path temp_dir(const char* leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "hullforge_tests" / leaf;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("calib") {
  TEST_CASE("world_to_camera identity cases") {
    CameraCalibration cam = axis_camera();
    CHECK(world_to_camera(cam, Vec3(0, 0, 1)).isApprox(Vec3(0, 0, 1)));

    cam.cop = Vec3(0, 0, -2);
    CHECK(world_to_camera(cam, Vec3(0, 0, 0)).isApprox(Vec3(0, 0, 2)));
  }

  TEST_CASE("world_to_camera preserves norm under rotation") {
    CameraCalibration cam = axis_camera();
    cam.rotation = axis_angle(Vec3(0, 0, 1), M_PI / 2);
    cam.cop = Vec3(1, 0, 0);
    const Vec3 v = world_to_camera(cam, Vec3(1, 0, 1));
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("projection of the optical axis hits the optical centre") {
    CameraCalibration cam = axis_camera();
    const auto px = project_point(cam, Vec3(0, 0, 1));
    REQUIRE(px.has_value());
    CHECK(px->x() == doctest::Approx(320.0));
    CHECK(px->y() == doctest::Approx(240.0));
  }

  TEST_CASE("projection arithmetic") {
    CameraCalibration cam = axis_camera();
    const auto px = project_point(cam, Vec3(0.1, 0, 1));
    REQUIRE(px.has_value());
    CHECK(px->x() == doctest::Approx(370.0));
    CHECK(px->y() == doctest::Approx(240.0));
  }

  TEST_CASE("behind-camera and off-image points are markers, not errors") {
    CameraCalibration cam = axis_camera();
    CHECK_FALSE(project_point(cam, Vec3(0, 0, -1)).has_value());
    CHECK_FALSE(project_point(cam, Vec3(0, 0, 0)).has_value());  // at the COP
    CHECK_FALSE(project_point(cam, Vec3(10, 0, 1)).has_value());
  }

  TEST_CASE("ring cameras aim their optical axis through the volume centre") {
    const CameraRig rig = make_camera_ring(RingParams{});
    for (const auto& cam : rig.cameras) {
      // Points along the forward axis project to the principal point.
      const Vec3 forward = cam.rotation.row(2).transpose();
      for (const double t : {0.5, 1.0, 2.0}) {
        const auto px = project_point(cam, cam.cop + t * forward);
        REQUIRE(px.has_value());
        CHECK(px->x() == doctest::Approx(cam.optical_center.x()).epsilon(1e-9));
        CHECK(px->y() == doctest::Approx(cam.optical_center.y()).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("projection is scale invariant along camera rays") {
    const CameraRig rig = make_camera_ring(RingParams{});
    const CameraCalibration& cam = rig.cameras[3];
    const Vec3 v(0.2, -0.1, 1.7);
    const Vec3 p1 = cam.cop + cam.rotation.transpose() * v;
    const Vec3 p2 = cam.cop + cam.rotation.transpose() * (2.0 * v);
    const auto px1 = project_point(cam, p1);
    const auto px2 = project_point(cam, p2);
    REQUIRE(px1.has_value());
    REQUIRE(px2.has_value());
    CHECK((*px1 - *px2).norm() < 1e-9);
  }

  TEST_CASE("validate_rig accepts a ring and names broken cameras") {
    CameraRig rig = make_camera_ring(RingParams{});
    CHECK(validate_rig(rig).empty());

    rig.cameras[2].rotation(0, 0) += 0.1;  // breaks orthonormality
    auto defects = validate_rig(rig);
    REQUIRE(defects.size() >= 1);
    CHECK(defects[0].find(rig.cameras[2].camera_id) != std::string::npos);
  }

  TEST_CASE("validate_rig flags duplicate ids") {
    CameraRig rig = make_camera_ring(RingParams{});
    rig.cameras[1].camera_id = rig.cameras[0].camera_id;
    auto defects = validate_rig(rig);
    REQUIRE(defects.size() >= 1);
    bool mentions_duplicate = false;
    for (const auto& d : defects) {
      if (d.find("duplicate") != std::string::npos) mentions_duplicate = true;
    }
    CHECK(mentions_duplicate);
  }

  TEST_CASE("rig JSON round trip is exact") {
    const auto dir = temp_dir("calib_rt");
    const auto path = dir / "rig.json";
    const CameraRig rig = make_camera_ring(RingParams{});
    save_rig(rig, path);
    const CameraRig back = load_rig(path);

    REQUIRE(back.cameras.size() == rig.cameras.size());
    for (std::size_t i = 0; i < rig.cameras.size(); ++i) {
      const auto& a = rig.cameras[i];
      const auto& b = back.cameras[i];
      CHECK(a.camera_id == b.camera_id);
      CHECK(a.rotation == b.rotation);
      CHECK(a.cop == b.cop);
      CHECK(a.focal_px == b.focal_px);
      CHECK(a.optical_center == b.optical_center);
      CHECK(a.image_width == b.image_width);
      CHECK(a.image_height == b.image_height);
    }
    CHECK(rig.capture_volume.min == back.capture_volume.min);
    CHECK(rig.capture_volume.max == back.capture_volume.max);
  }

  TEST_CASE("rig loader reports missing files and fields") {
    const auto dir = temp_dir("calib_err");
    try {
      load_rig(dir / "nope.json");
      FAIL("expected an io error");
    } catch (const Error& e) {
      CHECK(e.category() == "io");
      CHECK(std::string(e.what()).find("nope.json") != std::string::npos);
    }

    {
      std::ofstream out(dir / "nofocal.json");
      out << R"({"capture_volume":{"min":[-1,-1,-1],"max":[1,1,1]},"cameras":[
        {"id":"c0","rotation":[1,0,0,0,1,0,0,0,1],"cop":[0,0,-2],
         "optical_center":[16,12],"image_width":32,"image_height":24}]})";
    }
    try {
      load_rig(dir / "nofocal.json");
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.category() == "parse");
      CHECK(std::string(e.what()).find("focal_px") != std::string::npos);
    }

    {
      std::ofstream out(dir / "empty.json");
      out << R"({"capture_volume":{"min":[-1,-1,-1],"max":[1,1,1]},"cameras":[]})";
    }
    try {
      load_rig(dir / "empty.json");
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK(e.category() == "validation");
    }
  }

  TEST_CASE("camera lookup by id") {
    const CameraRig rig = make_camera_ring(RingParams{});
    CHECK(rig.camera("cam03").camera_id == "cam03");
    CHECK_THROWS_AS(rig.camera("cam99"), Error);
  }
}
