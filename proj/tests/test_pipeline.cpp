// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hullforge/errors.hpp"
#include "hullforge/pipeline.hpp"

using namespace hullforge;

namespace {

std::filesystem::path temp_dir(const char* leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "hullforge_tests" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Small enough to run the whole pipeline in seconds: 3 scene families of 4
// frames, 4 low-res cameras, 32^3 grids, the minimal net.
PipelineConfig mini_config(const std::filesystem::path& base) {
  PipelineConfig config;
  config.base_dir = base;
  config.grid_resolution = 32;
  config.low_cameras = {"cam00", "cam01"};
  config.patch = {16, 8};
  config.net_preset = "tiny";
  config.epochs = 2;
  config.batch_size = 4;
  config.seed = 1;
  config.threads = 1;
  config.ring.cameras = 4;
  config.ring.image_width = 48;
  config.ring.image_height = 36;
  config.ring.focal_px = 24.0;
  config.dataset.frames = 12;
  config.dataset.frames_per_family = 4;
  config.dataset.train_fraction = 2.0 / 3.0;
  config.dataset.supersample = 2;
  config.dataset.seed = 1;
  return config;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config files round trip") {
    const auto dir = temp_dir("pipeline_config");
    const PipelineConfig config = mini_config(dir);
    save_config(config, dir / "config.json");
    const PipelineConfig back = load_config(dir / "config.json");
    CHECK(back.base_dir == dir);
    CHECK(back.grid_resolution == 32);
    CHECK(back.low_cameras == config.low_cameras);
    CHECK(back.patch.size == 16);
    CHECK(back.patch.stride == 8);
    CHECK(back.net_preset == "tiny");
    CHECK(back.epochs == 2);
    CHECK(back.seed == 1);
    CHECK(back.ring.cameras == 4);
    CHECK(back.ring.focal_px == 24.0);
    CHECK(back.dataset.frames == 12);
    CHECK(back.dataset.train_fraction == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("config rejects unknown keys and bad shapes") {
    const auto dir = temp_dir("pipeline_config_bad");
    {
      std::ofstream out(dir / "unknown.json");
      out << R"({"grid_resolution": 32, "patchsize": 8})";
    }
    try {
      load_config(dir / "unknown.json");
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.category() == "config");
      CHECK(std::string(e.what()).find("patchsize") != std::string::npos);
    }

    {
      std::ofstream out(dir / "stride.json");
      out << R"({"patch": {"size": 8, "stride": 9}})";
    }
    CHECK_THROWS_AS(load_config(dir / "stride.json"), Error);

    {
      std::ofstream out(dir / "oversize.json");
      out << R"({"grid_resolution": 16, "patch": {"size": 32, "stride": 16}})";
    }
    CHECK_THROWS_AS(load_config(dir / "oversize.json"), Error);

    {
      std::ofstream out(dir / "broken.json");
      out << "{ nope";
    }
    CHECK_THROWS_AS(load_config(dir / "broken.json"), Error);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), Error);
  }

  TEST_CASE("dataset seed defaults to the config seed") {
    const auto dir = temp_dir("pipeline_config_seed");
    {
      std::ofstream out(dir / "a.json");
      out << R"({"seed": 77})";
    }
    CHECK(load_config(dir / "a.json").dataset.seed == 77);
    {
      std::ofstream out(dir / "b.json");
      out << R"({"seed": 77, "dataset": {"seed": 5}})";
    }
    CHECK(load_config(dir / "b.json").dataset.seed == 5);
  }

  TEST_CASE("frame lists parse ranges and reject noise") {
    CHECK(parse_frame_list("3") == std::vector<int>{3});
    CHECK(parse_frame_list("0-4") == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(parse_frame_list("0,4,9-12") == std::vector<int>{0, 4, 9, 10, 11, 12});
    CHECK(parse_frame_list("5,5,5") == std::vector<int>{5});
    CHECK_THROWS_AS(parse_frame_list("7-5"), Error);
    CHECK_THROWS_AS(parse_frame_list(""), Error);
    CHECK_THROWS_AS(parse_frame_list("1,,2"), Error);
    CHECK_THROWS_AS(parse_frame_list("1-"), Error);
    CHECK_THROWS_AS(parse_frame_list("frame7"), Error);
  }

  TEST_CASE("whole pipeline runs end to end on a miniature workspace") {
    const auto dir = temp_dir("pipeline_e2e");
    const PipelineConfig config = mini_config(dir);

    // Stage 1: synthesize the dataset.
    const SynthResult synth = cmd_synth(config, std::nullopt, std::nullopt);
    CHECK(synth.frames == 12);
    CHECK(synth.cameras == 4);
    REQUIRE(std::filesystem::exists(synth.manifest_path));
    const DatasetManifest manifest = load_manifest(synth.manifest_path);
    REQUIRE(manifest.frames.size() == 12);

    const auto test_frames = select_frames(manifest, FrameSelection{"test", {}});
    const auto train_frames = select_frames(manifest, FrameSelection{"train", {}});
    CHECK(train_frames.size() == 8);
    CHECK(test_frames.size() == 4);
    CHECK(select_frames(manifest, FrameSelection{"all", {}}).size() == 12);

    // Frame selection corner cases against the real manifest.
    FrameSelection explicit_two;
    explicit_two.frames = {manifest.frames[0].frame, manifest.frames[5].frame};
    CHECK(select_frames(manifest, explicit_two).size() == 2);
    CHECK_THROWS_AS(select_frames(manifest, FrameSelection{"validation", {}}), Error);
    FrameSelection unknown_frame;
    unknown_frame.frames = {999};
    CHECK_THROWS_AS(select_frames(manifest, unknown_frame), Error);

    // Stage 2: visual hulls for the low and high camera sets.
    const PvhResult pvh = cmd_pvh(config, std::nullopt, {}, std::nullopt);
    CHECK(pvh.frames == 12);
    REQUIRE(pvh.sets == std::vector<std::string>{"low", "high"});
    const auto grids_dir = dir / "grids";
    for (const ManifestFrame& frame : manifest.frames) {
      CHECK(std::filesystem::exists(grids_dir / "low" / grid_file_name(frame.frame)));
      CHECK(std::filesystem::exists(grids_dir / "high" / grid_file_name(frame.frame)));
    }
    const VoxelGrid sample_grid = load_grid(grids_dir / "low" / grid_file_name(0));
    CHECK(sample_grid.nx == 32);
    // Two cameras carve less: low-set occupancy dominates high-set.
    const VoxelGrid high_grid = load_grid(grids_dir / "high" / grid_file_name(0));
    double low_sum = 0.0, high_sum = 0.0;
    for (const float v : sample_grid.occupancy) low_sum += v;
    for (const float v : high_grid.occupancy) high_sum += v;
    CHECK(low_sum > high_sum);

    // A camera override reconstructs into its own named set.
    const PvhResult custom = cmd_pvh(config, FusionMode::Product, {"cam02"}, std::nullopt);
    CHECK(custom.sets == std::vector<std::string>{"custom"});
    CHECK(std::filesystem::exists(grids_dir / "custom" / grid_file_name(0)));

    // Stage 3: train the refiner on the train split.
    const TrainSummary trained = cmd_train(config, {});
    CHECK(trained.samples > 0);
    CHECK(trained.epoch_loss.size() == 2);
    REQUIRE(std::filesystem::exists(trained.model_path));
    REQUIRE(std::filesystem::exists(dir / "models" / "loss.csv"));
    {
      std::ifstream loss(dir / "models" / "loss.csv");
      std::string line;
      std::getline(loss, line);
      CHECK(line == "epoch,mean_loss");
      int rows = 0;
      while (std::getline(loss, line) && !line.empty()) ++rows;
      CHECK(rows == 2);
    }

    // Stage 4: refine the held-out frames.
    const InferResult inferred =
        cmd_infer(config, FrameSelection{"test", {}}, std::nullopt, "refined", std::nullopt);
    CHECK(inferred.frames == 4);
    CHECK(inferred.fps > 0.0);
    for (const ManifestFrame* frame : test_frames) {
      CHECK(std::filesystem::exists(grids_dir / "refined" / grid_file_name(frame->frame)));
    }
    const VoxelGrid refined = load_grid(grids_dir / "refined" / grid_file_name(test_frames[0]->frame));
    CHECK(refined.nx == 32);

    // Inference at a different stride writes a separate set.
    const InferResult wide =
        cmd_infer(config, FrameSelection{"test", {}}, 16, "refined_s16", std::nullopt);
    CHECK(wide.frames == 4);
    CHECK(std::filesystem::exists(grids_dir / "refined_s16" / grid_file_name(test_frames[0]->frame)));

    // Stage 5: mesh the refined grids.
    const MeshResult meshed =
        cmd_mesh(config, FrameSelection{"test", {}}, std::nullopt, "refined");
    CHECK(meshed.meshes == 4);
    for (const ManifestFrame* frame : test_frames) {
      char name[32];
      std::snprintf(name, sizeof name, "%06d.obj", frame->frame);
      CHECK(std::filesystem::exists(dir / "meshes" / name));
    }

    // Stage 6: score input and refined reconstructions.
    const EvalReport report =
        cmd_eval(config, FrameSelection{"test", {}}, true, "refined", std::nullopt);
    REQUIRE(report.find("input") != nullptr);
    REQUIRE(report.find("refined") != nullptr);
    CHECK(report.find("input")->mse > 0.0);
    CHECK(report.find("refined")->mse >= 0.0);
    CHECK(report.find("refined")->silhouette_psnr.has_value());
    CHECK(report.find("refined")->silhouette_ssim.has_value());
    CHECK(report.find("refined")->silhouette_iou.has_value());
    CHECK(report.context.at("frames") == "4");
    CHECK(report.context.at("split") == "test");
    CHECK(report.context.at("refined_set") == "refined");
    CHECK(report.context.at("reprojection_camera") == "cam00");
    REQUIRE(std::filesystem::exists(dir / "reports" / "eval.json"));
    const EvalReport reloaded = load_report(dir / "reports" / "eval.json");
    CHECK(reloaded.rows.size() == report.rows.size());

    // Reruns reproduce artifacts byte for byte.
    const std::string manifest_bytes = slurp(synth.manifest_path);
    const std::string matte_bytes = slurp(dir / "data" / manifest.frames[0].mattes[0].second);
    cmd_synth(config, std::nullopt, std::nullopt);
    CHECK(slurp(synth.manifest_path) == manifest_bytes);
    CHECK(slurp(dir / "data" / manifest.frames[0].mattes[0].second) == matte_bytes);

    const auto refined_path = grids_dir / "refined" / grid_file_name(test_frames[0]->frame);
    const std::string refined_bytes = slurp(refined_path);
    cmd_infer(config, FrameSelection{"test", {}}, std::nullopt, "refined", std::nullopt);
    CHECK(slurp(refined_path) == refined_bytes);
  }

  TEST_CASE("commands fail cleanly on a missing workspace") {
    const auto dir = temp_dir("pipeline_empty");
    const PipelineConfig config = mini_config(dir);
    CHECK_THROWS_AS(cmd_pvh(config, std::nullopt, {}, std::nullopt), Error);
    CHECK_THROWS_AS(cmd_train(config, {}), Error);
    CHECK_THROWS_AS(cmd_infer(config, FrameSelection{}, std::nullopt, "refined", std::nullopt),
                    Error);
    CHECK_THROWS_AS(cmd_mesh(config, FrameSelection{}, std::nullopt, "refined"), Error);
    CHECK_THROWS_AS(cmd_eval(config, FrameSelection{}, false, "refined", std::nullopt), Error);
  }

  TEST_CASE("pvh rejects unknown camera ids in an override") {
    const auto dir = temp_dir("pipeline_badcam");
    PipelineConfig config = mini_config(dir);
    config.dataset.frames = 4;
    cmd_synth(config, std::nullopt, std::nullopt);
    CHECK_THROWS_AS(cmd_pvh(config, std::nullopt, {"cam99"}, std::nullopt), Error);
  }
}
