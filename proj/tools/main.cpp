// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
//
// hullforge: probabilistic visual hull reconstruction from soft mattes.
//
//   synth  render a synthetic matte dataset with a ring of cameras
//   pvh    carve occupancy grids from the mattes (low + high view sets)
//   train  fit the patch autoencoder mapping low grids toward high grids
//   infer  refine low grids through the trained model
//   mesh   extract iso surfaces as OBJ files
//   eval   score input and refined grids against the high-view reference

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hullforge/errors.hpp"
#include "hullforge/pipeline.hpp"

namespace {

std::optional<unsigned> env_threads() {
  const char* raw = std::getenv("HULLFORGE_THREADS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long v = std::strtoul(raw, &end, 10);
  if (*end != '\0' || v > 4096) {
    throw hullforge::Error("usage", "HULLFORGE_THREADS must be a thread count");
  }
  return static_cast<unsigned>(v);
}

void print_eval_table(const hullforge::EvalReport& report) {
  const bool sil = !report.rows.empty() && report.rows.front().silhouette_psnr.has_value();
  std::printf("%-10s %12s %10s", "set", "mse (x1e-3)", "psnr (dB)");
  if (sil) std::printf(" %10s %9s %8s", "sil psnr", "sil ssim", "sil iou");
  std::printf("\n");
  for (const auto& row : report.rows) {
    std::printf("%-10s %12.3f %10.2f", row.label.c_str(), row.mse * 1e3, row.psnr);
    if (sil) {
      std::printf(" %10.2f %9.4f %8.4f", *row.silhouette_psnr, *row.silhouette_ssim,
                  *row.silhouette_iou);
    }
    std::printf("\n");
  }
  std::printf("full-scale reference: input %.2f -> refined %.2f (x1e-3)\n",
              hullforge::kReferenceInputMse * 1e3, hullforge::kReferenceRefinedMse * 1e3);
}

}  // namespace

int main(int argc, char** argv) {
  using hullforge::FrameSelection;

  CLI::App app{"probabilistic visual hull reconstruction pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<std::string> cameras;
  std::string fusion, frames_text, split = "test";
  int patch_size = 0, stride = 0, epochs = 0;
  double iso = 0.0;
  std::string infer_out = "refined", mesh_source = "refined", eval_refined = "refined";
  bool reproject = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "pipeline config JSON")->required();
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
  };
  const auto add_selection = [&](CLI::App* sub) {
    sub->add_option("--frames", frames_text, "explicit frames, e.g. 0,4,9-12");
    sub->add_option("--split", split, "train, test, or all")->capture_default_str();
  };

  CLI::App* c_synth = app.add_subcommand("synth", "render a synthetic matte dataset");
  add_common(c_synth);
  c_synth->add_option("--seed", seed, "dataset seed override");

  CLI::App* c_pvh = app.add_subcommand("pvh", "carve occupancy grids from mattes");
  add_common(c_pvh);
  c_pvh->add_option("--fusion", fusion, "paper_literal, calibrated_sigmoid, or product");
  c_pvh->add_option("--cameras", cameras, "camera ids for a single custom grid set")
      ->delimiter(',');

  CLI::App* c_train = app.add_subcommand("train", "train the patch autoencoder");
  add_common(c_train);
  c_train->add_option("--patch-size", patch_size, "cubic patch edge override");
  c_train->add_option("--stride", stride, "patch stride override");
  c_train->add_option("--epochs", epochs, "epoch count override");
  c_train->add_option("--seed", seed, "training seed override");

  CLI::App* c_infer = app.add_subcommand("infer", "refine low grids with the trained model");
  add_common(c_infer);
  add_selection(c_infer);
  c_infer->add_option("--stride", stride, "patch stride override");
  c_infer->add_option("--out", infer_out, "output grid set name")->capture_default_str();

  CLI::App* c_mesh = app.add_subcommand("mesh", "extract iso surfaces as OBJ");
  add_common(c_mesh);
  add_selection(c_mesh);
  c_mesh->add_option("--iso", iso, "fixed iso level (default: per-grid histogram split)");
  c_mesh->add_option("--source", mesh_source, "grid set to mesh")->capture_default_str();

  CLI::App* c_eval = app.add_subcommand("eval", "score grids against the high-view reference");
  add_common(c_eval);
  add_selection(c_eval);
  c_eval->add_flag("--reproject", reproject, "add silhouette reprojection metrics");
  c_eval->add_option("--refined", eval_refined, "refined grid set name")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error:usage: %s\n", e.what());
    return 2;
  }

  try {
    const hullforge::PipelineConfig config = hullforge::load_config(config_path);
    std::optional<unsigned> thread_override =
        app.get_subcommands().front()->count("--threads") ? std::optional<unsigned>(threads)
                                                          : env_threads();
    FrameSelection selection;
    selection.split = split;
    if (!frames_text.empty()) selection.frames = hullforge::parse_frame_list(frames_text);

    if (c_synth->parsed()) {
      std::optional<std::uint64_t> seed_override;
      if (c_synth->count("--seed")) seed_override = seed;
      hullforge::cmd_synth(config, seed_override, thread_override);
    } else if (c_pvh->parsed()) {
      std::optional<hullforge::FusionMode> fusion_override;
      if (!fusion.empty()) fusion_override = hullforge::fusion_mode_from_string(fusion);
      hullforge::cmd_pvh(config, fusion_override, cameras, thread_override);
    } else if (c_train->parsed()) {
      hullforge::TrainOverrides overrides;
      if (c_train->count("--patch-size")) overrides.patch_size = patch_size;
      if (c_train->count("--stride")) overrides.stride = stride;
      if (c_train->count("--epochs")) overrides.epochs = epochs;
      if (c_train->count("--seed")) overrides.seed = seed;
      overrides.threads = thread_override;
      hullforge::cmd_train(config, overrides);
    } else if (c_infer->parsed()) {
      std::optional<int> stride_override;
      if (c_infer->count("--stride")) stride_override = stride;
      hullforge::cmd_infer(config, selection, stride_override, infer_out, thread_override);
    } else if (c_mesh->parsed()) {
      std::optional<double> iso_override;
      if (c_mesh->count("--iso")) iso_override = iso;
      hullforge::cmd_mesh(config, selection, iso_override, mesh_source);
    } else if (c_eval->parsed()) {
      const hullforge::EvalReport report =
          hullforge::cmd_eval(config, selection, reproject, eval_refined, thread_override);
      print_eval_table(report);
    }
  } catch (const hullforge::Error& e) {
    std::fprintf(stderr, "error:%s: %s\n", e.category().c_str(), e.what());
    return e.category() == "usage" ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error:internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
