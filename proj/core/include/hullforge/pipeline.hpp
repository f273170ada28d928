// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hullforge/metrics.hpp"
#include "hullforge/net.hpp"
#include "hullforge/patch.hpp"
#include "hullforge/pvh.hpp"
#include "hullforge/synth.hpp"

namespace hullforge {

/// Everything one reconstruction workspace needs, loaded from a JSON file.
/// Relative paths resolve against the config file's directory, so a
/// workspace can be moved wholesale.
struct PipelineConfig {
  std::filesystem::path base_dir = ".";  ///< set by load_config

  std::filesystem::path dataset_dir = "data";
  std::filesystem::path grids_dir = "grids";
  std::filesystem::path models_dir = "models";
  std::filesystem::path meshes_dir = "meshes";
  std::filesystem::path reports_dir = "reports";

  int grid_resolution = 64;
  FusionMode fusion = FusionMode::CalibratedSigmoid;
  /// Camera ids for the sparse reconstruction the net learns to repair.
  std::vector<std::string> low_cameras;
  /// Camera ids for the dense target reconstruction; empty means all.
  std::vector<std::string> high_cameras;

  PatchSpec patch;
  std::string net_preset = "desk";  ///< "full", "desk", or "tiny"
  int epochs = 10;
  int batch_size = 8;
  std::uint64_t seed = 1;
  unsigned threads = 0;  ///< 0 = all hardware threads

  RingParams ring;
  DatasetParams dataset;

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
  NetConfig net_config() const;  ///< preset resolved at patch.size
};

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

/// Which frames of the manifest a command touches: an explicit frame list
/// wins; otherwise `split` picks "train", "test", or "all".
struct FrameSelection {
  std::string split = "test";
  std::vector<int> frames;
};

/// Parses "3", "0-11", "0,4,9-12" into a sorted unique frame list.
std::vector<int> parse_frame_list(const std::string& text);

std::vector<const ManifestFrame*> select_frames(const DatasetManifest& manifest,
                                                const FrameSelection& selection);

struct SynthResult {
  int frames = 0;
  int cameras = 0;
  std::filesystem::path manifest_path;
};
SynthResult cmd_synth(const PipelineConfig& config, std::optional<std::uint64_t> seed,
                      std::optional<unsigned> threads);

struct PvhResult {
  int frames = 0;
  std::vector<std::string> sets;  ///< grid set directory names written
};
/// Reconstructs every manifest frame.  With no camera override this writes
/// two grid sets, "low" (config.low_cameras) and "high" (config.high_cameras
/// or the whole rig); an explicit camera list writes "custom" instead.
PvhResult cmd_pvh(const PipelineConfig& config, std::optional<FusionMode> fusion,
                  const std::vector<std::string>& camera_override, std::optional<unsigned> threads);

struct TrainOverrides {
  std::optional<int> patch_size;
  std::optional<int> stride;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};
struct TrainSummary {
  std::size_t samples = 0;
  std::size_t param_count = 0;
  std::vector<double> epoch_loss;
  std::filesystem::path model_path;
};
/// Pairs low/high patches over the train split (same corners, empty low
/// windows dropped), trains the hourglass, writes model.vae and loss.csv.
TrainSummary cmd_train(const PipelineConfig& config, const TrainOverrides& overrides);

struct InferResult {
  int frames = 0;
  double seconds = 0.0;
  double fps = 0.0;
  std::filesystem::path out_dir;
};
/// Refines low grids through the trained model and writes them as a new
/// grid set (default "refined").  `stride` overrides the patch stride used
/// for extraction; overlapping predictions average at reassembly.
InferResult cmd_infer(const PipelineConfig& config, const FrameSelection& selection,
                      std::optional<int> stride, const std::string& out_subdir,
                      std::optional<unsigned> threads);

struct MeshResult {
  int meshes = 0;
  int empty_meshes = 0;
  std::filesystem::path out_dir;
};
/// Extracts one OBJ per selected frame from the named grid set.  Without an
/// explicit iso level each grid picks its own by histogram splitting.
MeshResult cmd_mesh(const PipelineConfig& config, const FrameSelection& selection,
                    std::optional<double> iso, const std::string& source_subdir);

/// Scores "input" (low vs high) and "refined" (refined vs high) over the
/// selected frames, optionally adding silhouette-reprojection rows rendered
/// from the first high camera.  Writes reports_dir/eval.json and returns
/// the report.
EvalReport cmd_eval(const PipelineConfig& config, const FrameSelection& selection,
                    bool reproject, const std::string& refined_subdir,
                    std::optional<unsigned> threads);

/// Grid file name for a manifest frame, e.g. "000037.pvh".
std::string grid_file_name(int frame);

}  // namespace hullforge
