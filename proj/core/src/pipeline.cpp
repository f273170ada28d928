// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hullforge/errors.hpp"
#include "hullforge/mesh.hpp"
#include "hullforge/parallel.hpp"

namespace hullforge {

namespace {

using nlohmann::json;

double elapsed_s(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

unsigned effective_threads(const PipelineConfig& config, std::optional<unsigned> override_threads) {
  return resolve_threads(override_threads.value_or(config.threads));
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return item.key() == k; }) == allowed.end()) {
      throw Error("config", "unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

}  // namespace

NetConfig PipelineConfig::net_config() const {
  if (net_preset == "full") return NetConfig::full(patch.size);
  if (net_preset == "desk") return NetConfig::desk(patch.size);
  if (net_preset == "tiny") return NetConfig::tiny(patch.size);
  throw Error("config", "unknown net preset \"" + net_preset + "\"");
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("parse", "config " + path.string() + ": " + e.what());
  }

  PipelineConfig config;
  config.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  try {
    reject_unknown_keys(j,
                        {"dataset_dir", "grids_dir", "models_dir", "meshes_dir", "reports_dir",
                         "grid_resolution", "fusion", "low_cameras", "high_cameras", "patch",
                         "net_preset", "epochs", "batch_size", "seed", "threads", "ring",
                         "dataset"},
                        "config");
    if (j.contains("dataset_dir")) config.dataset_dir = j["dataset_dir"].get<std::string>();
    if (j.contains("grids_dir")) config.grids_dir = j["grids_dir"].get<std::string>();
    if (j.contains("models_dir")) config.models_dir = j["models_dir"].get<std::string>();
    if (j.contains("meshes_dir")) config.meshes_dir = j["meshes_dir"].get<std::string>();
    if (j.contains("reports_dir")) config.reports_dir = j["reports_dir"].get<std::string>();
    if (j.contains("grid_resolution")) config.grid_resolution = j["grid_resolution"].get<int>();
    if (j.contains("fusion")) config.fusion = fusion_mode_from_string(j["fusion"].get<std::string>());
    if (j.contains("low_cameras")) {
      config.low_cameras = j["low_cameras"].get<std::vector<std::string>>();
    }
    if (j.contains("high_cameras")) {
      config.high_cameras = j["high_cameras"].get<std::vector<std::string>>();
    }
    if (j.contains("patch")) {
      const json& p = j["patch"];
      reject_unknown_keys(p, {"size", "stride"}, "patch");
      if (p.contains("size")) config.patch.size = p["size"].get<int>();
      if (p.contains("stride")) config.patch.stride = p["stride"].get<int>();
    }
    if (j.contains("net_preset")) config.net_preset = j["net_preset"].get<std::string>();
    if (j.contains("epochs")) config.epochs = j["epochs"].get<int>();
    if (j.contains("batch_size")) config.batch_size = j["batch_size"].get<int>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) config.threads = j["threads"].get<unsigned>();
    if (j.contains("ring")) {
      const json& r = j["ring"];
      reject_unknown_keys(r,
                          {"cameras", "radius", "height", "image_width", "image_height",
                           "focal_px", "volume_half_extent"},
                          "ring");
      if (r.contains("cameras")) config.ring.cameras = r["cameras"].get<int>();
      if (r.contains("radius")) config.ring.radius = r["radius"].get<double>();
      if (r.contains("height")) config.ring.height = r["height"].get<double>();
      if (r.contains("image_width")) config.ring.image_width = r["image_width"].get<int>();
      if (r.contains("image_height")) config.ring.image_height = r["image_height"].get<int>();
      if (r.contains("focal_px")) config.ring.focal_px = r["focal_px"].get<double>();
      if (r.contains("volume_half_extent")) {
        config.ring.volume_half_extent = r["volume_half_extent"].get<double>();
      }
    }
    config.dataset.seed = config.seed;
    if (j.contains("dataset")) {
      const json& d = j["dataset"];
      reject_unknown_keys(
          d, {"scene_kind", "frames", "frames_per_family", "train_fraction", "supersample", "seed"},
          "dataset");
      if (d.contains("scene_kind")) config.dataset.scene_kind = d["scene_kind"].get<std::string>();
      if (d.contains("frames")) config.dataset.frames = d["frames"].get<int>();
      if (d.contains("frames_per_family")) {
        config.dataset.frames_per_family = d["frames_per_family"].get<int>();
      }
      if (d.contains("train_fraction")) {
        config.dataset.train_fraction = d["train_fraction"].get<double>();
      }
      if (d.contains("supersample")) config.dataset.supersample = d["supersample"].get<int>();
      if (d.contains("seed")) config.dataset.seed = d["seed"].get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw Error("parse", "config " + path.string() + ": " + e.what());
  }

  if (config.grid_resolution < 2) throw Error("config", "grid_resolution must be at least 2");
  if (config.patch.size < 1 || config.patch.stride < 1 || config.patch.stride > config.patch.size) {
    throw Error("config", "patch needs 1 <= stride <= size");
  }
  if (config.patch.size > config.grid_resolution) {
    throw Error("config", "patch size exceeds the grid resolution");
  }
  return config;
}

void save_config(const PipelineConfig& config, const std::filesystem::path& path) {
  json j;
  j["dataset_dir"] = config.dataset_dir.generic_string();
  j["grids_dir"] = config.grids_dir.generic_string();
  j["models_dir"] = config.models_dir.generic_string();
  j["meshes_dir"] = config.meshes_dir.generic_string();
  j["reports_dir"] = config.reports_dir.generic_string();
  j["grid_resolution"] = config.grid_resolution;
  j["fusion"] = to_string(config.fusion);
  j["low_cameras"] = config.low_cameras;
  j["high_cameras"] = config.high_cameras;
  j["patch"] = {{"size", config.patch.size}, {"stride", config.patch.stride}};
  j["net_preset"] = config.net_preset;
  j["epochs"] = config.epochs;
  j["batch_size"] = config.batch_size;
  j["seed"] = config.seed;
  j["threads"] = config.threads;
  j["ring"] = {{"cameras", config.ring.cameras},
               {"radius", config.ring.radius},
               {"height", config.ring.height},
               {"image_width", config.ring.image_width},
               {"image_height", config.ring.image_height},
               {"focal_px", config.ring.focal_px},
               {"volume_half_extent", config.ring.volume_half_extent}};
  j["dataset"] = {{"scene_kind", config.dataset.scene_kind},
                  {"frames", config.dataset.frames},
                  {"frames_per_family", config.dataset.frames_per_family},
                  {"train_fraction", config.dataset.train_fraction},
                  {"supersample", config.dataset.supersample},
                  {"seed", config.dataset.seed}};
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write config " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error("io", "short write to config " + path.string());
}

std::vector<int> parse_frame_list(const std::string& text) {
  std::vector<int> frames;
  std::size_t pos = 0;
  const auto parse_int = [&](std::size_t& at) {
    std::size_t end = at;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end == at) throw Error("usage", "bad frame list \"" + text + "\"");
    const int v = std::stoi(text.substr(at, end - at));
    at = end;
    return v;
  };
  while (pos < text.size()) {
    const int first = parse_int(pos);
    int last = first;
    if (pos < text.size() && text[pos] == '-') {
      ++pos;
      last = parse_int(pos);
    }
    if (last < first) throw Error("usage", "bad frame range in \"" + text + "\"");
    for (int f = first; f <= last; ++f) frames.push_back(f);
    if (pos < text.size()) {
      if (text[pos] != ',') throw Error("usage", "bad frame list \"" + text + "\"");
      ++pos;
    }
  }
  if (frames.empty()) throw Error("usage", "empty frame list");
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  return frames;
}

std::vector<const ManifestFrame*> select_frames(const DatasetManifest& manifest,
                                                const FrameSelection& selection) {
  std::vector<const ManifestFrame*> picked;
  if (!selection.frames.empty()) {
    std::unordered_map<int, const ManifestFrame*> by_number;
    for (const auto& frame : manifest.frames) by_number[frame.frame] = &frame;
    for (const int f : selection.frames) {
      const auto found = by_number.find(f);
      if (found == by_number.end()) {
        throw Error("validation", "frame " + std::to_string(f) + " is not in the manifest");
      }
      picked.push_back(found->second);
    }
    return picked;
  }
  if (selection.split != "train" && selection.split != "test" && selection.split != "all") {
    throw Error("usage", "split must be train, test, or all");
  }
  for (const auto& frame : manifest.frames) {
    if (selection.split == "all" || frame.split == selection.split) picked.push_back(&frame);
  }
  if (picked.empty()) throw Error("validation", "no frames matched the selection");
  return picked;
}

std::string grid_file_name(int frame) {
  char name[32];
  std::snprintf(name, sizeof name, "%06d.pvh", frame);
  return name;
}

namespace {

struct Workspace {
  std::filesystem::path dataset_dir;
  DatasetManifest manifest;
  CameraRig rig;
};

Workspace open_workspace(const PipelineConfig& config) {
  Workspace ws;
  ws.dataset_dir = config.resolve(config.dataset_dir);
  ws.manifest = load_manifest(ws.dataset_dir / "manifest.json");
  ws.rig = load_rig(ws.dataset_dir / ws.manifest.rig_path);
  return ws;
}

std::vector<std::string> resolve_camera_set(const Workspace& ws, std::vector<std::string> ids,
                                            const char* which) {
  if (ids.empty()) throw Error("config", std::string(which) + " camera list is empty");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error("config", std::string(which) + " camera list repeats an id");
  }
  for (const auto& id : ids) ws.rig.camera(id);  // throws on unknown ids
  return ids;
}

}  // namespace

SynthResult cmd_synth(const PipelineConfig& config, std::optional<std::uint64_t> seed,
                      std::optional<unsigned> threads) {
  CameraRig rig = make_camera_ring(config.ring);
  DatasetParams params = config.dataset;
  if (seed) params.seed = *seed;
  const auto dataset_dir = config.resolve(config.dataset_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const DatasetManifest manifest =
      generate_dataset(params, rig, dataset_dir, effective_threads(config, threads));
  std::printf("[synth] %zu frames x %zu cameras -> %s (%.1f s)\n", manifest.frames.size(),
              manifest.cameras.size(), dataset_dir.string().c_str(), elapsed_s(t0));
  SynthResult result;
  result.frames = static_cast<int>(manifest.frames.size());
  result.cameras = static_cast<int>(manifest.cameras.size());
  result.manifest_path = dataset_dir / "manifest.json";
  return result;
}

PvhResult cmd_pvh(const PipelineConfig& config, std::optional<FusionMode> fusion,
                  const std::vector<std::string>& camera_override,
                  std::optional<unsigned> threads) {
  const Workspace ws = open_workspace(config);
  const FusionMode mode = fusion.value_or(config.fusion);
  const unsigned n_threads = effective_threads(config, threads);
  const GridSpec spec = GridSpec::covering(ws.rig.capture_volume, config.grid_resolution);

  std::vector<std::pair<std::string, std::vector<std::string>>> sets;
  if (!camera_override.empty()) {
    sets.emplace_back("custom", resolve_camera_set(ws, camera_override, "custom"));
  } else {
    sets.emplace_back("low", resolve_camera_set(ws, config.low_cameras, "low"));
    std::vector<std::string> high = config.high_cameras;
    if (high.empty()) high = ws.manifest.cameras;
    sets.emplace_back("high", resolve_camera_set(ws, high, "high"));
  }

  PvhResult result;
  const auto grids_dir = config.resolve(config.grids_dir);
  for (const auto& [set_name, camera_ids] : sets) {
    const auto out_dir = grids_dir / set_name;
    std::filesystem::create_directories(out_dir);
    std::vector<CameraCalibration> cameras;
    for (const auto& id : camera_ids) cameras.push_back(ws.rig.camera(id));

    const auto t0 = std::chrono::steady_clock::now();
    for (const ManifestFrame& frame : ws.manifest.frames) {
      std::vector<SoftMatte> mattes;
      mattes.reserve(cameras.size());
      for (const auto& id : camera_ids) {
        const auto found =
            std::find_if(frame.mattes.begin(), frame.mattes.end(),
                         [&](const auto& entry) { return entry.first == id; });
        if (found == frame.mattes.end()) {
          throw Error("validation", "frame " + std::to_string(frame.frame) +
                                        " has no matte for camera " + id);
        }
        mattes.push_back(load_matte(ws.dataset_dir / found->second));
      }
      const VoxelGrid grid = compute_pvh(cameras, mattes, spec, mode, n_threads);
      save_grid(grid, out_dir / grid_file_name(frame.frame));
    }
    std::printf("[pvh] %s: %zu frames x %zu cameras, %s fusion (%.1f s)\n", set_name.c_str(),
                ws.manifest.frames.size(), cameras.size(), to_string(mode).c_str(), elapsed_s(t0));
    result.sets.push_back(set_name);
  }
  result.frames = static_cast<int>(ws.manifest.frames.size());
  return result;
}

TrainSummary cmd_train(const PipelineConfig& config, const TrainOverrides& overrides) {
  const Workspace ws = open_workspace(config);
  PatchSpec spec = config.patch;
  if (overrides.patch_size) spec.size = *overrides.patch_size;
  if (overrides.stride) spec.stride = *overrides.stride;
  if (spec.stride < 1 || spec.stride > spec.size) {
    throw Error("usage", "patch needs 1 <= stride <= size");
  }

  const auto grids_dir = config.resolve(config.grids_dir);
  std::vector<TrainSample> samples;
  int train_frames = 0;
  for (const ManifestFrame& frame : ws.manifest.frames) {
    if (frame.split != "train") continue;
    ++train_frames;
    const VoxelGrid low = load_grid(grids_dir / "low" / grid_file_name(frame.frame));
    const VoxelGrid high = load_grid(grids_dir / "high" / grid_file_name(frame.frame));
    if (!low.same_shape(high)) throw Error("shape", "low and high grid shapes differ");
    const PatchSet low_patches = extract_patches(low, spec);
    for (const Patch& p : low_patches.entries) {
      TrainSample sample;
      sample.input = patch_to_tensor(p, spec.size);
      sample.target = patch_to_tensor(extract_patch_at(high, p.corner, spec.size), spec.size);
      samples.push_back(std::move(sample));
    }
  }
  if (train_frames == 0) throw Error("training", "the manifest has no train frames");
  if (samples.empty()) throw Error("training", "no non-empty patches in the train split");

  NetConfig net = config.net_config();
  net.patch_size = spec.size;
  net.validate();

  TrainConfig tc;
  tc.epochs = overrides.epochs.value_or(config.epochs);
  tc.batch_size = config.batch_size;
  tc.seed = overrides.seed.value_or(config.seed);
  tc.threads = effective_threads(config, overrides.threads);

  std::printf("[train] %zu patch pairs from %d frames, %d epochs, batch %d\n", samples.size(),
              train_frames, tc.epochs, tc.batch_size);
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult trained = train(net, samples, tc);
  for (std::size_t e = 0; e < trained.epoch_loss.size(); ++e) {
    std::printf("[train] epoch %zu: loss %.6e\n", e + 1, trained.epoch_loss[e]);
  }
  std::printf("[train] done in %.1f s\n", elapsed_s(t0));

  const auto models_dir = config.resolve(config.models_dir);
  std::filesystem::create_directories(models_dir);
  const auto model_path = models_dir / "model.vae";
  save_model(trained.model, model_path);
  {
    std::ofstream out(models_dir / "loss.csv");
    if (!out) throw Error("io", "cannot write loss.csv");
    out << "epoch,mean_loss\n";
    char row[64];
    for (std::size_t e = 0; e < trained.epoch_loss.size(); ++e) {
      std::snprintf(row, sizeof row, "%zu,%.17g\n", e + 1, trained.epoch_loss[e]);
      out << row;
    }
  }

  TrainSummary summary;
  summary.samples = samples.size();
  summary.param_count = trained.model.params.size();
  summary.epoch_loss = std::move(trained.epoch_loss);
  summary.model_path = model_path;
  return summary;
}

InferResult cmd_infer(const PipelineConfig& config, const FrameSelection& selection,
                      std::optional<int> stride, const std::string& out_subdir,
                      std::optional<unsigned> threads) {
  const Workspace ws = open_workspace(config);
  const auto grids_dir = config.resolve(config.grids_dir);
  const Model<float> model = load_model(config.resolve(config.models_dir) / "model.vae");
  PatchSpec spec;
  spec.size = model.config.patch_size;
  spec.stride = stride.value_or(config.patch.stride);
  if (spec.stride < 1 || spec.stride > spec.size) {
    throw Error("usage", "stride must be between 1 and the model patch size");
  }
  const unsigned n_threads = effective_threads(config, threads);
  const auto frames = select_frames(ws.manifest, selection);
  const auto out_dir = grids_dir / out_subdir;
  std::filesystem::create_directories(out_dir);

  InferResult result;
  const auto t0 = std::chrono::steady_clock::now();
  for (const ManifestFrame* frame : frames) {
    const auto tf = std::chrono::steady_clock::now();
    const VoxelGrid low = load_grid(grids_dir / "low" / grid_file_name(frame->frame));
    PatchSet patches = extract_patches(low, spec);
    parallel_for_chunks(patches.entries.size(), n_threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        Patch& p = patches.entries[i];
        const Tensor4f refined = forward(model, patch_to_tensor(p, spec.size));
        tensor_to_patch(refined, p);
      }
    });
    const VoxelGrid refined = reassemble(patches);
    save_grid(refined, out_dir / grid_file_name(frame->frame));
    std::printf("[infer] frame %06d: %zu patches, %.2f s\n", frame->frame, patches.entries.size(),
                elapsed_s(tf));
  }
  result.frames = static_cast<int>(frames.size());
  result.seconds = elapsed_s(t0);
  result.fps = result.seconds > 0.0 ? result.frames / result.seconds : 0.0;
  result.out_dir = out_dir;
  std::printf("[infer] %d frames in %.2f s (%.2f frames/s) -> %s\n", result.frames, result.seconds,
              result.fps, out_dir.string().c_str());
  return result;
}

MeshResult cmd_mesh(const PipelineConfig& config, const FrameSelection& selection,
                    std::optional<double> iso, const std::string& source_subdir) {
  const Workspace ws = open_workspace(config);
  const auto grids_dir = config.resolve(config.grids_dir);
  const auto meshes_dir = config.resolve(config.meshes_dir);
  std::filesystem::create_directories(meshes_dir);
  const auto frames = select_frames(ws.manifest, selection);

  MeshResult result;
  result.out_dir = meshes_dir;
  for (const ManifestFrame* frame : frames) {
    const VoxelGrid grid = load_grid(grids_dir / source_subdir / grid_file_name(frame->frame));
    const double level = iso ? *iso : select_threshold(grid);
    const TriangleMesh mesh = marching_cubes(grid, level);
    char name[32];
    std::snprintf(name, sizeof name, "%06d.obj", frame->frame);
    export_obj(mesh, meshes_dir / name);
    if (mesh.faces.empty()) {
      std::fprintf(stderr, "warning: frame %06d meshed to nothing at iso %.3f\n", frame->frame,
                   level);
      ++result.empty_meshes;
    } else {
      std::printf("[mesh] frame %06d: iso %.3f, %zu vertices, %zu faces\n", frame->frame, level,
                  mesh.vertices.size(), mesh.faces.size());
    }
    ++result.meshes;
  }
  return result;
}

EvalReport cmd_eval(const PipelineConfig& config, const FrameSelection& selection, bool reproject,
                    const std::string& refined_subdir, std::optional<unsigned> threads) {
  (void)threads;  // evaluation is IO-bound; kept for interface symmetry
  const Workspace ws = open_workspace(config);
  const auto grids_dir = config.resolve(config.grids_dir);
  const auto frames = select_frames(ws.manifest, selection);

  const CameraCalibration* ref_cam = nullptr;
  if (reproject) {
    std::vector<std::string> high = config.high_cameras;
    if (high.empty()) high = ws.manifest.cameras;
    std::sort(high.begin(), high.end());
    ref_cam = &ws.rig.camera(high.front());
  }

  struct Accumulator {
    double mse_sum = 0.0;
    double sil_mse_sum = 0.0;
    double sil_ssim_sum = 0.0;
    double sil_iou_sum = 0.0;
  };
  Accumulator input_acc, refined_acc;

  for (const ManifestFrame* frame : frames) {
    const auto name = grid_file_name(frame->frame);
    const VoxelGrid low = load_grid(grids_dir / "low" / name);
    const VoxelGrid high = load_grid(grids_dir / "high" / name);
    const VoxelGrid refined = load_grid(grids_dir / refined_subdir / name);
    input_acc.mse_sum += voxel_mse(low, high);
    refined_acc.mse_sum += voxel_mse(refined, high);
    if (reproject) {
      const SoftMatte truth = reproject_silhouette(high, *ref_cam, 0.5);
      for (const auto& pair : {std::pair<const VoxelGrid*, Accumulator*>{&low, &input_acc},
                               std::pair<const VoxelGrid*, Accumulator*>{&refined, &refined_acc}}) {
        const SoftMatte sil = reproject_silhouette(*pair.first, *ref_cam, 0.5);
        double diff = 0.0;
        for (std::size_t i = 0; i < sil.values.size(); ++i) {
          const double d = sil.values[i] - truth.values[i];
          diff += d * d;
        }
        pair.second->sil_mse_sum += diff / static_cast<double>(sil.values.size());
        pair.second->sil_ssim_sum += image_ssim(sil, truth);
        pair.second->sil_iou_sum += binary_iou(sil, truth);
      }
    }
  }

  const double n = static_cast<double>(frames.size());
  const auto finish_row = [&](const std::string& label, const Accumulator& acc) {
    EvalRow row;
    row.label = label;
    row.mse = acc.mse_sum / n;
    row.psnr = psnr_from_mse(row.mse);
    if (reproject) {
      row.silhouette_psnr = psnr_from_mse(acc.sil_mse_sum / n);
      row.silhouette_ssim = acc.sil_ssim_sum / n;
      row.silhouette_iou = acc.sil_iou_sum / n;
    }
    return row;
  };

  EvalReport report;
  report.rows.push_back(finish_row("input", input_acc));
  report.rows.push_back(finish_row("refined", refined_acc));
  report.context["frames"] = std::to_string(frames.size());
  report.context["split"] = selection.frames.empty() ? selection.split : "explicit";
  report.context["refined_set"] = refined_subdir;
  report.context["fusion"] = to_string(config.fusion);
  if (reproject) report.context["reprojection_camera"] = ref_cam->camera_id;

  const auto reports_dir = config.resolve(config.reports_dir);
  std::filesystem::create_directories(reports_dir);
  save_report(report, reports_dir / "eval.json");
  return report;
}

}  // namespace hullforge
