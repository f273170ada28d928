// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the hot paths: carving, convolution, patch plumbing,
// surface extraction, and the similarity metric.  Run with
//   ./benchmarks/hullforge_bench --benchmark_min_time=0.5s

#include <benchmark/benchmark.h>

#include "hullforge/mesh.hpp"
#include "hullforge/metrics.hpp"
#include "hullforge/net.hpp"
#include "hullforge/patch.hpp"
#include "hullforge/pvh.hpp"
#include "hullforge/rng.hpp"
#include "hullforge/synth.hpp"

namespace {

using namespace hullforge;

VoxelGrid random_grid(int n, std::uint64_t seed) {
  VoxelGrid grid = make_grid(Vec3f(-1.f, -1.f, -1.f), 2.0f / n, n, n, n);
  Rng rng(seed);
  for (float& v : grid.occupancy) v = static_cast<float>(rng.uniform());
  return grid;
}

VoxelGrid sphere_grid(int n) {
  VoxelGrid grid = make_grid(Vec3f(-1.f, -1.f, -1.f), 2.0f / n, n, n, n);
  for (int z = 0; z < n; ++z) {
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        grid.at(x, y, z) = grid.voxel_center(x, y, z).norm() < 0.7 ? 1.0f : 0.0f;
      }
    }
  }
  return grid;
}

void BM_ComputePvh(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  RingParams ring;
  ring.image_width = 80;
  ring.image_height = 60;
  ring.focal_px = 40.0;
  const CameraRig rig = make_camera_ring(ring);
  Scene scene;
  scene.primitives.push_back({ScenePrimitive::Kind::Sphere, Vec3(0, 0, 0.2), Mat3::Identity(),
                              Vec3(0.5, 0, 0)});
  std::vector<SoftMatte> mattes;
  for (const auto& cam : rig.cameras) mattes.push_back(render_soft_matte(scene, cam, 2));
  const GridSpec spec = GridSpec::covering(rig.capture_volume, res);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_pvh(rig.cameras, mattes, spec, FusionMode::CalibratedSigmoid));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(res) * res * res);
}
BENCHMARK(BM_ComputePvh)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Conv3dForward(benchmark::State& state) {
  const int res = static_cast<int>(state.range(0));
  const int ic = 4, oc = 8;
  Tensor4f input = Tensor4f::zeros(res, res, res, ic);
  Rng rng(7);
  for (float& v : input.values) v = static_cast<float>(rng.uniform());
  std::vector<float> weights(static_cast<std::size_t>(oc) * ic * 27);
  std::vector<float> bias(oc);
  for (float& v : weights) v = static_cast<float>(rng.uniform(-0.1, 0.1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv3d_forward<float>(input, weights, bias, oc, 3, 1));
  }
  const double flops = 2.0 * res * res * res * oc * ic * 27;
  state.counters["flops"] = benchmark::Counter(flops * state.iterations(),
                                               benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Conv3dForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_PatchRoundTrip(benchmark::State& state) {
  const VoxelGrid grid = random_grid(64, 11);
  const PatchSpec spec{32, 16};
  for (auto _ : state) {
    PatchSet patches = extract_patches(grid, spec);
    benchmark::DoNotOptimize(reassemble(patches));
  }
}
BENCHMARK(BM_PatchRoundTrip)->Unit(benchmark::kMillisecond);

void BM_MarchingCubes(benchmark::State& state) {
  const VoxelGrid grid = sphere_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(marching_cubes(grid, 0.5));
  }
}
BENCHMARK(BM_MarchingCubes)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  SoftMatte a = make_matte(160, 120);
  SoftMatte b = make_matte(160, 120);
  Rng rng(23);
  for (float& v : a.values) v = static_cast<float>(rng.uniform());
  for (float& v : b.values) v = static_cast<float>(rng.uniform());
  for (auto _ : state) {
    benchmark::DoNotOptimize(image_ssim(a, b));
  }
}
BENCHMARK(BM_Ssim)->Unit(benchmark::kMillisecond);

void BM_InferPatch(benchmark::State& state) {
  const NetConfig net = NetConfig::desk(32);
  const Model<float> model = init_model<float>(net, 3);
  Tensor4f input = Tensor4f::zeros(32, 32, 32, 1);
  Rng rng(5);
  for (float& v : input.values) v = static_cast<float>(rng.uniform());
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(model, input));
  }
}
BENCHMARK(BM_InferPatch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
