// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/voxel_grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "hullforge/errors.hpp"

namespace hullforge {

namespace {

constexpr char kMagic[4] = {'P', 'V', 'H', '1'};
constexpr std::uint64_t kMaxVoxels = 1ull << 31;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw Error("parse", "grid file " + path + ": truncated header");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

void write_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

float read_f32(std::istream& in, const std::string& path) {
  const std::uint32_t bits = read_u32(in, path);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

VoxelGrid make_grid(const Vec3f& origin, float voxel_size, int nx, int ny, int nz, float fill) {
  if (nx <= 0 || ny <= 0 || nz <= 0) {
    throw Error("validation", "grid dimensions must be positive");
  }
  if (static_cast<std::uint64_t>(nx) * ny * nz > kMaxVoxels) {
    throw Error("validation", "grid dimensions overflow the voxel budget");
  }
  if (!(voxel_size > 0.0f)) throw Error("validation", "voxel size must be positive");
  VoxelGrid g;
  g.origin = origin;
  g.voxel_size = voxel_size;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.occupancy.assign(static_cast<std::size_t>(nx) * ny * nz, fill);
  return g;
}

void save_grid(const VoxelGrid& grid, const std::filesystem::path& path) {
  if (grid.occupancy.size() != static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz) {
    throw Error("validation", "grid storage does not match its dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write grid file " + path.string());
  out.write(kMagic, 4);
  write_u32(out, static_cast<std::uint32_t>(grid.nx));
  write_u32(out, static_cast<std::uint32_t>(grid.ny));
  write_u32(out, static_cast<std::uint32_t>(grid.nz));
  write_f32(out, grid.voxel_size);
  for (int i = 0; i < 3; ++i) write_f32(out, grid.origin[i]);
  static_assert(sizeof(float) == 4);
  // Occupancies are written verbatim; this code only targets little-endian
  // hosts, which the header words above also assume.
  out.write(reinterpret_cast<const char*>(grid.occupancy.data()),
            static_cast<std::streamsize>(grid.occupancy.size() * 4));
  if (!out) throw Error("io", "short write to grid file " + path.string());
}

VoxelGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open grid file " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error("parse", "grid file " + path.string() + ": bad magic");
  }
  const std::uint32_t nx = read_u32(in, path.string());
  const std::uint32_t ny = read_u32(in, path.string());
  const std::uint32_t nz = read_u32(in, path.string());
  if (nx == 0 || ny == 0 || nz == 0) {
    throw Error("validation", "grid file " + path.string() + ": zero dimension");
  }
  if (static_cast<std::uint64_t>(nx) * ny * nz > kMaxVoxels) {
    throw Error("validation", "grid file " + path.string() + ": dimensions overflow");
  }
  const float voxel_size = read_f32(in, path.string());
  Vec3f origin;
  for (int i = 0; i < 3; ++i) origin[i] = read_f32(in, path.string());
  if (!(voxel_size > 0.0f) || !std::isfinite(voxel_size) || !origin.allFinite()) {
    throw Error("validation", "grid file " + path.string() + ": bad geometry header");
  }

  VoxelGrid g = make_grid(origin, voxel_size, static_cast<int>(nx), static_cast<int>(ny),
                          static_cast<int>(nz));
  in.read(reinterpret_cast<char*>(g.occupancy.data()),
          static_cast<std::streamsize>(g.occupancy.size() * 4));
  if (static_cast<std::size_t>(in.gcount()) != g.occupancy.size() * 4) {
    throw Error("parse", "grid file " + path.string() + ": truncated payload");
  }
  for (const float v : g.occupancy) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error("validation", "grid file " + path.string() + ": occupancy outside [0,1]");
    }
  }
  return g;
}

}  // namespace hullforge
