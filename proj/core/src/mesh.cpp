// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "hullforge/errors.hpp"
#include "mc_tables.hpp"

namespace hullforge {

double select_threshold(const VoxelGrid& grid) {
  // Otsu over the nonzero occupancies: background zeros would otherwise
  // dominate the histogram and drag the split toward 0.
  std::array<std::uint64_t, 256> hist{};
  std::uint64_t total = 0;
  for (const float v : grid.occupancy) {
    if (v > 0.0f) {
      const int bin = std::min(255, static_cast<int>(v * 256.0f));
      ++hist[bin];
      ++total;
    }
  }
  if (total == 0) throw Error("validation", "cannot pick a threshold for an all-zero grid");

  double sum_all = 0.0;
  for (int b = 0; b < 256; ++b) sum_all += static_cast<double>(hist[b]) * b;

  double best = -1.0;
  int best_first = -1, best_last = -1;
  std::uint64_t w0 = 0;
  double sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += static_cast<double>(hist[t]) * t;
    const std::uint64_t w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double mu0 = sum0 / static_cast<double>(w0);
    const double mu1 = (sum_all - sum0) / static_cast<double>(w1);
    const double variance =
        static_cast<double>(w0) * static_cast<double>(w1) * (mu0 - mu1) * (mu0 - mu1);
    if (variance > best) {
      best = variance;
      best_first = best_last = t;
    } else if (variance == best) {
      best_last = t;
    }
  }
  double threshold = 0.5;
  if (best > 0.0) {
    // Take the middle of the argmax plateau; between two spikes every split
    // ties, and the midpoint lands halfway rather than hugging one spike.
    const int split = (best_first + best_last) / 2;
    threshold = (split + 1) / 256.0;
  }
  return std::clamp(threshold, 0.2, 0.8);
}

namespace {

constexpr int kCornerOffset[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};

}  // namespace

TriangleMesh marching_cubes(const VoxelGrid& grid, double iso) {
  if (!std::isfinite(iso)) throw Error("validation", "iso level must be finite");
  if (grid.nx >= (1 << 20) || grid.ny >= (1 << 20) || grid.nz >= (1 << 20)) {
    throw Error("validation", "grid too large for surface extraction");
  }

  TriangleMesh mesh;
  // Crossing vertices are welded through a global edge key so neighbouring
  // cells reuse them exactly: (cell-local edge) -> (base node, axis).
  std::unordered_map<std::uint64_t, int> edge_vertex;
  const auto vertex_on_edge = [&](int x, int y, int z, int ca, int cb, double iso_level) {
    int ax = x + kCornerOffset[ca][0], ay = y + kCornerOffset[ca][1], az = z + kCornerOffset[ca][2];
    int bx = x + kCornerOffset[cb][0], by = y + kCornerOffset[cb][1], bz = z + kCornerOffset[cb][2];
    const int axis = ax != bx ? 0 : (ay != by ? 1 : 2);
    const std::uint64_t key = (static_cast<std::uint64_t>(axis) << 62) |
                              (static_cast<std::uint64_t>(std::min(ax, bx)) << 42) |
                              (static_cast<std::uint64_t>(std::min(ay, by)) << 21) |
                              static_cast<std::uint64_t>(std::min(az, bz));
    const auto found = edge_vertex.find(key);
    if (found != edge_vertex.end()) return found->second;
    const double va = grid.at(ax, ay, az);
    const double vb = grid.at(bx, by, bz);
    const double t = (iso_level - va) / (vb - va);
    const Vec3 pa = grid.voxel_center(ax, ay, az);
    const Vec3 pb = grid.voxel_center(bx, by, bz);
    const int idx = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(pa + t * (pb - pa));
    edge_vertex.emplace(key, idx);
    return idx;
  };

  for (int z = 0; z + 1 < grid.nz; ++z) {
    for (int y = 0; y + 1 < grid.ny; ++y) {
      for (int x = 0; x + 1 < grid.nx; ++x) {
        int ci = 0;
        for (int c = 0; c < 8; ++c) {
          const float v =
              grid.at(x + kCornerOffset[c][0], y + kCornerOffset[c][1], z + kCornerOffset[c][2]);
          if (v < iso) ci |= 1 << c;  // inside means occupancy >= iso
        }
        if (detail::kEdgeTable[ci] == 0) continue;

        int edge_index[12];
        for (int e = 0; e < 12; ++e) {
          if (detail::kEdgeTable[ci] & (1 << e)) {
            edge_index[e] = vertex_on_edge(x, y, z, detail::kEdgeCorners[e][0],
                                           detail::kEdgeCorners[e][1], iso);
          }
        }
        for (int k = 0; detail::kTriTable[ci][k] != -1; k += 3) {
          const int a = edge_index[detail::kTriTable[ci][k]];
          const int b = edge_index[detail::kTriTable[ci][k + 1]];
          const int c = edge_index[detail::kTriTable[ci][k + 2]];
          if (a == b || b == c || a == c) continue;  // welded to nothing
          mesh.faces.push_back({a, b, c});
        }
      }
    }
  }
  return mesh;
}

double mesh_surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  return area;
}

MeshAudit audit_mesh(const TriangleMesh& mesh) {
  MeshAudit audit;
  audit.vertex_count = mesh.vertices.size();
  audit.face_count = mesh.faces.size();
  std::unordered_map<std::uint64_t, int> edge_uses;
  for (const auto& f : mesh.faces) {
    for (int i = 0; i < 3; ++i) {
      const int a = f[i], b = f[(i + 1) % 3];
      const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                                static_cast<std::uint64_t>(std::max(a, b));
      ++edge_uses[key];
    }
  }
  audit.edge_count = edge_uses.size();
  for (const auto& [key, uses] : edge_uses) {
    (void)key;
    if (uses == 1) ++audit.boundary_edges;
    if (uses >= 3) ++audit.nonmanifold_edges;
  }
  audit.watertight =
      audit.face_count > 0 && audit.boundary_edges == 0 && audit.nonmanifold_edges == 0;
  audit.euler_characteristic = static_cast<long>(audit.vertex_count) -
                               static_cast<long>(audit.edge_count) +
                               static_cast<long>(audit.face_count);
  return audit;
}

void export_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write mesh file " + path.string());
  char line[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(line, sizeof line, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    out << line;
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  }
  if (!out) throw Error("io", "short write to mesh file " + path.string());
}

TriangleMesh import_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open mesh file " + path.string());
  TriangleMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) {
        throw Error("parse", path.string() + ":" + std::to_string(line_no) + ": bad vertex");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f;
      for (int i = 0; i < 3; ++i) {
        std::string token;
        if (!(ls >> token)) {
          throw Error("parse", path.string() + ":" + std::to_string(line_no) + ": bad face");
        }
        // Tolerate v/vt/vn references; only the vertex index matters here.
        const auto slash = token.find('/');
        if (slash != std::string::npos) token.resize(slash);
        int idx = 0;
        try {
          idx = std::stoi(token);
        } catch (const std::exception&) {
          throw Error("parse", path.string() + ":" + std::to_string(line_no) + ": bad face index");
        }
        if (idx <= 0 || static_cast<std::size_t>(idx) > mesh.vertices.size()) {
          throw Error("validation",
                      path.string() + ":" + std::to_string(line_no) + ": face index out of range");
        }
        f[i] = idx - 1;
      }
      mesh.faces.push_back(f);
    }
  }
  return mesh;
}

}  // namespace hullforge
