// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "hullforge/voxel_grid.hpp"

namespace hullforge {

/// Indexed triangle soup in world metres.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

/// Picks an iso threshold for a grid by maximising between-class variance
/// (Otsu) over the nonzero occupancies, on 256 bins spanning (0, 1].  The
/// result is clamped to [0.2, 0.8]; a degenerate histogram (single bin)
/// falls back to 0.5, and an all-zero grid throws Error("validation").
double select_threshold(const VoxelGrid& grid);

/// Extracts the iso surface at `iso` with the classic cube tables.  A grid
/// node sits at the centre of its voxel; inside means occupancy >= iso.
/// Crossing vertices interpolate linearly along cell edges and are shared
/// between neighbouring cells, so the surface of a solid well inside the
/// grid is watertight.  The surface is not closed across the grid boundary:
/// solids that touch it produce open rims.  An empty mesh (no crossings) is
/// valid output.
TriangleMesh marching_cubes(const VoxelGrid& grid, double iso);

/// Triangle winding follows the tables: face normals point out of the
/// solid, toward lower occupancy.

double mesh_surface_area(const TriangleMesh& mesh);

/// Undirected edge bookkeeping for closedness checks.
struct MeshAudit {
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t face_count = 0;
  std::size_t boundary_edges = 0;     ///< edges used by exactly one face
  std::size_t nonmanifold_edges = 0;  ///< edges used by three or more faces
  bool watertight = false;            ///< every edge used by exactly two faces
  long euler_characteristic = 0;      ///< V - E + F
};
MeshAudit audit_mesh(const TriangleMesh& mesh);

/// Wavefront OBJ with "v" and "f" records only (1-based indices).
void export_obj(const TriangleMesh& mesh, const std::filesystem::path& path);
TriangleMesh import_obj(const std::filesystem::path& path);

}  // namespace hullforge
