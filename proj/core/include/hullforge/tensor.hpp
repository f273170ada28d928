// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace hullforge {

/// Dense 4-D feature volume: three spatial axes plus channels.  Storage is
/// x-fastest with channels outermost, i.e. element (x,y,z,c) lives at
/// ((c*nz + z)*ny + y)*nx + x, so channel c is one contiguous x-fastest
/// volume and a single-channel tensor has exactly the voxel grid layout.
template <typename T>
struct Tensor4 {
  int nx = 0, ny = 0, nz = 0, nc = 0;
  std::vector<T> values;

  static Tensor4 zeros(int nx, int ny, int nz, int nc) {
    Tensor4 t;
    t.nx = nx;
    t.ny = ny;
    t.nz = nz;
    t.nc = nc;
    t.values.assign(static_cast<std::size_t>(nx) * ny * nz * nc, T(0));
    return t;
  }

  std::size_t index(int x, int y, int z, int c) const {
    return ((static_cast<std::size_t>(c) * nz + z) * ny + y) * nx + x;
  }
  const T& at(int x, int y, int z, int c) const { return values[index(x, y, z, c)]; }
  T& at(int x, int y, int z, int c) { return values[index(x, y, z, c)]; }
  std::size_t size() const { return values.size(); }
  std::size_t spatial_size() const { return static_cast<std::size_t>(nx) * ny * nz; }
  bool same_shape(const Tensor4& other) const {
    return nx == other.nx && ny == other.ny && nz == other.nz && nc == other.nc;
  }

  template <typename U>
  Tensor4<U> cast() const {
    Tensor4<U> out;
    out.nx = nx;
    out.ny = ny;
    out.nz = nz;
    out.nc = nc;
    out.values.assign(values.begin(), values.end());
    return out;
  }
};

using Tensor4f = Tensor4<float>;
using Tensor4d = Tensor4<double>;

}  // namespace hullforge
