// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/matte.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "hullforge/errors.hpp"

namespace hullforge {

SoftMatte make_matte(int width, int height, float fill) {
  if (width <= 0 || height <= 0) {
    throw Error("validation", "matte dimensions must be positive");
  }
  SoftMatte m;
  m.width = width;
  m.height = height;
  m.values.assign(static_cast<std::size_t>(width) * height, fill);
  return m;
}

double sample_matte(const SoftMatte& matte, double x, double y) {
  // Outside the pixel-centre rectangle means certain background: a point
  // projecting off the image is unoccupied evidence, not an error.
  if (!(x >= 0.0 && x <= matte.width - 1 && y >= 0.0 && y <= matte.height - 1)) {
    return 0.0;
  }
  // Clamp the cell so samples exactly on the far edge stay in range.
  int x0 = static_cast<int>(x);
  int y0 = static_cast<int>(y);
  if (x0 > matte.width - 2) x0 = matte.width > 1 ? matte.width - 2 : 0;
  if (y0 > matte.height - 2) y0 = matte.height > 1 ? matte.height - 2 : 0;
  const int x1 = matte.width > 1 ? x0 + 1 : x0;
  const int y1 = matte.height > 1 ? y0 + 1 : y0;
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * matte.at(x0, y0) + fx * matte.at(x1, y0);
  const double bot = (1.0 - fx) * matte.at(x0, y1) + fx * matte.at(x1, y1);
  return (1.0 - fy) * top + fy * bot;
}

namespace {

// Consumes whitespace and '#' comment lines between PGM header tokens.
int next_header_int(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) {
    throw Error("parse", "matte file " + path + ": malformed header");
  }
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 22) throw Error("parse", "matte file " + path + ": header value too large");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return value;
}

}  // namespace

SoftMatte load_matte(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open matte file " + path.string());

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw Error("parse", "matte file " + path.string() + ": not a binary PGM (P5)");
  }
  const int width = next_header_int(in, path.string());
  const int height = next_header_int(in, path.string());
  const int maxval = next_header_int(in, path.string());
  if (width <= 0 || height <= 0) {
    throw Error("parse", "matte file " + path.string() + ": non-positive dimensions");
  }
  if (maxval != 255) {
    throw Error("parse", "matte file " + path.string() + ": only maxval 255 is supported");
  }
  in.get();  // single whitespace byte after maxval

  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error("parse", "matte file " + path.string() + ": truncated pixel payload");
  }

  SoftMatte m = make_matte(width, height);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    m.values[i] = static_cast<float>(raw[i]) / 255.0f;
  }
  return m;
}

void save_matte(const SoftMatte& matte, const std::filesystem::path& path) {
  if (matte.width <= 0 || matte.height <= 0 ||
      matte.values.size() != static_cast<std::size_t>(matte.width) * matte.height) {
    throw Error("validation", "matte has inconsistent dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write matte file " + path.string());
  out << "P5\n" << matte.width << " " << matte.height << "\n255\n";
  std::vector<unsigned char> raw(matte.values.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    float v = matte.values[i];
    if (!(v >= 0.0f)) v = 0.0f;
    if (v > 1.0f) v = 1.0f;
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error("io", "short write to matte file " + path.string());
}

}  // namespace hullforge
