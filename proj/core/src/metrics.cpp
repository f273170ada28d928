// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "hullforge/errors.hpp"

namespace hullforge {

double voxel_mse(const VoxelGrid& a, const VoxelGrid& b) {
  if (!a.same_shape(b)) throw Error("shape", "grid shapes differ");
  if (a.voxel_count() == 0) throw Error("shape", "cannot compare empty grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) {
    const double d = static_cast<double>(a.occupancy[i]) - static_cast<double>(b.occupancy[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.voxel_count());
}

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double voxel_psnr(const VoxelGrid& a, const VoxelGrid& b) {
  return psnr_from_mse(voxel_mse(a, b));
}

namespace {

constexpr int kSsimWindow = 11;

// 11x11 Gaussian, sigma 1.5, normalised to sum 1.
const std::vector<double>& ssim_window() {
  static const std::vector<double> w = [] {
    std::vector<double> win(kSsimWindow * kSsimWindow);
    const double sigma = 1.5;
    double sum = 0.0;
    for (int y = 0; y < kSsimWindow; ++y) {
      for (int x = 0; x < kSsimWindow; ++x) {
        const double dx = x - (kSsimWindow - 1) / 2.0;
        const double dy = y - (kSsimWindow - 1) / 2.0;
        const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        win[y * kSsimWindow + x] = g;
        sum += g;
      }
    }
    for (double& g : win) g /= sum;
    return win;
  }();
  return w;
}

}  // namespace

double image_ssim(const SoftMatte& a, const SoftMatte& b) {
  if (a.width != b.width || a.height != b.height) throw Error("shape", "image sizes differ");
  if (a.width < kSsimWindow || a.height < kSsimWindow) {
    throw Error("validation", "image smaller than the similarity window");
  }
  const auto& win = ssim_window();
  const double c1 = 0.01 * 0.01;  // (K1 * L)^2 with L = 1
  const double c2 = 0.03 * 0.03;

  double total = 0.0;
  std::size_t windows = 0;
  for (int wy = 0; wy + kSsimWindow <= a.height; ++wy) {
    for (int wx = 0; wx + kSsimWindow <= a.width; ++wx) {
      double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
      for (int y = 0; y < kSsimWindow; ++y) {
        for (int x = 0; x < kSsimWindow; ++x) {
          const double w = win[y * kSsimWindow + x];
          const double va = a.at(wx + x, wy + y);
          const double vb = b.at(wx + x, wy + y);
          mx += w * va;
          my += w * vb;
          mxx += w * va * va;
          myy += w * vb * vb;
          mxy += w * va * vb;
        }
      }
      const double var_x = mxx - mx * mx;
      const double var_y = myy - my * my;
      const double cov = mxy - mx * my;
      const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
      const double den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
      total += num / den;
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

SoftMatte reproject_silhouette(const VoxelGrid& grid, const CameraCalibration& cam, double iso) {
  if (grid.nx < 2 || grid.ny < 2 || grid.nz < 2) {
    throw Error("validation", "grid too small to sample");
  }
  if (cam.image_width <= 0 || cam.image_height <= 0 || cam.focal_px <= 0.0) {
    throw Error("validation", "camera has no usable image geometry");
  }
  SoftMatte out = make_matte(cam.image_width, cam.image_height, 0.0f);

  const double h = grid.voxel_size;
  const Vec3 origin = grid.origin.cast<double>();
  const Vec3 u0 = (cam.cop - origin) / h;
  const double extent[3] = {static_cast<double>(grid.nx - 1), static_cast<double>(grid.ny - 1),
                            static_cast<double>(grid.nz - 1)};
  const int dims[3] = {grid.nx, grid.ny, grid.nz};

  const auto sample = [&](const Vec3& u) {
    int i0[3];
    double f[3];
    for (int k = 0; k < 3; ++k) {
      const double c = std::clamp(u[k], 0.0, extent[k]);
      i0[k] = std::min(static_cast<int>(c), dims[k] - 2);
      f[k] = c - i0[k];
    }
    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz) {
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const double w = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) *
                           (dz ? f[2] : 1.0 - f[2]);
          acc += w * grid.at(i0[0] + dx, i0[1] + dy, i0[2] + dz);
        }
      }
    }
    return acc;
  };

  for (int py = 0; py < cam.image_height; ++py) {
    for (int px = 0; px < cam.image_width; ++px) {
      const Vec3 dir_cam((px - cam.optical_center.x()) / cam.focal_px,
                         (py - cam.optical_center.y()) / cam.focal_px, 1.0);
      const Vec3 dir = (cam.rotation.transpose() * dir_cam).normalized();
      const Vec3 du = dir / h;

      // Clip the ray to the sampled box in grid index space.
      double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
      bool misses = false;
      for (int k = 0; k < 3; ++k) {
        if (std::abs(du[k]) < 1e-15) {
          if (u0[k] < 0.0 || u0[k] > extent[k]) misses = true;
          continue;
        }
        const double ta = (0.0 - u0[k]) / du[k];
        const double tb = (extent[k] - u0[k]) / du[k];
        t0 = std::max(t0, std::min(ta, tb));
        t1 = std::min(t1, std::max(ta, tb));
      }
      if (misses || t0 > t1) continue;

      const double dt = h * 0.5;  // dir is unit length, so t is world metres
      bool hit = false;
      for (double t = t0; t <= t1 + 1e-12; t += dt) {
        if (sample(u0 + t * du) >= iso) {
          hit = true;
          break;
        }
      }
      if (!hit && sample(u0 + t1 * du) >= iso) hit = true;
      if (hit) out.at(px, py) = 1.0f;
    }
  }
  return out;
}

double binary_iou(const SoftMatte& a, const SoftMatte& b) {
  if (a.width != b.width || a.height != b.height) throw Error("shape", "image sizes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool fa = a.values[i] >= 0.5f;
    const bool fb = b.values[i] >= 0.5f;
    inter += fa && fb;
    uni += fa || fb;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

const EvalRow* EvalReport::find(const std::string& label) const {
  for (const auto& row : rows) {
    if (row.label == label) return &row;
  }
  return nullptr;
}

namespace {

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

double parse_number_or_inf(const nlohmann::json& j, const char* field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string() && (j == "inf" || j == "Infinity")) {
    return std::numeric_limits<double>::infinity();
  }
  throw Error("parse", std::string("report field ") + field + " is neither a number nor \"inf\"");
}

}  // namespace

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["label"] = row.label;
    r["mse"] = row.mse;
    r["psnr"] = number_or_inf(row.psnr);
    if (row.silhouette_psnr) r["silhouette_psnr"] = number_or_inf(*row.silhouette_psnr);
    if (row.silhouette_ssim) r["silhouette_ssim"] = *row.silhouette_ssim;
    if (row.silhouette_iou) r["silhouette_iou"] = *row.silhouette_iou;
    j["rows"].push_back(std::move(r));
  }
  j["context"] = report.context;
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write report " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error("io", "short write to report " + path.string());
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open report " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse", "report " + path.string() + ": " + e.what());
  }
  EvalReport report;
  try {
    for (const auto& r : j.at("rows")) {
      EvalRow row;
      row.label = r.at("label").get<std::string>();
      row.mse = r.at("mse").get<double>();
      row.psnr = parse_number_or_inf(r.at("psnr"), "psnr");
      if (r.contains("silhouette_psnr")) {
        row.silhouette_psnr = parse_number_or_inf(r.at("silhouette_psnr"), "silhouette_psnr");
      }
      if (r.contains("silhouette_ssim")) row.silhouette_ssim = r.at("silhouette_ssim").get<double>();
      if (r.contains("silhouette_iou")) row.silhouette_iou = r.at("silhouette_iou").get<double>();
      report.rows.push_back(std::move(row));
    }
    if (j.contains("context")) {
      report.context = j.at("context").get<std::map<std::string, std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse", "report " + path.string() + ": " + e.what());
  }
  return report;
}

}  // namespace hullforge
