// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include "hullforge/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "hullforge/errors.hpp"
#include "hullforge/rng.hpp"

namespace hullforge {

void NetConfig::validate() const {
  if (encoder_channels.empty()) throw Error("config", "encoder ladder is empty");
  for (const int c : encoder_channels) {
    if (c <= 0) throw Error("config", "encoder channel counts must be positive");
  }
  if (skip_flags.size() != encoder_channels.size()) {
    throw Error("config", "skip_flags must have one entry per encoder layer");
  }
  for (const int f : skip_flags) {
    if (f != 0 && f != 1) throw Error("config", "skip_flags entries must be 0 or 1");
  }
  if (skip_flags.back() != 0) {
    throw Error("config", "the last encoder layer has no shape-matched decoder partner");
  }
  if (latent_dim <= 0) throw Error("config", "latent dimension must be positive");
  if (kernel != 3) throw Error("config", "only 3x3x3 kernels are supported");
  if (patch_size < 2) throw Error("config", "patch size must be at least 2");
  int res = patch_size;
  for (std::size_t i = 0; i < encoder_channels.size(); ++i) {
    if (i % 2 == 0) {
      if (res % 2 != 0) {
        throw Error("config", "stride-2 layers must divide the patch size evenly");
      }
      res /= 2;
    }
  }
  if (res < 1) throw Error("config", "patch size collapses before the bottleneck");
}

NetConfig NetConfig::full(int patch_size) {
  NetConfig c;
  c.patch_size = patch_size;
  c.encoder_channels = {64, 64, 128, 128, 256};
  c.skip_flags = {0, 1, 0, 1, 0};
  c.latent_dim = 100;
  return c;
}

NetConfig NetConfig::desk(int patch_size) {
  NetConfig c;
  c.patch_size = patch_size;
  c.encoder_channels = {4, 4, 8, 8, 16};
  c.skip_flags = {0, 1, 0, 1, 0};
  c.latent_dim = 100;
  return c;
}

NetConfig NetConfig::tiny(int patch_size) {
  NetConfig c;
  c.patch_size = patch_size;
  c.encoder_channels = {2, 2};
  c.skip_flags = {1, 0};
  c.latent_dim = 4;
  return c;
}

NetPlan make_plan(const NetConfig& config) {
  config.validate();
  const int L = static_cast<int>(config.encoder_channels.size());
  const int k = config.kernel;

  std::vector<int> ch(L + 1);
  ch[0] = 1;
  for (int i = 0; i < L; ++i) ch[i + 1] = config.encoder_channels[i];
  std::vector<int> res(L + 1);
  res[0] = config.patch_size;
  for (int i = 0; i < L; ++i) res[i + 1] = i % 2 == 0 ? res[i] / 2 : res[i];

  NetPlan plan;
  std::size_t off = 0;
  auto add_conv = [&](int in_ch, int out_ch) {
    NetPlan::Conv conv;
    conv.in_ch = in_ch;
    conv.out_ch = out_ch;
    conv.w_off = off;
    conv.w_len = static_cast<std::size_t>(out_ch) * in_ch * k * k * k;
    off += conv.w_len;
    conv.b_off = off;
    conv.b_len = static_cast<std::size_t>(out_ch);
    off += conv.b_len;
    return conv;
  };

  for (int i = 0; i < L; ++i) {
    NetPlan::Conv conv = add_conv(ch[i], ch[i + 1]);
    conv.stride = i % 2 == 0 ? 2 : 1;
    conv.in_res = res[i];
    conv.out_res = res[i + 1];
    plan.encoder.push_back(conv);
  }

  plan.bottleneck_res = res[L];
  plan.bottleneck_ch = ch[L];
  plan.flat_len = static_cast<std::size_t>(res[L]) * res[L] * res[L] * ch[L];
  plan.latent = config.latent_dim;
  plan.fc1_w_off = off;
  off += static_cast<std::size_t>(plan.latent) * plan.flat_len;
  plan.fc1_b_off = off;
  off += static_cast<std::size_t>(plan.latent);
  plan.fc2_w_off = off;
  off += plan.flat_len * plan.latent;
  plan.fc2_b_off = off;
  off += plan.flat_len;

  for (int j = 0; j < L; ++j) {
    const int m = L - 1 - j;
    NetPlan::Conv conv = add_conv(ch[m + 1], ch[m]);
    conv.stride = 1;
    conv.upsample_before = plan.encoder[m].stride == 2;
    conv.in_res = res[m];  // after any upsample
    conv.out_res = res[m];
    const int skip_src = L - 2 - j;
    if (skip_src >= 0 && config.skip_flags[skip_src] == 1) conv.skip_encoder = skip_src;
    conv.relu_after = j < L - 1;
    plan.decoder.push_back(conv);
  }
  plan.param_count = off;
  return plan;
}

std::vector<LayerSpec> layer_chain(const NetConfig& config) {
  const NetPlan plan = make_plan(config);
  const int L = static_cast<int>(plan.encoder.size());
  std::vector<LayerSpec> chain;
  auto relu = [](int ch) {
    return LayerSpec{LayerKind::Relu, ch, ch, 0, 1, 0};
  };
  for (int i = 0; i < L; ++i) {
    const auto& conv = plan.encoder[i];
    chain.push_back({conv.stride == 2 ? LayerKind::DownsampleConv3d : LayerKind::Conv3d,
                     conv.in_ch, conv.out_ch, config.kernel, conv.stride,
                     config.skip_flags[i] == 1 ? i + 1 : 0});
    chain.push_back(relu(conv.out_ch));
  }
  chain.push_back({LayerKind::FullyConnected, static_cast<int>(plan.flat_len), plan.latent, 0, 1, 0});
  chain.push_back(relu(plan.latent));
  chain.push_back({LayerKind::FullyConnected, plan.latent, static_cast<int>(plan.flat_len), 0, 1, 0});
  chain.push_back(relu(static_cast<int>(plan.flat_len)));
  for (int j = 0; j < L; ++j) {
    const auto& conv = plan.decoder[j];
    chain.push_back({conv.upsample_before ? LayerKind::UpsampleConv3d : LayerKind::Conv3d,
                     conv.in_ch, conv.out_ch, config.kernel, conv.upsample_before ? 2 : 1,
                     conv.skip_encoder >= 0 ? conv.skip_encoder + 1 : 0});
    if (conv.relu_after) chain.push_back(relu(conv.out_ch));
  }
  return chain;
}

template <typename T>
Model<T> init_model(const NetConfig& config, std::uint64_t seed) {
  const NetPlan plan = make_plan(config);
  Model<T> model;
  model.config = config;
  model.params.assign(plan.param_count, T(0));
  Rng rng(seed);
  const int k = config.kernel;
  auto fill_conv = [&](const NetPlan::Conv& conv) {
    const double bound = std::sqrt(6.0 / (static_cast<double>(conv.in_ch) * k * k * k));
    for (std::size_t i = 0; i < conv.w_len; ++i) {
      model.params[conv.w_off + i] = static_cast<T>(rng.uniform(-bound, bound));
    }
  };
  for (const auto& conv : plan.encoder) fill_conv(conv);
  const double b1 = std::sqrt(6.0 / static_cast<double>(plan.flat_len));
  for (std::size_t i = 0; i < static_cast<std::size_t>(plan.latent) * plan.flat_len; ++i) {
    model.params[plan.fc1_w_off + i] = static_cast<T>(rng.uniform(-b1, b1));
  }
  const double b2 = std::sqrt(6.0 / static_cast<double>(plan.latent));
  for (std::size_t i = 0; i < plan.flat_len * plan.latent; ++i) {
    model.params[plan.fc2_w_off + i] = static_cast<T>(rng.uniform(-b2, b2));
  }
  for (const auto& conv : plan.decoder) fill_conv(conv);
  return model;
}

namespace {

// Output x range [lo, hi) for which in_x = out_x*stride + k_off stays
// inside [0, in_n).
inline void conv_x_range(int in_n, int out_n, int stride, int k_off, int& lo, int& hi) {
  lo = k_off < 0 ? (-k_off + stride - 1) / stride : 0;
  hi = std::min(out_n, (in_n - 1 - k_off) / stride + 1);
  if (hi < lo) hi = lo;
}

template <typename T>
void check_conv_args(const Tensor4<T>& input, std::span<const T> weights, std::span<const T> bias,
                     int out_channels, int kernel) {
  if (out_channels <= 0 || kernel <= 0 || kernel % 2 == 0) {
    throw Error("validation", "convolution needs positive channels and an odd kernel");
  }
  const std::size_t want =
      static_cast<std::size_t>(out_channels) * input.nc * kernel * kernel * kernel;
  if (weights.size() != want || bias.size() != static_cast<std::size_t>(out_channels)) {
    throw Error("validation", "convolution weight or bias span has the wrong length");
  }
}

}  // namespace

template <typename T>
Tensor4<T> conv3d_forward(const Tensor4<T>& input, std::span<const T> weights,
                          std::span<const T> bias, int out_channels, int kernel, int stride) {
  check_conv_args(input, weights, bias, out_channels, kernel);
  if (stride != 1 && stride != 2) throw Error("validation", "convolution stride must be 1 or 2");
  const int pad = kernel / 2;
  const int onx = (input.nx + stride - 1) / stride;
  const int ony = (input.ny + stride - 1) / stride;
  const int onz = (input.nz + stride - 1) / stride;
  Tensor4<T> out = Tensor4<T>::zeros(onx, ony, onz, out_channels);

  const std::size_t w_per_oc = static_cast<std::size_t>(input.nc) * kernel * kernel * kernel;
  for (int oc = 0; oc < out_channels; ++oc) {
    const T* w_oc = weights.data() + oc * w_per_oc;
    for (int oz = 0; oz < onz; ++oz) {
      for (int oy = 0; oy < ony; ++oy) {
        T* orow = &out.at(0, oy, oz, oc);
        for (int ox = 0; ox < onx; ++ox) orow[ox] = bias[oc];
        for (int ic = 0; ic < input.nc; ++ic) {
          const T* w_ic = w_oc + static_cast<std::size_t>(ic) * kernel * kernel * kernel;
          for (int kz = 0; kz < kernel; ++kz) {
            const int iz = oz * stride + kz - pad;
            if (iz < 0 || iz >= input.nz) continue;
            for (int ky = 0; ky < kernel; ++ky) {
              const int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= input.ny) continue;
              const T* irow = &input.at(0, iy, iz, ic);
              const T* w_k = w_ic + static_cast<std::size_t>(kz) * kernel * kernel + ky * kernel;
              for (int kx = 0; kx < kernel; ++kx) {
                const T w = w_k[kx];
                const int k_off = kx - pad;
                int lo, hi;
                conv_x_range(input.nx, onx, stride, k_off, lo, hi);
                const T* in_base = irow + k_off;
                if (stride == 1) {
                  for (int ox = lo; ox < hi; ++ox) orow[ox] += w * in_base[ox];
                } else {
                  for (int ox = lo; ox < hi; ++ox) orow[ox] += w * in_base[2 * ox];
                }
              }
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
void conv3d_backward(const Tensor4<T>& input, std::span<const T> weights, int out_channels,
                     int kernel, int stride, const Tensor4<T>& d_output, Tensor4<T>* d_input,
                     std::span<T> d_weights, std::span<T> d_bias) {
  check_conv_args(input, weights, std::span<const T>(d_bias.data(), d_bias.size()), out_channels,
                  kernel);
  if (stride != 1 && stride != 2) throw Error("validation", "convolution stride must be 1 or 2");
  if (d_weights.size() != weights.size()) {
    throw Error("validation", "weight gradient span has the wrong length");
  }
  const int pad = kernel / 2;
  const int onx = d_output.nx, ony = d_output.ny, onz = d_output.nz;
  if (d_output.nc != out_channels || onx != (input.nx + stride - 1) / stride ||
      ony != (input.ny + stride - 1) / stride || onz != (input.nz + stride - 1) / stride) {
    throw Error("validation", "output gradient shape mismatch");
  }
  if (d_input) {
    *d_input = Tensor4<T>::zeros(input.nx, input.ny, input.nz, input.nc);
  }

  const std::size_t w_per_oc = static_cast<std::size_t>(input.nc) * kernel * kernel * kernel;
  for (int oc = 0; oc < out_channels; ++oc) {
    const T* w_oc = weights.data() + oc * w_per_oc;
    T* dw_oc = d_weights.data() + oc * w_per_oc;
    T db = T(0);
    for (int oz = 0; oz < onz; ++oz) {
      for (int oy = 0; oy < ony; ++oy) {
        const T* grow = &d_output.at(0, oy, oz, oc);
        for (int ox = 0; ox < onx; ++ox) db += grow[ox];
        for (int ic = 0; ic < input.nc; ++ic) {
          const T* w_ic = w_oc + static_cast<std::size_t>(ic) * kernel * kernel * kernel;
          T* dw_ic = dw_oc + static_cast<std::size_t>(ic) * kernel * kernel * kernel;
          for (int kz = 0; kz < kernel; ++kz) {
            const int iz = oz * stride + kz - pad;
            if (iz < 0 || iz >= input.nz) continue;
            for (int ky = 0; ky < kernel; ++ky) {
              const int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= input.ny) continue;
              const T* irow = &input.at(0, iy, iz, ic);
              T* dirow = d_input ? &d_input->at(0, iy, iz, ic) : nullptr;
              const std::size_t k_base = static_cast<std::size_t>(kz) * kernel * kernel + ky * kernel;
              for (int kx = 0; kx < kernel; ++kx) {
                const int k_off = kx - pad;
                int lo, hi;
                conv_x_range(input.nx, onx, stride, k_off, lo, hi);
                const T w = w_ic[k_base + kx];
                T dw = T(0);
                if (stride == 1) {
                  const T* in_base = irow + k_off;
                  if (dirow) {
                    T* di_base = dirow + k_off;
                    for (int ox = lo; ox < hi; ++ox) {
                      const T g = grow[ox];
                      dw += g * in_base[ox];
                      di_base[ox] += w * g;
                    }
                  } else {
                    for (int ox = lo; ox < hi; ++ox) dw += grow[ox] * in_base[ox];
                  }
                } else {
                  const T* in_base = irow + k_off;
                  if (dirow) {
                    T* di_base = dirow + k_off;
                    for (int ox = lo; ox < hi; ++ox) {
                      const T g = grow[ox];
                      dw += g * in_base[2 * ox];
                      di_base[2 * ox] += w * g;
                    }
                  } else {
                    for (int ox = lo; ox < hi; ++ox) dw += grow[ox] * in_base[2 * ox];
                  }
                }
                dw_ic[k_base + kx] += dw;
              }
            }
          }
        }
      }
    }
    d_bias[oc] += db;
  }
}

template <typename T>
Tensor4<T> upsample_nearest2(const Tensor4<T>& input) {
  Tensor4<T> out = Tensor4<T>::zeros(input.nx * 2, input.ny * 2, input.nz * 2, input.nc);
  for (int c = 0; c < input.nc; ++c) {
    for (int z = 0; z < out.nz; ++z) {
      for (int y = 0; y < out.ny; ++y) {
        const T* irow = &input.at(0, y / 2, z / 2, c);
        T* orow = &out.at(0, y, z, c);
        for (int x = 0; x < out.nx; ++x) orow[x] = irow[x / 2];
      }
    }
  }
  return out;
}

namespace {

template <typename T>
Tensor4<T> upsample_nearest2_backward(const Tensor4<T>& d_output) {
  Tensor4<T> d_in = Tensor4<T>::zeros(d_output.nx / 2, d_output.ny / 2, d_output.nz / 2, d_output.nc);
  for (int c = 0; c < d_output.nc; ++c) {
    for (int z = 0; z < d_output.nz; ++z) {
      for (int y = 0; y < d_output.ny; ++y) {
        const T* grow = &d_output.at(0, y, z, c);
        T* drow = &d_in.at(0, y / 2, z / 2, c);
        for (int x = 0; x < d_output.nx; ++x) drow[x / 2] += grow[x];
      }
    }
  }
  return d_in;
}

template <typename T>
Tensor4<T> relu(const Tensor4<T>& t) {
  Tensor4<T> out = t;
  for (auto& v : out.values) v = v > T(0) ? v : T(0);
  return out;
}

template <typename T>
std::span<const T> conv_w(const Model<T>& model, const NetPlan::Conv& conv) {
  return std::span<const T>(model.params.data() + conv.w_off, conv.w_len);
}
template <typename T>
std::span<const T> conv_b(const Model<T>& model, const NetPlan::Conv& conv) {
  return std::span<const T>(model.params.data() + conv.b_off, conv.b_len);
}

}  // namespace

template <typename T>
Tensor4<T> forward(const Model<T>& model, const Tensor4<T>& input, ForwardTape<T>* tape) {
  const NetPlan plan = make_plan(model.config);
  if (model.params.size() != plan.param_count) {
    throw Error("validation", "parameter vector does not match the architecture");
  }
  const int p = model.config.patch_size;
  if (input.nx != p || input.ny != p || input.nz != p || input.nc != 1) {
    throw Error("validation", "input tensor must be one patch-sized channel");
  }

  ForwardTape<T> local;
  ForwardTape<T>& t = tape ? *tape : local;
  t = ForwardTape<T>{};

  Tensor4<T> x = input;
  for (const auto& conv : plan.encoder) {
    t.enc_in.push_back(x);
    Tensor4<T> pre = conv3d_forward(x, conv_w(model, conv), conv_b(model, conv), conv.out_ch,
                                    model.config.kernel, conv.stride);
    x = relu(pre);
    t.enc_pre.push_back(std::move(pre));
    t.enc_act.push_back(x);
  }

  t.flat_in = x.values;
  const std::size_t n = plan.flat_len;
  const int latent = plan.latent;
  t.fc1_pre.assign(latent, T(0));
  const T* w1 = model.params.data() + plan.fc1_w_off;
  const T* b1 = model.params.data() + plan.fc1_b_off;
  for (int l = 0; l < latent; ++l) {
    T acc = b1[l];
    const T* row = w1 + static_cast<std::size_t>(l) * n;
    for (std::size_t i = 0; i < n; ++i) acc += row[i] * t.flat_in[i];
    t.fc1_pre[l] = acc;
  }
  t.fc1_act = t.fc1_pre;
  for (auto& v : t.fc1_act) v = v > T(0) ? v : T(0);

  t.fc2_pre.assign(n, T(0));
  const T* w2 = model.params.data() + plan.fc2_w_off;
  const T* b2 = model.params.data() + plan.fc2_b_off;
  for (std::size_t i = 0; i < n; ++i) {
    T acc = b2[i];
    const T* row = w2 + i * static_cast<std::size_t>(latent);
    for (int l = 0; l < latent; ++l) acc += row[l] * t.fc1_act[l];
    t.fc2_pre[i] = acc;
  }
  t.fc2_act = t.fc2_pre;
  for (auto& v : t.fc2_act) v = v > T(0) ? v : T(0);

  x = Tensor4<T>::zeros(plan.bottleneck_res, plan.bottleneck_res, plan.bottleneck_res,
                        plan.bottleneck_ch);
  x.values = t.fc2_act;

  for (const auto& conv : plan.decoder) {
    if (conv.upsample_before) x = upsample_nearest2(x);
    t.dec_in.push_back(x);
    Tensor4<T> pre = conv3d_forward(x, conv_w(model, conv), conv_b(model, conv), conv.out_ch,
                                    model.config.kernel, 1);
    if (conv.skip_encoder >= 0) {
      const Tensor4<T>& skip = t.enc_act[conv.skip_encoder];
      for (std::size_t i = 0; i < pre.values.size(); ++i) pre.values[i] += skip.values[i];
    }
    x = conv.relu_after ? relu(pre) : pre;
    t.dec_pre.push_back(std::move(pre));
    t.dec_act.push_back(x);
  }
  t.output = x;
  return x;
}

template <typename T>
std::vector<T> backward(const Model<T>& model, const ForwardTape<T>& tape,
                        const Tensor4<T>& d_output) {
  const NetPlan plan = make_plan(model.config);
  const int L = static_cast<int>(plan.encoder.size());
  if (tape.enc_in.size() != static_cast<std::size_t>(L) ||
      tape.dec_in.size() != static_cast<std::size_t>(L)) {
    throw Error("validation", "tape does not match the architecture");
  }
  if (!d_output.same_shape(tape.output)) {
    throw Error("validation", "output gradient shape mismatch");
  }

  std::vector<T> grads(plan.param_count, T(0));
  std::vector<Tensor4<T>> skip_grads(L);

  Tensor4<T> d_act = d_output;
  for (int j = L - 1; j >= 0; --j) {
    const auto& conv = plan.decoder[j];
    Tensor4<T> d_pre = std::move(d_act);
    if (conv.relu_after) {
      const Tensor4<T>& pre = tape.dec_pre[j];
      for (std::size_t i = 0; i < d_pre.values.size(); ++i) {
        if (!(pre.values[i] > T(0))) d_pre.values[i] = T(0);
      }
    }
    if (conv.skip_encoder >= 0) skip_grads[conv.skip_encoder] = d_pre;
    Tensor4<T> d_in;
    conv3d_backward(tape.dec_in[j], conv_w(model, conv), conv.out_ch, model.config.kernel, 1,
                    d_pre, &d_in,
                    std::span<T>(grads.data() + conv.w_off, conv.w_len),
                    std::span<T>(grads.data() + conv.b_off, conv.b_len));
    d_act = conv.upsample_before ? upsample_nearest2_backward(d_in) : std::move(d_in);
  }

  // d_act now holds the gradient at the bottleneck reshape.
  const std::size_t n = plan.flat_len;
  const int latent = plan.latent;
  std::vector<T> d_fc2pre(d_act.values.begin(), d_act.values.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(tape.fc2_pre[i] > T(0))) d_fc2pre[i] = T(0);
  }
  T* dw2 = grads.data() + plan.fc2_w_off;
  T* db2 = grads.data() + plan.fc2_b_off;
  const T* w2 = model.params.data() + plan.fc2_w_off;
  std::vector<T> d_fc1act(latent, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    const T g = d_fc2pre[i];
    db2[i] += g;
    T* dwrow = dw2 + i * static_cast<std::size_t>(latent);
    const T* wrow = w2 + i * static_cast<std::size_t>(latent);
    for (int l = 0; l < latent; ++l) {
      dwrow[l] += g * tape.fc1_act[l];
      d_fc1act[l] += wrow[l] * g;
    }
  }

  std::vector<T> d_fc1pre = std::move(d_fc1act);
  for (int l = 0; l < latent; ++l) {
    if (!(tape.fc1_pre[l] > T(0))) d_fc1pre[l] = T(0);
  }
  T* dw1 = grads.data() + plan.fc1_w_off;
  T* db1 = grads.data() + plan.fc1_b_off;
  const T* w1 = model.params.data() + plan.fc1_w_off;
  std::vector<T> d_flat(n, T(0));
  for (int l = 0; l < latent; ++l) {
    const T g = d_fc1pre[l];
    db1[l] += g;
    T* dwrow = dw1 + static_cast<std::size_t>(l) * n;
    const T* wrow = w1 + static_cast<std::size_t>(l) * n;
    for (std::size_t i = 0; i < n; ++i) {
      dwrow[i] += g * tape.flat_in[i];
      d_flat[i] += wrow[i] * g;
    }
  }

  d_act = Tensor4<T>::zeros(plan.bottleneck_res, plan.bottleneck_res, plan.bottleneck_res,
                            plan.bottleneck_ch);
  d_act.values = std::move(d_flat);

  for (int i = L - 1; i >= 0; --i) {
    const auto& conv = plan.encoder[i];
    if (skip_grads[i].size() > 0) {
      for (std::size_t v = 0; v < d_act.values.size(); ++v) {
        d_act.values[v] += skip_grads[i].values[v];
      }
    }
    Tensor4<T> d_pre = std::move(d_act);
    const Tensor4<T>& pre = tape.enc_pre[i];
    for (std::size_t v = 0; v < d_pre.values.size(); ++v) {
      if (!(pre.values[v] > T(0))) d_pre.values[v] = T(0);
    }
    Tensor4<T> d_in;
    conv3d_backward(tape.enc_in[i], conv_w(model, conv), conv.out_ch, model.config.kernel,
                    conv.stride, d_pre, i > 0 ? &d_in : nullptr,
                    std::span<T>(grads.data() + conv.w_off, conv.w_len),
                    std::span<T>(grads.data() + conv.b_off, conv.b_len));
    d_act = std::move(d_in);
  }
  return grads;
}

template <typename T>
double mse_loss(const Tensor4<T>& output, const Tensor4<T>& target) {
  if (!output.same_shape(target)) throw Error("shape", "loss operands differ in shape");
  double acc = 0.0;
  for (std::size_t i = 0; i < output.values.size(); ++i) {
    const double d = static_cast<double>(output.values[i]) - static_cast<double>(target.values[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(output.values.size());
}

template <typename T>
Tensor4<T> mse_loss_grad(const Tensor4<T>& output, const Tensor4<T>& target) {
  if (!output.same_shape(target)) throw Error("shape", "loss operands differ in shape");
  Tensor4<T> g = output;
  const T scale = T(2) / static_cast<T>(output.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    g.values[i] = scale * (output.values[i] - target.values[i]);
  }
  return g;
}

template <typename T>
void adadelta_step(std::span<T> params, std::span<const T> grads, AdadeltaState<T>& state,
                   T rho, T epsilon) {
  if (params.size() != grads.size() || state.avg_sq_grad.size() != params.size() ||
      state.avg_sq_step.size() != params.size()) {
    throw Error("validation", "optimiser state does not match the parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    T& eg = state.avg_sq_grad[i];
    T& ex = state.avg_sq_step[i];
    eg = rho * eg + (T(1) - rho) * g * g;
    const T step = -std::sqrt(ex + epsilon) / std::sqrt(eg + epsilon) * g;
    ex = rho * ex + (T(1) - rho) * step * step;
    params[i] += step;
  }
}

Tensor4f patch_to_tensor(const Patch& patch, int size) {
  const std::size_t want = static_cast<std::size_t>(size) * size * size;
  if (patch.values.size() != want) {
    throw Error("validation", "patch payload does not match the patch size");
  }
  Tensor4f t = Tensor4f::zeros(size, size, size, 1);
  t.values = patch.values;
  return t;
}

void tensor_to_patch(const Tensor4f& tensor, Patch& patch) {
  if (tensor.nc != 1 || tensor.nx != tensor.ny || tensor.ny != tensor.nz) {
    throw Error("validation", "only cubic single-channel tensors convert to patches");
  }
  patch.values = tensor.values;
}

template Model<float> init_model<float>(const NetConfig&, std::uint64_t);
template Model<double> init_model<double>(const NetConfig&, std::uint64_t);
template Tensor4<float> conv3d_forward<float>(const Tensor4<float>&, std::span<const float>,
                                              std::span<const float>, int, int, int);
template Tensor4<double> conv3d_forward<double>(const Tensor4<double>&, std::span<const double>,
                                                std::span<const double>, int, int, int);
template void conv3d_backward<float>(const Tensor4<float>&, std::span<const float>, int, int, int,
                                     const Tensor4<float>&, Tensor4<float>*, std::span<float>,
                                     std::span<float>);
template void conv3d_backward<double>(const Tensor4<double>&, std::span<const double>, int, int,
                                      int, const Tensor4<double>&, Tensor4<double>*,
                                      std::span<double>, std::span<double>);
template Tensor4<float> upsample_nearest2<float>(const Tensor4<float>&);
template Tensor4<double> upsample_nearest2<double>(const Tensor4<double>&);
template Tensor4<float> forward<float>(const Model<float>&, const Tensor4<float>&,
                                       ForwardTape<float>*);
template Tensor4<double> forward<double>(const Model<double>&, const Tensor4<double>&,
                                         ForwardTape<double>*);
template std::vector<float> backward<float>(const Model<float>&, const ForwardTape<float>&,
                                            const Tensor4<float>&);
template std::vector<double> backward<double>(const Model<double>&, const ForwardTape<double>&,
                                              const Tensor4<double>&);
template double mse_loss<float>(const Tensor4<float>&, const Tensor4<float>&);
template double mse_loss<double>(const Tensor4<double>&, const Tensor4<double>&);
template Tensor4<float> mse_loss_grad<float>(const Tensor4<float>&, const Tensor4<float>&);
template Tensor4<double> mse_loss_grad<double>(const Tensor4<double>&, const Tensor4<double>&);
template void adadelta_step<float>(std::span<float>, std::span<const float>,
                                   AdadeltaState<float>&, float, float);
template void adadelta_step<double>(std::span<double>, std::span<const double>,
                                    AdadeltaState<double>&, double, double);

}  // namespace hullforge
