// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hullforge/patch.hpp"
#include "hullforge/tensor.hpp"

namespace hullforge {

/// Patch-denoising autoencoder: a symmetric convolutional hourglass over
/// occupancy patches with a fully connected bottleneck and additive skip
/// connections from encoder to decoder.
///
/// Encoder layer i (0-based) is a 3x3x3 same-padded convolution, stride 2
/// on even i and stride 1 on odd i, followed by ReLU.  The bottleneck
/// flattens to `latent_dim` and back through two ReLU fully connected
/// layers.  Decoder layer j mirrors encoder layer L-1-j: a nearest
/// neighbour 2x upsample first when the mirrored layer was strided, then a
/// convolution undoing its channel change, then ReLU everywhere except the
/// final layer, which stays linear.
///
/// skip_flags[i] = 1 exports encoder layer i's rectified output and adds it
/// onto the convolution output of decoder layer L-2-i (the one with the
/// matching shape) before that layer's ReLU.
struct NetConfig {
  int patch_size = 32;
  std::vector<int> encoder_channels;
  std::vector<int> skip_flags;
  int latent_dim = 100;
  int kernel = 3;

  /// Throws Error("config") when the shape bookkeeping cannot work out:
  /// empty ladder, non-0/1 flags, a flag on the last encoder layer (it has
  /// no shape-matched decoder partner), kernel != 3, or a patch size that
  /// the stride-2 layers do not divide evenly.
  void validate() const;

  /// Published ladder: channels 64,64,128,128,256, 100-D latent.
  static NetConfig full(int patch_size = 32);
  /// Small ladder with the same shape rules, sized for CPU training.
  static NetConfig desk(int patch_size = 32);
  /// Minimal two-layer ladder for finite-difference checks.
  static NetConfig tiny(int patch_size = 8);
};

enum class LayerKind : std::uint32_t {
  Conv3d = 1,
  DownsampleConv3d = 2,
  UpsampleConv3d = 3,
  Relu = 4,
  FullyConnected = 5,
};

/// Flat declarative description of the network, embedded in model files and
/// validated on load.  skip_tag pairs an exporting encoder entry with the
/// decoder entry that consumes it (0 = no skip).
struct LayerSpec {
  LayerKind kind = LayerKind::Conv3d;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int skip_tag = 0;
};

std::vector<LayerSpec> layer_chain(const NetConfig& config);

/// Execution plan compiled from a NetConfig: per-convolution shapes,
/// resolutions, and parameter offsets into the flat parameter vector.
struct NetPlan {
  struct Conv {
    int in_ch = 0, out_ch = 0;
    int in_res = 0, out_res = 0;  ///< cubic spatial resolutions
    int stride = 1;               ///< encoder only; decoder convs are stride 1
    bool upsample_before = false;
    int skip_encoder = -1;  ///< decoder: encoder layer index added pre-ReLU
    bool relu_after = true;
    std::size_t w_off = 0, w_len = 0, b_off = 0, b_len = 0;
  };
  std::vector<Conv> encoder;
  std::vector<Conv> decoder;
  int bottleneck_res = 0;
  int bottleneck_ch = 0;
  std::size_t flat_len = 0;  ///< bottleneck_res^3 * bottleneck_ch
  int latent = 0;
  std::size_t fc1_w_off = 0, fc1_b_off = 0, fc2_w_off = 0, fc2_b_off = 0;
  std::size_t param_count = 0;
};

NetPlan make_plan(const NetConfig& config);

template <typename T>
struct Model {
  NetConfig config;
  std::vector<T> params;
};

/// Fan-in-scaled uniform weights (bound sqrt(6/fan_in)), zero biases, all
/// drawn from the deterministic generator.
template <typename T>
Model<T> init_model(const NetConfig& config, std::uint64_t seed);

/// Same-padded cross-correlation with cubic kernels.  Weights are laid out
/// [out_ch][in_ch][kz][ky][kx]; output resolution is ceil(in/stride) per
/// axis.  Input element (x,y,z) pairs with kernel tap k via
/// in = out*stride + k - kernel/2, and taps outside the input contribute
/// zero.
template <typename T>
Tensor4<T> conv3d_forward(const Tensor4<T>& input, std::span<const T> weights,
                          std::span<const T> bias, int out_channels, int kernel, int stride);

/// Gradients of conv3d_forward.  d_weights and d_bias are accumulated into
/// (callers zero them first); d_input may be null when the input gradient
/// is not needed.
template <typename T>
void conv3d_backward(const Tensor4<T>& input, std::span<const T> weights, int out_channels,
                     int kernel, int stride, const Tensor4<T>& d_output, Tensor4<T>* d_input,
                     std::span<T> d_weights, std::span<T> d_bias);

/// Nearest-neighbour 2x upsample: out(x,y,z,c) = in(x/2, y/2, z/2, c).
template <typename T>
Tensor4<T> upsample_nearest2(const Tensor4<T>& input);

/// Intermediates recorded by forward() for backward().
template <typename T>
struct ForwardTape {
  std::vector<Tensor4<T>> enc_in, enc_pre, enc_act;
  std::vector<T> flat_in, fc1_pre, fc1_act, fc2_pre, fc2_act;
  std::vector<Tensor4<T>> dec_in;   ///< decoder conv input, after any upsample
  std::vector<Tensor4<T>> dec_pre;  ///< conv output plus skip, before ReLU
  std::vector<Tensor4<T>> dec_act;
  Tensor4<T> output;
};

/// Runs the hourglass on one patch tensor (patch_size^3, 1 channel).  The
/// output is the same shape and intentionally unclamped; occupancy range
/// enforcement happens at reassembly.
template <typename T>
Tensor4<T> forward(const Model<T>& model, const Tensor4<T>& input, ForwardTape<T>* tape = nullptr);

/// Parameter gradients for one sample, given d(loss)/d(output).  Layout
/// matches Model::params.
template <typename T>
std::vector<T> backward(const Model<T>& model, const ForwardTape<T>& tape,
                        const Tensor4<T>& d_output);

/// Mean squared error over all elements, and its gradient 2/N (out - target).
template <typename T>
double mse_loss(const Tensor4<T>& output, const Tensor4<T>& target);
template <typename T>
Tensor4<T> mse_loss_grad(const Tensor4<T>& output, const Tensor4<T>& target);

/// Adadelta accumulator state, one entry per parameter.
template <typename T>
struct AdadeltaState {
  std::vector<T> avg_sq_grad;
  std::vector<T> avg_sq_step;

  static AdadeltaState zeros(std::size_t n) {
    return {std::vector<T>(n, T(0)), std::vector<T>(n, T(0))};
  }
};

/// One Adadelta update in place:
///   Eg  <- rho Eg  + (1-rho) g^2
///   dx  <- -sqrt(Ex + eps) / sqrt(Eg + eps) * g
///   Ex  <- rho Ex  + (1-rho) dx^2
template <typename T>
void adadelta_step(std::span<T> params, std::span<const T> grads, AdadeltaState<T>& state,
                   T rho, T epsilon);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 8;
  double rho = 0.95;
  double epsilon = 1e-6;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct TrainSample {
  Tensor4f input;   ///< few-view patch
  Tensor4f target;  ///< many-view patch, same corner
};

struct TrainResult {
  Model<float> model;
  std::vector<double> epoch_loss;  ///< mean per-sample loss, one per epoch
};

/// Minibatch Adadelta training.  Epoch order reshuffles from the config
/// seed; batch gradients reduce in sample order, so results are bitwise
/// reproducible for a fixed config on any thread count.  Throws
/// Error("training") if the loss leaves the finite range.
TrainResult train(const NetConfig& net_config, const std::vector<TrainSample>& samples,
                  const TrainConfig& config);

/// Patch payloads and single-channel tensors share a layout, so these are
/// plain copies with shape checks.
Tensor4f patch_to_tensor(const Patch& patch, int size);
void tensor_to_patch(const Tensor4f& tensor, Patch& patch);

/// Binary model file: magic "VAE1", format version, the NetConfig numbers,
/// the layer chain, then all parameters as little-endian f32.  load_model
/// rejects bad magic, a chain that does not match its config, or a
/// truncated payload.  Save then load reproduces the model bit for bit.
void save_model(const Model<float>& model, const std::filesystem::path& path);
Model<float> load_model(const std::filesystem::path& path);

}  // namespace hullforge
