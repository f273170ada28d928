// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "hullforge/errors.hpp"
#include "hullforge/net.hpp"
#include "hullforge/rng.hpp"

using namespace hullforge;

namespace {

std::filesystem::path temp_dir(const char* leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "hullforge_tests" / leaf;
  std::filesystem::create_directories(dir);
  return dir;
}

Tensor4d random_tensor(int nx, int ny, int nz, int nc, Rng& rng, double lo = -1.0,
                       double hi = 1.0) {
  Tensor4d t = Tensor4d::zeros(nx, ny, nz, nc);
  for (double& v : t.values) v = rng.uniform(lo, hi);
  return t;
}

// Six-loop convolution written from the definition, kept deliberately free
// of the library's indexing helpers so it can catch layout mistakes.
Tensor4d conv_reference(const Tensor4d& in, const std::vector<double>& w,
                        const std::vector<double>& b, int oc_n, int k, int stride) {
  const int ox = (in.nx + stride - 1) / stride;
  const int oy = (in.ny + stride - 1) / stride;
  const int oz = (in.nz + stride - 1) / stride;
  Tensor4d out = Tensor4d::zeros(ox, oy, oz, oc_n);
  const int half = k / 2;
  for (int oc = 0; oc < oc_n; ++oc) {
    for (int z = 0; z < oz; ++z) {
      for (int y = 0; y < oy; ++y) {
        for (int x = 0; x < ox; ++x) {
          double acc = b[oc];
          for (int ic = 0; ic < in.nc; ++ic) {
            for (int kz = 0; kz < k; ++kz) {
              for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                  const int sx = x * stride + kx - half;
                  const int sy = y * stride + ky - half;
                  const int sz = z * stride + kz - half;
                  if (sx < 0 || sx >= in.nx || sy < 0 || sy >= in.ny || sz < 0 || sz >= in.nz) {
                    continue;
                  }
                  const std::size_t wi =
                      (((static_cast<std::size_t>(oc) * in.nc + ic) * k + kz) * k + ky) * k + kx;
                  acc += w[wi] * in.at(sx, sy, sz, ic);
                }
              }
            }
          }
          out.at(x, y, z, oc) = acc;
        }
      }
    }
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

TEST_SUITE("net") {
  TEST_CASE("convolution matches a longhand reference") {
    Rng rng(101);
    const Tensor4d in = random_tensor(5, 4, 3, 2, rng);
    const int oc = 3, k = 3;
    std::vector<double> w(static_cast<std::size_t>(oc) * in.nc * k * k * k);
    std::vector<double> b(oc);
    for (double& v : w) v = rng.uniform(-1, 1);
    for (double& v : b) v = rng.uniform(-1, 1);

    for (const int stride : {1, 2}) {
      const Tensor4d got = conv3d_forward<double>(in, w, b, oc, k, stride);
      const Tensor4d want = conv_reference(in, w, b, oc, k, stride);
      REQUIRE(got.same_shape(want));
      for (std::size_t i = 0; i < got.values.size(); ++i) {
        CHECK(got.values[i] == doctest::Approx(want.values[i]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("convolution output resolution rounds up") {
    Rng rng(103);
    const Tensor4d in = random_tensor(5, 5, 5, 1, rng);
    std::vector<double> w(27, 0.0);
    std::vector<double> b(1, 0.0);
    const Tensor4d out = conv3d_forward<double>(in, w, b, 1, 3, 2);
    CHECK(out.nx == 3);
    CHECK(out.ny == 3);
    CHECK(out.nz == 3);
  }

  TEST_CASE("centre-tap identity kernel reproduces the input") {
    Rng rng(107);
    const Tensor4d in = random_tensor(6, 6, 6, 2, rng);
    const int k = 3;
    std::vector<double> w(static_cast<std::size_t>(2) * 2 * 27, 0.0);
    std::vector<double> b(2, 0.0);
    for (int c = 0; c < 2; ++c) {
      // Tap (kz,ky,kx) = (1,1,1) of the matching channel.
      w[(((static_cast<std::size_t>(c) * 2 + c) * k + 1) * k + 1) * k + 1] = 1.0;
    }
    const Tensor4d out = conv3d_forward<double>(in, w, b, 2, 3, 1);
    CHECK(out.values == in.values);
  }

  TEST_CASE("all-ones kernel counts the interior neighbourhood") {
    Tensor4d in = Tensor4d::zeros(5, 5, 5, 1);
    for (double& v : in.values) v = 1.0;
    std::vector<double> w(27, 1.0);
    std::vector<double> b(1, 0.5);
    const Tensor4d out = conv3d_forward<double>(in, w, b, 1, 3, 1);
    CHECK(out.at(2, 2, 2, 0) == doctest::Approx(27.5));
    CHECK(out.at(0, 0, 0, 0) == doctest::Approx(8.5));  // Corner sees 2x2x2.
  }

  TEST_CASE("convolution is linear in its input") {
    Rng rng(109);
    const Tensor4d a = random_tensor(4, 4, 4, 2, rng);
    const Tensor4d b_in = random_tensor(4, 4, 4, 2, rng);
    std::vector<double> w(static_cast<std::size_t>(3) * 2 * 27);
    std::vector<double> zero_b(3, 0.0);
    for (double& v : w) v = rng.uniform(-1, 1);

    Tensor4d sum = a;
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += b_in.values[i];
    const Tensor4d fa = conv3d_forward<double>(a, w, zero_b, 3, 3, 1);
    const Tensor4d fb = conv3d_forward<double>(b_in, w, zero_b, 3, 3, 1);
    const Tensor4d fsum = conv3d_forward<double>(sum, w, zero_b, 3, 3, 1);
    for (std::size_t i = 0; i < fsum.values.size(); ++i) {
      CHECK(fsum.values[i] == doctest::Approx(fa.values[i] + fb.values[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("convolution backward satisfies the adjoint identity") {
    // For the linear map C(x) (zero bias), <d_out, C(v)> must equal
    // <C^T(d_out), v> for any v; same for the weight gradient against a
    // random weight direction.
    Rng rng(113);
    const Tensor4d in = random_tensor(5, 4, 3, 2, rng);
    const int oc = 2, k = 3;
    std::vector<double> w(static_cast<std::size_t>(oc) * in.nc * k * k * k);
    std::vector<double> zero_b(oc, 0.0);
    for (double& v : w) v = rng.uniform(-1, 1);

    for (const int stride : {1, 2}) {
      const Tensor4d out = conv3d_forward<double>(in, w, zero_b, oc, k, stride);
      Tensor4d d_out = Tensor4d::zeros(out.nx, out.ny, out.nz, out.nc);
      for (double& v : d_out.values) v = rng.uniform(-1, 1);

      Tensor4d d_in = Tensor4d::zeros(in.nx, in.ny, in.nz, in.nc);
      std::vector<double> d_w(w.size(), 0.0);
      std::vector<double> d_b(oc, 0.0);
      conv3d_backward<double>(in, w, oc, k, stride, d_out, &d_in, d_w, d_b);

      const Tensor4d v = random_tensor(in.nx, in.ny, in.nz, in.nc, rng);
      const Tensor4d cv = conv3d_forward<double>(v, w, zero_b, oc, k, stride);
      CHECK(dot(d_out.values, cv.values) ==
            doctest::Approx(dot(d_in.values, v.values)).epsilon(1e-10));

      std::vector<double> w_dir(w.size());
      for (double& x : w_dir) x = rng.uniform(-1, 1);
      const Tensor4d cw = conv3d_forward<double>(in, w_dir, zero_b, oc, k, stride);
      CHECK(dot(d_out.values, cw.values) == doctest::Approx(dot(d_w, w_dir)).epsilon(1e-10));

      // Bias gradient is the plain sum of d_out per output channel.
      for (int c = 0; c < oc; ++c) {
        double want = 0.0;
        for (int z = 0; z < d_out.nz; ++z) {
          for (int y = 0; y < d_out.ny; ++y) {
            for (int x = 0; x < d_out.nx; ++x) want += d_out.at(x, y, z, c);
          }
        }
        CHECK(d_b[c] == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("upsample repeats each source cell into a 2x2x2 block") {
    Rng rng(127);
    const Tensor4d in = random_tensor(3, 2, 4, 2, rng);
    const Tensor4d out = upsample_nearest2<double>(in);
    CHECK(out.nx == 6);
    CHECK(out.ny == 4);
    CHECK(out.nz == 8);
    CHECK(out.nc == 2);
    for (int c = 0; c < out.nc; ++c) {
      for (int z = 0; z < out.nz; ++z) {
        for (int y = 0; y < out.ny; ++y) {
          for (int x = 0; x < out.nx; ++x) {
            CHECK(out.at(x, y, z, c) == in.at(x / 2, y / 2, z / 2, c));
          }
        }
      }
    }
  }

  TEST_CASE("config validation rejects impossible ladders") {
    NetConfig bad = NetConfig::tiny();
    bad.encoder_channels.clear();
    bad.skip_flags.clear();
    CHECK_THROWS_AS(bad.validate(), Error);

    bad = NetConfig::tiny();
    bad.skip_flags = {1, 1};  // Last layer has no decoder partner.
    CHECK_THROWS_AS(bad.validate(), Error);

    bad = NetConfig::tiny();
    bad.skip_flags = {2, 0};
    CHECK_THROWS_AS(bad.validate(), Error);

    bad = NetConfig::tiny();
    bad.kernel = 5;
    CHECK_THROWS_AS(bad.validate(), Error);

    bad = NetConfig::tiny();
    bad.patch_size = 9;  // Not divisible by the stride-2 layer.
    CHECK_THROWS_AS(bad.validate(), Error);

    CHECK_NOTHROW(NetConfig::tiny().validate());
    CHECK_NOTHROW(NetConfig::desk().validate());
    CHECK_NOTHROW(NetConfig::full().validate());
  }

  TEST_CASE("parameter counts follow from the ladder arithmetic") {
    // Hand tally for the two-layer ladder on 8^3 patches, channels (2,2),
    // latent 4: conv 1->2 (56) + conv 2->2 (110), bottleneck flat
    // 4^3*2 = 128, fc 128->4 (516) + fc 4->128 (640), decoder conv 2->2
    // (110) + conv 2->1 (55).
    CHECK(make_plan(NetConfig::tiny()).param_count == 1487);
    // Same tally for the published ladder at patch 32.
    CHECK(make_plan(NetConfig::full()).param_count == 6615525);
  }

  TEST_CASE("forward preserves the patch shape") {
    for (const auto& config : {NetConfig::tiny(8), NetConfig::desk(16), NetConfig::desk(32)}) {
      const auto model = init_model<float>(config, 7);
      Tensor4f in = Tensor4f::zeros(config.patch_size, config.patch_size, config.patch_size, 1);
      Rng rng(11);
      for (float& v : in.values) v = static_cast<float>(rng.uniform());
      const Tensor4f out = forward(model, in);
      CHECK(out.nx == config.patch_size);
      CHECK(out.ny == config.patch_size);
      CHECK(out.nz == config.patch_size);
      CHECK(out.nc == 1);
      for (const float v : out.values) CHECK(std::isfinite(v));
    }
  }

  TEST_CASE("forward rejects a mis-sized input") {
    const auto model = init_model<float>(NetConfig::tiny(8), 7);
    Tensor4f in = Tensor4f::zeros(9, 9, 9, 1);
    CHECK_THROWS_AS(forward(model, in), Error);
  }

  TEST_CASE("initialisation is seeded and bias-free") {
    const NetConfig config = NetConfig::tiny();
    const auto a = init_model<double>(config, 42);
    const auto b = init_model<double>(config, 42);
    const auto c = init_model<double>(config, 43);
    CHECK(a.params == b.params);
    CHECK(a.params != c.params);

    const NetPlan plan = make_plan(config);
    for (std::size_t i = 0; i < plan.encoder[0].b_len; ++i) {
      CHECK(a.params[plan.encoder[0].b_off + i] == 0.0);
    }
    // Weight bound for the first conv: sqrt(6 / (1*27)).
    const double bound = std::sqrt(6.0 / 27.0);
    for (std::size_t i = 0; i < plan.encoder[0].w_len; ++i) {
      CHECK(std::abs(a.params[plan.encoder[0].w_off + i]) <= bound);
    }
  }

  TEST_CASE("skip connections change the output") {
    NetConfig with_skip = NetConfig::tiny();
    NetConfig without = with_skip;
    without.skip_flags.assign(without.skip_flags.size(), 0);

    const auto model = init_model<float>(with_skip, 19);
    Model<float> plain;
    plain.config = without;
    plain.params = model.params;  // Same layout: flags cost no parameters.

    Tensor4f in = Tensor4f::zeros(8, 8, 8, 1);
    Rng rng(21);
    for (float& v : in.values) v = static_cast<float>(rng.uniform());
    const Tensor4f a = forward(model, in);
    const Tensor4f b = forward(plain, in);
    float worst = 0.0f;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    }
    CHECK(worst > 1e-6f);
  }

  TEST_CASE("skip addition lands before the decoder ReLU") {
    // Zero the consuming decoder conv entirely: its pre-activation must
    // then equal the exported encoder activation bit for bit.
    const NetConfig config = NetConfig::tiny();
    auto model = init_model<float>(config, 23);
    const NetPlan plan = make_plan(config);
    REQUIRE(plan.decoder[0].skip_encoder == 0);
    for (std::size_t i = 0; i < plan.decoder[0].w_len; ++i) {
      model.params[plan.decoder[0].w_off + i] = 0.0f;
    }
    for (std::size_t i = 0; i < plan.decoder[0].b_len; ++i) {
      model.params[plan.decoder[0].b_off + i] = 0.0f;
    }

    Tensor4f in = Tensor4f::zeros(8, 8, 8, 1);
    Rng rng(29);
    for (float& v : in.values) v = static_cast<float>(rng.uniform());
    ForwardTape<float> tape;
    forward(model, in, &tape);
    CHECK(tape.dec_pre[0].values == tape.enc_act[0].values);
  }

  TEST_CASE("mse loss value and gradient") {
    Tensor4d out = Tensor4d::zeros(2, 1, 1, 1);
    Tensor4d target = Tensor4d::zeros(2, 1, 1, 1);
    out.values = {1.0, 0.5};
    target.values = {0.0, 0.5};
    CHECK(mse_loss(out, target) == doctest::Approx(0.5));
    const Tensor4d grad = mse_loss_grad(out, target);
    CHECK(grad.values[0] == doctest::Approx(1.0));
    CHECK(grad.values[1] == doctest::Approx(0.0));

    Tensor4d wrong = Tensor4d::zeros(3, 1, 1, 1);
    CHECK_THROWS_AS(mse_loss(out, wrong), Error);
  }

  TEST_CASE("analytic gradients match central differences") {
    const NetConfig config = NetConfig::tiny();
    auto model = init_model<double>(config, 301);
    Rng rng(303);
    // Move every parameter off its init point; biases start at zero and
    // would otherwise hide ordering mistakes.
    for (double& p : model.params) p += rng.uniform(-0.3, 0.3);

    Tensor4d input = Tensor4d::zeros(8, 8, 8, 1);
    for (double& v : input.values) v = rng.uniform(0.1, 0.9);
    Tensor4d target = Tensor4d::zeros(8, 8, 8, 1);
    for (double& v : target.values) v = rng.uniform(0.0, 1.0);

    ForwardTape<double> tape;
    const Tensor4d out = forward(model, input, &tape);
    const std::vector<double> analytic = backward(model, tape, mse_loss_grad(out, target));
    REQUIRE(analytic.size() == model.params.size());

    const double h = 1e-3;
    double worst = 0.0;
    std::size_t worst_index = 0;
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      const double saved = model.params[i];
      model.params[i] = saved + h;
      const double plus = mse_loss(forward(model, input), target);
      model.params[i] = saved - h;
      const double minus = mse_loss(forward(model, input), target);
      model.params[i] = saved;
      const double fd = (plus - minus) / (2 * h);
      const double rel =
          std::abs(analytic[i] - fd) / std::max({std::abs(analytic[i]), std::abs(fd), 1e-3});
      if (rel > worst) {
        worst = rel;
        worst_index = i;
      }
    }
    INFO("worst parameter " << worst_index << " rel err " << worst);
    CHECK(worst < 1e-3);
  }

  TEST_CASE("backward of a zero output gradient is zero") {
    const auto model = init_model<double>(NetConfig::tiny(), 31);
    Rng rng(37);
    Tensor4d in = Tensor4d::zeros(8, 8, 8, 1);
    for (double& v : in.values) v = rng.uniform();
    ForwardTape<double> tape;
    forward(model, in, &tape);
    const Tensor4d zero = Tensor4d::zeros(8, 8, 8, 1);
    const auto grads = backward(model, tape, zero);
    for (const double g : grads) CHECK(g == 0.0);
  }

  TEST_CASE("adadelta leaves parameters alone on zero gradient") {
    std::vector<double> params{1.0, -2.0};
    std::vector<double> grads{0.0, 0.0};
    auto state = AdadeltaState<double>::zeros(2);
    state.avg_sq_grad = {1.0, 4.0};
    adadelta_step<double>(params, grads, state, 0.95, 1e-6);
    CHECK(params[0] == 1.0);
    CHECK(params[1] == -2.0);
    CHECK(state.avg_sq_grad[0] == doctest::Approx(0.95));
    CHECK(state.avg_sq_grad[1] == doctest::Approx(3.8));
  }

  TEST_CASE("adadelta first step follows the update formulae") {
    const double rho = 0.95, eps = 1e-6, g = 0.5;
    std::vector<double> params{2.0};
    std::vector<double> grads{g};
    auto state = AdadeltaState<double>::zeros(1);
    adadelta_step<double>(params, grads, state, rho, eps);

    const double eg = (1 - rho) * g * g;
    const double dx = -std::sqrt(eps) / std::sqrt(eg + eps) * g;
    CHECK(params[0] == doctest::Approx(2.0 + dx).epsilon(1e-12));
    CHECK(state.avg_sq_grad[0] == doctest::Approx(eg).epsilon(1e-12));
    CHECK(state.avg_sq_step[0] == doctest::Approx((1 - rho) * dx * dx).epsilon(1e-12));
  }

  TEST_CASE("adadelta drives a scalar quadratic toward zero") {
    std::vector<double> x{1.0};
    auto state = AdadeltaState<double>::zeros(1);
    double prev = x[0];
    for (int step = 0; step < 200; ++step) {
      std::vector<double> g{2.0 * x[0]};
      adadelta_step<double>(x, g, state, 0.95, 1e-6);
      if (step > 0) CHECK(x[0] < prev);
      CHECK(x[0] > 0.0);
      prev = x[0];
    }
    // Pinned against an independent float64 transliteration of the same
    // recurrence.
    CHECK(x[0] == doctest::Approx(0.31460493385769905).epsilon(1e-9));
  }

  TEST_CASE("training on identity pairs reduces the loss deterministically") {
    const NetConfig net_config = NetConfig::tiny();
    std::vector<TrainSample> samples;
    Rng rng(401);
    for (int s = 0; s < 12; ++s) {
      TrainSample sample;
      sample.input = Tensor4f::zeros(8, 8, 8, 1);
      for (float& v : sample.input.values) v = static_cast<float>(rng.uniform());
      sample.target = sample.input;
      samples.push_back(std::move(sample));
    }
    TrainConfig config;
    config.epochs = 4;
    config.batch_size = 4;
    config.seed = 9;

    const TrainResult a = train(net_config, samples, config);
    REQUIRE(a.epoch_loss.size() == 4);
    CHECK(a.epoch_loss.back() < a.epoch_loss.front());
    for (const double l : a.epoch_loss) CHECK(std::isfinite(l));

    const TrainResult b = train(net_config, samples, config);
    CHECK(a.model.params == b.model.params);
    CHECK(a.epoch_loss == b.epoch_loss);

    TrainConfig threaded = config;
    threaded.threads = 2;
    const TrainResult c = train(net_config, samples, threaded);
    CHECK(a.model.params == c.model.params);
    CHECK(a.epoch_loss == c.epoch_loss);

    TrainConfig reseeded = config;
    reseeded.seed = 10;
    const TrainResult d = train(net_config, samples, reseeded);
    CHECK(a.model.params != d.model.params);
  }

  TEST_CASE("training validates its inputs") {
    CHECK_THROWS_AS(train(NetConfig::tiny(), {}, TrainConfig{}), Error);

    std::vector<TrainSample> bad(1);
    bad[0].input = Tensor4f::zeros(8, 8, 8, 1);
    bad[0].target = Tensor4f::zeros(4, 4, 4, 1);
    CHECK_THROWS_AS(train(NetConfig::tiny(), bad, TrainConfig{}), Error);
  }

  TEST_CASE("patch and tensor conversions round trip") {
    Patch p;
    p.corner = {4, 8, 12};
    p.values.resize(64);
    Rng rng(61);
    for (float& v : p.values) v = static_cast<float>(rng.uniform());
    const Tensor4f t = patch_to_tensor(p, 4);
    CHECK(t.nx == 4);
    CHECK(t.nc == 1);
    Patch back = p;
    std::fill(back.values.begin(), back.values.end(), 0.0f);
    tensor_to_patch(t, back);
    CHECK(back.values == p.values);
    CHECK_THROWS_AS(patch_to_tensor(p, 5), Error);
  }

  TEST_CASE("model files round trip bit for bit") {
    const auto dir = temp_dir("net_model");
    const auto model = init_model<float>(NetConfig::tiny(), 71);
    const auto path = dir / "m.vae";
    save_model(model, path);
    const Model<float> back = load_model(path);
    CHECK(back.params == model.params);
    CHECK(back.config.patch_size == model.config.patch_size);
    CHECK(back.config.encoder_channels == model.config.encoder_channels);
    CHECK(back.config.skip_flags == model.config.skip_flags);
    CHECK(back.config.latent_dim == model.config.latent_dim);
  }

  TEST_CASE("model loader rejects corruption") {
    const auto dir = temp_dir("net_model_bad");
    const auto model = init_model<float>(NetConfig::tiny(), 73);
    const auto path = dir / "m.vae";
    save_model(model, path);

    const auto read_all = [](const std::filesystem::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::vector<char>((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    };
    const auto write_all = [](const std::filesystem::path& p, const std::vector<char>& bytes) {
      std::ofstream out(p, std::ios::binary);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    };
    const std::vector<char> good = read_all(path);

    // A flipped latent width no longer matches the stored layer chain.
    std::vector<char> tweaked = good;
    tweaked[12] = 5;
    write_all(dir / "latent.vae", tweaked);
    try {
      load_model(dir / "latent.vae");
      FAIL("expected a chain mismatch");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("layer chain") != std::string::npos);
    }

    std::vector<char> chopped = good;
    chopped.resize(chopped.size() - 9);
    write_all(dir / "short.vae", chopped);
    try {
      load_model(dir / "short.vae");
      FAIL("expected a truncation error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }

    std::vector<char> wrong_magic = good;
    wrong_magic[0] = 'X';
    write_all(dir / "magic.vae", wrong_magic);
    CHECK_THROWS_AS(load_model(dir / "magic.vae"), Error);
  }

  TEST_CASE("layer chain mirrors the ladder") {
    const auto chain = layer_chain(NetConfig::tiny());
    REQUIRE(chain.size() == 11);
    CHECK(chain[0].kind == LayerKind::DownsampleConv3d);
    CHECK(chain[0].skip_tag == 1);
    CHECK(chain[2].kind == LayerKind::Conv3d);
    CHECK(chain[4].kind == LayerKind::FullyConnected);
    CHECK(chain[8].kind == LayerKind::Conv3d);
    CHECK(chain[8].skip_tag == 1);  // Consumes what chain[0] exports.
    CHECK(chain[10].kind == LayerKind::UpsampleConv3d);
    CHECK(chain[10].out_channels == 1);
  }
}
