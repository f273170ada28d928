// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numeric>
#include <string>

#include "hullforge/errors.hpp"
#include "hullforge/net.hpp"
#include "hullforge/parallel.hpp"
#include "hullforge/rng.hpp"

namespace hullforge {

TrainResult train(const NetConfig& net_config, const std::vector<TrainSample>& samples,
                  const TrainConfig& config) {
  const NetPlan plan = make_plan(net_config);
  if (samples.empty()) throw Error("training", "no training samples");
  if (config.epochs <= 0) throw Error("training", "epoch count must be positive");
  if (config.batch_size <= 0) throw Error("training", "batch size must be positive");
  const int p = net_config.patch_size;
  for (const auto& s : samples) {
    if (s.input.nx != p || s.input.ny != p || s.input.nz != p || s.input.nc != 1 ||
        !s.input.same_shape(s.target)) {
      throw Error("training", "sample shape does not match the patch size");
    }
  }

  TrainResult result;
  result.model = init_model<float>(net_config, config.seed);
  AdadeltaState<float> state = AdadeltaState<float>::zeros(plan.param_count);
  Rng shuffle_rng = Rng(config.seed).fork(17);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<std::vector<float>> slot_grads(batch);
  std::vector<double> slot_loss(batch);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min(batch, order.size() - start);
      // Workers fill disjoint slots; the reduction below walks the slots in
      // sample order, so the update is bitwise identical on any thread
      // count.
      parallel_for_chunks(count, config.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
          const TrainSample& sample = samples[order[start + s]];
          ForwardTape<float> tape;
          const Tensor4f out = forward(result.model, sample.input, &tape);
          slot_loss[s] = mse_loss(out, sample.target);
          slot_grads[s] = backward(result.model, tape, mse_loss_grad(out, sample.target));
        }
      });

      std::vector<double> grad_acc(plan.param_count, 0.0);
      double batch_loss = 0.0;
      for (std::size_t s = 0; s < count; ++s) {
        batch_loss += slot_loss[s];
        const auto& g = slot_grads[s];
        for (std::size_t i = 0; i < plan.param_count; ++i) grad_acc[i] += g[i];
      }
      if (!std::isfinite(batch_loss)) {
        throw Error("training", "loss diverged in epoch " + std::to_string(epoch));
      }
      epoch_loss += batch_loss;

      std::vector<float> grad(plan.param_count);
      const double inv = 1.0 / static_cast<double>(count);
      for (std::size_t i = 0; i < plan.param_count; ++i) {
        grad[i] = static_cast<float>(grad_acc[i] * inv);
      }
      adadelta_step(std::span<float>(result.model.params), std::span<const float>(grad), state,
                    static_cast<float>(config.rho), static_cast<float>(config.epsilon));
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

}  // namespace hullforge
