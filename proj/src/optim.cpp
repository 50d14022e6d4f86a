#include "lgl/optim.hpp"

#include <algorithm>
#include <cmath>

#include "lgl/errors.hpp"

namespace lgl {

double TrainConfig::decay_factor() const {
  if (lr_decays == 0) return 1.0;
  return std::pow(lr_min / lr0, 1.0 / static_cast<double>(lr_decays));
}

void TrainConfig::validate() const {
  if (!(lr_min > 0.0 && lr_min <= lr0)) {
    throw ContractError("TrainConfig: need 0 < lr_min <= lr0");
  }
  if (lr_step == 0) throw ContractError("TrainConfig: lr_step must be positive");
  if (folds < 2) throw ContractError("TrainConfig: fold count must be at least 2");
  if (arch.embed_dim == 0) throw ContractError("TrainConfig: embedding dimension must be positive");
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
  const double k = static_cast<double>(epoch / cfg.lr_step);
  return std::max(cfg.lr_min, cfg.lr0 * std::pow(cfg.decay_factor(), k));
}

AdamState AdamState::for_params(std::span<const Tensor> params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.size(), 0.0);
    s.v.emplace_back(p.size(), 0.0);
  }
  return s;
}

void adam_step(std::span<Tensor> params, std::span<const std::span<const double>> grads,
               AdamState& state, double lr, const AdamSettings& settings) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ContractError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                        std::to_string(grads.size()) + " gradients, " +
                        std::to_string(state.m.size()) + " moment buffers");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(settings.beta1, t);
  const double c2 = 1.0 - std::pow(settings.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto value = params[p].mutable_values();
    auto& m = state.m[p];
    auto& v = state.v[p];
    const auto g = grads[p];
    if (m.size() != value.size() || (!g.empty() && g.size() != value.size())) {
      throw ContractError("adam_step: buffer shape mismatch for parameter " + std::to_string(p));
    }
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      m[i] = settings.beta1 * m[i] + (1.0 - settings.beta1) * gi;
      v[i] = settings.beta2 * v[i] + (1.0 - settings.beta2) * gi * gi;
      value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + settings.eps);
    }
  }
}

void adam_step(std::span<Tensor> params, AdamState& state, double lr,
               const AdamSettings& settings) {
  std::vector<std::span<const double>> grads;
  grads.reserve(params.size());
  for (const auto& p : params) grads.push_back(p.grad());
  adam_step(params, grads, state, lr, settings);
}

}  // namespace lgl
