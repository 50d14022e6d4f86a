#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lgl/gcn.hpp"
#include "lgl/tensor.hpp"

namespace lgl {

struct TrainConfig {
  std::size_t epochs = 600;
  double lr0 = 0.01;
  double lr_min = 0.0001;
  std::size_t lr_step = 100;
  // Number of piecewise-constant decays needed to go from lr0 to lr_min.
  std::size_t lr_decays = 5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t folds = 10;
  bool standardize = true;
  ArchitectureConfig arch;

  // (lr_min / lr0)^(1 / lr_decays), about 0.39811 for the defaults.
  double decay_factor() const;
  // Throws ContractError on epochs == 0 paths that make no sense, lr bounds,
  // or fewer than two folds.
  void validate() const;
};

// lr0 * factor^floor(epoch / lr_step), never below lr_min.
double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;

  static AdamState for_params(std::span<const Tensor> params);
};

// One bias-corrected Adam update applied in place to the parameter values.
// An empty gradient span counts as zeros.
void adam_step(std::span<Tensor> params, std::span<const std::span<const double>> grads,
               AdamState& state, double lr, const AdamSettings& settings = {});

// Convenience: uses each parameter's own grad() buffer.
void adam_step(std::span<Tensor> params, AdamState& state, double lr,
               const AdamSettings& settings = {});

}  // namespace lgl
