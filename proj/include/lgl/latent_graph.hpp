#pragma once

// Latent population graph: an MLP embeds node features, and edge weights are
// a sigmoid soft-threshold of embedded Euclidean distances,
//
//   a_ij = sigmoid(t * (theta - |f(x_i) - f(x_j)|)),   t = softplus(raw) > 0.
//
// Both t and theta are global learnable scalars.

#include <cstddef>
#include <span>
#include <vector>

#include "lgl/random.hpp"
#include "lgl/tensor.hpp"

namespace lgl {

struct EmbedderParams {
  // weights[l] is (in_l x out_l), biases[l] is (1 x out_l). Hidden layers use
  // tanh; the output layer is linear.
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  // widths = {input, hidden..., output}; at least two entries.
  static EmbedderParams glorot(std::span<const std::size_t> widths, Rng& rng);

  std::size_t input_dim() const { return weights.front().rows(); }
  std::size_t output_dim() const { return weights.back().cols(); }
  std::vector<Tensor> trainable() const;
};

struct EdgeParams {
  Tensor raw_temperature;  // 1x1, unconstrained
  Tensor threshold;        // 1x1

  static EdgeParams make(double temperature, double threshold);
  double temperature() const { return stable_softplus(raw_temperature.item()); }
  double threshold_value() const { return threshold.item(); }
  std::vector<Tensor> trainable() const { return {raw_temperature, threshold}; }
};

// Glorot-uniform weight matrix, scale sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

Tensor embed(const Tensor& x, const EmbedderParams& p);

// N x N soft adjacency of the embedded rows.
Tensor soft_adjacency(const Tensor& embedding, const EdgeParams& p);

// Threshold at the median off-diagonal distance of `e0`, temperature 2.
// Fewer than two rows gives threshold 1.
EdgeParams init_edge_params(const Tensor& e0);

inline constexpr double kInitialTemperature = 2.0;

// Dense N x N storage is capped here (20000^2 doubles is 3.2 GB per buffer).
inline constexpr std::size_t kMaxGraphNodes = 20000;

}  // namespace lgl
