#include "lgl/latent_graph.hpp"

#include <algorithm>
#include <cmath>

#include "lgl/errors.hpp"

namespace lgl {

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double scale = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> w(fan_in * fan_out);
  for (double& v : w) v = rng.uniform(-scale, scale);
  return Tensor::from(fan_in, fan_out, std::move(w), true);
}

EmbedderParams EmbedderParams::glorot(std::span<const std::size_t> widths, Rng& rng) {
  if (widths.size() < 2) throw ContractError("embedder needs at least input and output widths");
  EmbedderParams p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    p.weights.push_back(glorot_uniform(widths[l], widths[l + 1], rng));
    p.biases.push_back(Tensor::zeros(1, widths[l + 1], true));
  }
  return p;
}

std::vector<Tensor> EmbedderParams::trainable() const {
  std::vector<Tensor> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(weights[l]);
    out.push_back(biases[l]);
  }
  return out;
}

EdgeParams EdgeParams::make(double temperature, double threshold) {
  return {Tensor::scalar(inverse_softplus(temperature), true), Tensor::scalar(threshold, true)};
}

Tensor embed(const Tensor& x, const EmbedderParams& p) {
  if (p.weights.empty()) throw ContractError("embed: embedder has no layers");
  if (x.cols() != p.input_dim()) {
    throw DimensionError("embed: features have width " + std::to_string(x.cols()) +
                         " but the embedder expects " + std::to_string(p.input_dim()));
  }
  Tensor h = x;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    h = add_row_bias(matmul(h, p.weights[l]), p.biases[l]);
    if (l + 1 < p.weights.size()) h = tanh(h);
  }
  return h;
}

Tensor soft_adjacency(const Tensor& embedding, const EdgeParams& p) {
  if (embedding.rows() > kMaxGraphNodes) {
    throw ContractError("soft_adjacency: " + std::to_string(embedding.rows()) +
                        " nodes exceeds the dense limit of " + std::to_string(kMaxGraphNodes));
  }
  const Tensor dist = pairwise_euclidean(embedding);
  const Tensor t = softplus(p.raw_temperature);
  return sigmoid(scale_by(t, subtract_from_scalar(p.threshold, dist)));
}

EdgeParams init_edge_params(const Tensor& e0) {
  const std::size_t n = e0.rows();
  if (n < 2) return EdgeParams::make(kInitialTemperature, 1.0);
  const Tensor d = pairwise_euclidean(e0.detach());
  std::vector<double> upper;
  upper.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(d(i, j));
  }
  const std::size_t mid = upper.size() / 2;
  std::nth_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(mid), upper.end());
  double median = upper[mid];
  if (upper.size() % 2 == 0) {
    const double lower = *std::max_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  return EdgeParams::make(kInitialTemperature, median);
}

}  // namespace lgl
