#pragma once

// Node classifier over a (learned or fixed) adjacency: spatial graph
// convolutions H' = D^-1 A H W with ReLU, then a fully connected head.

#include <cstddef>
#include <vector>

#include "lgl/latent_graph.hpp"
#include "lgl/random.hpp"
#include "lgl/tensor.hpp"

namespace lgl {

inline constexpr double kDegreeEpsilon = 1e-12;

struct GCNParams {
  std::vector<Tensor> gc_weights;  // no bias in graph convolutions
  Tensor fc_weight;                // (last width x C)
  Tensor fc_bias;                  // (1 x C)

  static GCNParams glorot(std::size_t input_dim, std::span<const std::size_t> widths,
                          std::size_t num_classes, Rng& rng);
  std::size_t num_classes() const { return fc_weight.cols(); }
  std::vector<Tensor> trainable() const;
};

struct ArchitectureConfig {
  // Hidden widths of the embedder; empty means a single linear map d -> k.
  // A tanh hidden layer lets the embedder separate training nodes through
  // nuisance columns, and held-out nodes then land among the wrong class.
  std::vector<std::size_t> embed_hidden{};
  std::size_t embed_dim = 16;
  std::vector<std::size_t> gc_widths{16, 8};
};

struct ModelParams {
  EmbedderParams embedder;
  EdgeParams edge;
  GCNParams gcn;

  // Glorot init for all weights; threshold from the initial embedding of `x`.
  static ModelParams init(const ArchitectureConfig& arch, const Tensor& x, std::size_t num_classes,
                          Rng& rng);
  std::vector<Tensor> trainable() const;
  std::size_t parameter_count() const;
};

// D^-1 A H W for one layer.
Tensor gc_layer(const Tensor& adjacency, const Tensor& h, const Tensor& w);

// Graph convolutions (ReLU after each) and the FC head on a given adjacency.
Tensor classify_on_graph(const Tensor& adjacency, const Tensor& x, const GCNParams& p);

struct ForwardResult {
  Tensor adjacency;
  Tensor logits;
};

// embed -> soft adjacency -> graph convolutions -> FC.
ForwardResult forward(const Tensor& x, const ModelParams& params);

// Row-wise argmax; ties go to the lowest class index.
std::vector<int> predict(const Tensor& logits);

// Row-wise softmax probabilities (N x C, row-major).
std::vector<double> softmax_rows(const Tensor& logits);

}  // namespace lgl
