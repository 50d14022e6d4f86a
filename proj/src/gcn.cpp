#include "lgl/gcn.hpp"

#include <algorithm>
#include <cmath>

#include "lgl/errors.hpp"

namespace lgl {

GCNParams GCNParams::glorot(std::size_t input_dim, std::span<const std::size_t> widths,
                            std::size_t num_classes, Rng& rng) {
  if (num_classes < 1) throw ContractError("classifier needs at least one class");
  GCNParams p;
  std::size_t in = input_dim;
  for (std::size_t w : widths) {
    p.gc_weights.push_back(glorot_uniform(in, w, rng));
    in = w;
  }
  p.fc_weight = glorot_uniform(in, num_classes, rng);
  p.fc_bias = Tensor::zeros(1, num_classes, true);
  return p;
}

std::vector<Tensor> GCNParams::trainable() const {
  std::vector<Tensor> out = gc_weights;
  out.push_back(fc_weight);
  out.push_back(fc_bias);
  return out;
}

ModelParams ModelParams::init(const ArchitectureConfig& arch, const Tensor& x,
                              std::size_t num_classes, Rng& rng) {
  std::vector<std::size_t> widths{x.cols()};
  widths.insert(widths.end(), arch.embed_hidden.begin(), arch.embed_hidden.end());
  widths.push_back(arch.embed_dim);
  ModelParams p;
  p.embedder = EmbedderParams::glorot(widths, rng);
  p.gcn = GCNParams::glorot(x.cols(), arch.gc_widths, num_classes, rng);
  p.edge = init_edge_params(embed(x.detach(), p.embedder));
  return p;
}

std::vector<Tensor> ModelParams::trainable() const {
  std::vector<Tensor> out = embedder.trainable();
  for (auto& t : edge.trainable()) out.push_back(t);
  for (auto& t : gcn.trainable()) out.push_back(t);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : trainable()) n += t.size();
  return n;
}

Tensor gc_layer(const Tensor& adjacency, const Tensor& h, const Tensor& w) {
  if (adjacency.rows() != adjacency.cols() || adjacency.cols() != h.rows()) {
    throw DimensionError("gc_layer: adjacency " + adjacency.shape().str() +
                         " does not match features " + h.shape().str());
  }
  // (D^-1 A)(H W) is cheaper than ((D^-1 A) H) W whenever W narrows.
  return matmul(row_normalize(adjacency, kDegreeEpsilon), matmul(h, w));
}

Tensor classify_on_graph(const Tensor& adjacency, const Tensor& x, const GCNParams& p) {
  if (adjacency.rows() != adjacency.cols() || adjacency.cols() != x.rows()) {
    throw DimensionError("classify_on_graph: adjacency " + adjacency.shape().str() +
                         " does not match features " + x.shape().str());
  }
  const Tensor propagation = row_normalize(adjacency, kDegreeEpsilon);
  Tensor h = x;
  for (const auto& w : p.gc_weights) h = relu(matmul(propagation, matmul(h, w)));
  return add_row_bias(matmul(h, p.fc_weight), p.fc_bias);
}

ForwardResult forward(const Tensor& x, const ModelParams& params) {
  Tensor a = soft_adjacency(embed(x, params.embedder), params.edge);
  Tensor logits = classify_on_graph(a, x, params.gcn);
  return {std::move(a), std::move(logits)};
}

std::vector<int> predict(const Tensor& logits) {
  const std::size_t n = logits.rows(), c = logits.cols();
  std::vector<int> out(n, 0);
  auto v = logits.values();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j) {
      if (v[i * c + j] > v[i * c + best]) best = j;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

std::vector<double> softmax_rows(const Tensor& logits) {
  const std::size_t n = logits.rows(), c = logits.cols();
  std::vector<double> p(logits.values().begin(), logits.values().end());
  for (std::size_t i = 0; i < n; ++i) {
    double* row = p.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (row[j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j) row[j] /= z;
  }
  return p;
}

}  // namespace lgl
