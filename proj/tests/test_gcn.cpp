#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lgl/errors.hpp"
#include "lgl/gcn.hpp"
#include "oracles.hpp"

using namespace lgl;
using oracle::Matrix;

TEST(GcLayer, IdentityAdjacencyIsPlainLinear) {
  Rng rng(1);
  Tensor h = oracle::random_tensor(4, 3, rng), w = oracle::random_tensor(3, 2, rng);
  Tensor out = gc_layer(Tensor::identity(4), h, w);
  Tensor hw = matmul(h, w);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.values()[i], hw.values()[i], 1e-11);
}

TEST(GcLayer, CompleteGraphAveragesAllRows) {
  Rng rng(2);
  Tensor h = oracle::random_tensor(5, 3, rng), w = oracle::random_tensor(3, 2, rng);
  Tensor out = gc_layer(Tensor::filled(5, 5, 1.0), h, w);
  std::vector<double> mean(3, 0.0);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < 3; ++k) mean[k] += h(i, k) / 5.0;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      double want = 0.0;
      for (std::size_t k = 0; k < 3; ++k) want += mean[k] * w(k, c);
      EXPECT_NEAR(out(i, c), want, 1e-12);
    }
  }
}

TEST(GcLayer, MatchesTripleLoopOracle) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Tensor a = oracle::random_tensor(6, 6, rng, 0.01, 1.0);
    Tensor h = oracle::random_tensor(6, 4, rng), w = oracle::random_tensor(4, 3, rng);
    const Matrix want = oracle::gc_layer(oracle::to_matrix(a), oracle::to_matrix(h), oracle::to_matrix(w));
    Tensor out = gc_layer(a, h, w);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(out(i, c), want[i][c], 1e-10);
  }
}

TEST(GcLayer, ConstantFeaturesArePreserved) {
  Rng rng(4);
  Tensor a = oracle::random_tensor(5, 5, rng, 0.0, 1.0);
  Tensor h = Tensor::filled(5, 2, 0.7);
  Tensor out = gc_layer(a, h, Tensor::identity(2));
  for (double v : out.values()) EXPECT_NEAR(v, 0.7, 1e-12);
}

TEST(GcLayer, ShapeMismatchThrows) {
  EXPECT_THROW(gc_layer(Tensor::identity(3), Tensor::zeros(4, 2), Tensor::zeros(2, 2)), DimensionError);
}

namespace {

ArchitectureConfig small_arch() {
  ArchitectureConfig arch;
  arch.embed_hidden = {5};
  arch.embed_dim = 3;
  arch.gc_widths = {4, 3};
  return arch;
}

// Straight-line composition of the model in plain loops.
Matrix scripted_forward(const Matrix& x, const ModelParams& p) {
  auto affine = [](const Matrix& in, const Tensor& w, const Tensor& b) {
    Matrix out = oracle::matmul(in, oracle::to_matrix(w));
    for (auto& row : out)
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += b.values()[j];
    return out;
  };
  Matrix e = x;
  for (std::size_t l = 0; l < p.embedder.weights.size(); ++l) {
    e = affine(e, p.embedder.weights[l], p.embedder.biases[l]);
    if (l + 1 < p.embedder.weights.size())
      for (auto& row : e)
        for (double& v : row) v = std::tanh(v);
  }
  const std::size_t n = x.size();
  const double t = oracle::softplus(p.edge.raw_temperature.item());
  const double theta = p.edge.threshold.item();
  Matrix a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = oracle::sigmoid(t * (theta - oracle::distance(e, i, j)));
  Matrix h = x;
  for (const auto& w : p.gcn.gc_weights) {
    h = oracle::gc_layer(a, h, oracle::to_matrix(w));
    for (auto& row : h)
      for (double& v : row) v = std::max(v, 0.0);
  }
  return affine(h, p.gcn.fc_weight, p.gcn.fc_bias);
}

}  // namespace

TEST(Forward, MatchesScriptedOracle) {
  Rng rng(5);
  Tensor x = oracle::random_tensor(8, 4, rng, -2, 2);
  ModelParams p = ModelParams::init(small_arch(), x, 3, rng);
  const Matrix want = scripted_forward(oracle::to_matrix(x), p);
  ForwardResult r = forward(x, p);
  ASSERT_EQ(r.logits.shape(), (Shape{8, 3}));
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(r.logits(i, c), want[i][c], 1e-10);
}

TEST(Forward, SingleNodeIsFinite) {
  Rng rng(6);
  Tensor x = oracle::random_tensor(1, 4, rng);
  ModelParams p = ModelParams::init(small_arch(), x, 2, rng);
  ForwardResult r = forward(x, p);
  EXPECT_EQ(r.adjacency.shape(), (Shape{1, 1}));
  const Matrix want = scripted_forward(oracle::to_matrix(x), p);
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_TRUE(std::isfinite(r.logits(0, c)));
    EXPECT_NEAR(r.logits(0, c), want[0][c], 1e-10);
  }
}

TEST(Forward, PermutationEquivariant) {
  Rng rng(7);
  Tensor x = oracle::random_tensor(9, 4, rng);
  ModelParams p = ModelParams::init(small_arch(), x, 3, rng);
  Tensor logits = forward(x, p).logits;
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<std::size_t> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Tensor lp = forward(gather_rows(x, perm), p).logits;
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(lp(i, c), logits(perm[i], c), 1e-12);
  }
}

TEST(Forward, DefaultArchitectureShapes) {
  Rng rng(8);
  Tensor x = oracle::random_tensor(6, 10, rng);
  ArchitectureConfig arch;
  ModelParams p = ModelParams::init(arch, x, 4, rng);
  EXPECT_EQ(p.embedder.weights.size(), arch.embed_hidden.size() + 1);
  EXPECT_EQ(p.embedder.output_dim(), 16u);
  ASSERT_EQ(p.gcn.gc_weights.size(), 2u);
  EXPECT_EQ(p.gcn.gc_weights[0].shape(), (Shape{10, 16}));
  EXPECT_EQ(p.gcn.gc_weights[1].shape(), (Shape{16, 8}));
  EXPECT_EQ(p.gcn.fc_weight.shape(), (Shape{8, 4}));
  // embedder 10*16+16, edge 2, gc 160+128, fc 32+4
  EXPECT_EQ(p.parameter_count(), 176u + 2u + 288u + 36u);
}

TEST(Predict, ArgmaxWithLowestIndexTies) {
  EXPECT_EQ(predict(Tensor::from(1, 3, {0.2, 0.9, 0.1}))[0], 1);
  EXPECT_EQ(predict(Tensor::from(1, 2, {0.5, 0.5}))[0], 0);
  Rng rng(9);
  Tensor l = oracle::random_tensor(20, 4, rng);
  const auto got = predict(l);
  for (std::size_t i = 0; i < 20; ++i) {
    int best = 0;
    for (int c = 1; c < 4; ++c)
      if (l(i, c) > l(i, best)) best = c;
    EXPECT_EQ(got[i], best);
  }
}

TEST(Predict, SoftmaxRowsSumToOne) {
  Tensor l = Tensor::from(2, 3, {1.0, 2.0, 3.0, 700.0, -700.0, 0.0});
  const auto p = softmax_rows(l);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
  EXPECT_NEAR(p[3], 1.0, 1e-15);
  EXPECT_NEAR(p[2] / p[1], std::exp(1.0), 1e-12);
}
