#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lgl/errors.hpp"
#include "lgl/tensor.hpp"
#include "oracles.hpp"

using namespace lgl;

namespace {

double fd_error(std::vector<Tensor> leaves, const std::function<Tensor()>& f) {
  return oracle::fd_relative_error([&] { return f().item(); }, [&] { backward(f()); }, leaves);
}

}  // namespace

TEST(Tensor, FactoriesAndShape) {
  Tensor z = Tensor::zeros(2, 3);
  EXPECT_EQ(z.shape(), (Shape{2, 3}));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  Tensor i = Tensor::identity(3);
  EXPECT_EQ(i(1, 1), 1.0);
  EXPECT_EQ(i(1, 2), 0.0);
  EXPECT_THROW(Tensor::from(2, 2, {1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor::zeros(2, 2).item(), DimensionError);
  EXPECT_EQ(Tensor::scalar(4.5).item(), 4.5);
}

TEST(Tensor, MatmulMatchesTripleLoop) {
  Rng rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 1 + rng.index(7), k = 1 + rng.index(7), m = 1 + rng.index(7);
    Tensor a = oracle::random_tensor(n, k, rng), b = oracle::random_tensor(k, m, rng);
    const auto want = oracle::matmul(oracle::to_matrix(a), oracle::to_matrix(b));
    Tensor c = matmul(a, b);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(c(i, j), want[i][j], 1e-12);
  }
  EXPECT_THROW(matmul(Tensor::zeros(2, 3), Tensor::zeros(2, 3)), DimensionError);
}

TEST(Tensor, ElementwiseValues) {
  Tensor a = Tensor::from(1, 3, {-1.0, 0.0, 2.0});
  Tensor b = Tensor::from(1, 3, {3.0, 4.0, 5.0});
  EXPECT_EQ(add(a, b).values()[2], 7.0);
  EXPECT_EQ(subtract(a, b).values()[0], -4.0);
  EXPECT_EQ(hadamard(a, b).values()[2], 10.0);
  EXPECT_EQ(scalar_mul(a, -2.0).values()[0], 2.0);
  EXPECT_EQ(relu(a).values()[0], 0.0);
  EXPECT_EQ(relu(a).values()[2], 2.0);
  EXPECT_NEAR(tanh(a).values()[2], std::tanh(2.0), 1e-15);
  EXPECT_NEAR(sigmoid(a).values()[0], oracle::sigmoid(-1.0), 1e-15);
  EXPECT_NEAR(softplus(a).values()[2], oracle::softplus(2.0), 1e-15);
  EXPECT_EQ(sum(b).item(), 12.0);
  EXPECT_EQ(scale_by(Tensor::scalar(2.0), b).values()[1], 8.0);
  EXPECT_EQ(subtract_from_scalar(Tensor::scalar(1.0), b).values()[1], -3.0);
  EXPECT_EQ(add_row_bias(Tensor::zeros(2, 3), b)(1, 2), 5.0);
  EXPECT_THROW(add(a, Tensor::zeros(3, 1)), DimensionError);
  EXPECT_THROW(scale_by(Tensor::zeros(1, 2), b), DimensionError);
}

TEST(Tensor, StableScalarsAtExtremes) {
  EXPECT_EQ(stable_sigmoid(-800.0), 0.0);
  EXPECT_EQ(stable_sigmoid(800.0), 1.0);
  EXPECT_TRUE(std::isfinite(stable_softplus(800.0)));
  EXPECT_NEAR(stable_softplus(800.0), 800.0, 1e-12);
  EXPECT_NEAR(stable_softplus(-50.0), std::exp(-50.0), 1e-30);
  for (double y : {1e-6, 0.3, 2.0, 40.0}) EXPECT_NEAR(stable_softplus(inverse_softplus(y)), y, 1e-12 * std::max(1.0, y));
  EXPECT_THROW(inverse_softplus(0.0), ContractError);
}

TEST(Tensor, PairwiseDistancesMatchPerPair) {
  Rng rng(2);
  Tensor e = oracle::random_tensor(6, 3, rng);
  Tensor d = pairwise_euclidean(e);
  const auto m = oracle::to_matrix(e);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(d(i, i), 0.0);
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(d(i, j), oracle::distance(m, i, j), 1e-12);
  }
}

TEST(Tensor, PairwiseGradientAtCoincidentPointsIsFinite) {
  Tensor e = Tensor::from(3, 2, {1.0, 1.0, 1.0, 1.0, 0.0, 2.0}, true);
  backward(sum(pairwise_euclidean(e)));
  for (double g : e.grad()) EXPECT_TRUE(std::isfinite(g));
  // rows 0 and 1 coincide, so their pull on each other cancels
  EXPECT_NEAR(e.grad()[0], e.grad()[2], 1e-12);
}

TEST(Tensor, RowNormalize) {
  Tensor a = Tensor::from(2, 2, {1.0, 3.0, 2.0, 2.0});
  Tensor p = row_normalize(a);
  EXPECT_NEAR(p(0, 0), 0.25, 1e-12);
  EXPECT_NEAR(p(1, 1), 0.5, 1e-12);
  try {
    row_normalize(Tensor::from(2, 2, {1.0, 1.0, 0.0, 0.0}), 0.0);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("node 1"), std::string::npos);
  }
}

TEST(Tensor, CrossEntropyMatchesHandComputed) {
  Tensor logits = Tensor::from(3, 2, {0.0, 0.0, 2.0, 0.0, 5.0, -5.0});
  const std::vector<int> labels{0, 1, 0};
  const std::vector<std::uint8_t> mask{1, 1, 0};
  const double want = 0.5 * (std::log(2.0) + (std::log(std::exp(2.0) + 1.0)));
  EXPECT_NEAR(row_softmax_cross_entropy(logits, labels, mask).item(), want, 1e-12);
  const std::vector<std::uint8_t> none{0, 0, 0};
  EXPECT_THROW(row_softmax_cross_entropy(logits, labels, none), ContractError);
  const std::vector<int> bad{0, 2, 0};
  EXPECT_THROW(row_softmax_cross_entropy(logits, bad, mask), ContractError);
}

TEST(Tensor, CrossEntropyHugeLogitsStayFinite) {
  Tensor logits = Tensor::from(1, 3, {1000.0, -1000.0, 0.0}, true);
  const std::vector<int> labels{1};
  const std::vector<std::uint8_t> mask{1};
  Tensor loss = row_softmax_cross_entropy(logits, labels, mask);
  EXPECT_NEAR(loss.item(), 2000.0, 1e-9);
  backward(loss);
  for (double g : logits.grad()) EXPECT_TRUE(std::isfinite(g));
}

TEST(Tensor, ConcatAndGather) {
  Tensor a = Tensor::from(1, 2, {1, 2}), b = Tensor::from(2, 2, {3, 4, 5, 6});
  Tensor c = concat_rows(a, b);
  EXPECT_EQ(c.shape(), (Shape{3, 2}));
  EXPECT_EQ(c(2, 1), 6.0);
  const std::vector<std::size_t> rows{2, 0, 2};
  Tensor g = gather_rows(c, rows);
  EXPECT_EQ(g(0, 0), 5.0);
  EXPECT_EQ(g(1, 1), 2.0);
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(gather_rows(c, bad), DimensionError);
  EXPECT_THROW(concat_rows(a, Tensor::zeros(1, 3)), DimensionError);
}

TEST(Autodiff, GatherAccumulatesRepeatedRows) {
  Tensor x = Tensor::from(2, 1, {1.0, 2.0}, true);
  const std::vector<std::size_t> rows{1, 1, 0};
  backward(sum(gather_rows(x, rows)));
  EXPECT_EQ(x.grad()[0], 1.0);
  EXPECT_EQ(x.grad()[1], 2.0);
}

TEST(Autodiff, SharedSubexpressionGetsBothPaths) {
  // f = sum(x * x) + sum(x): df/dx = 2x + 1
  Tensor x = Tensor::from(1, 3, {1.0, -2.0, 0.5}, true);
  backward(add(sum(hadamard(x, x)), sum(x)));
  EXPECT_DOUBLE_EQ(x.grad()[0], 3.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], -3.0);
  EXPECT_DOUBLE_EQ(x.grad()[2], 2.0);
}

TEST(Autodiff, BackwardResetsStaleGradients) {
  Tensor x = Tensor::from(1, 2, {1.0, 2.0}, true);
  backward(sum(x));
  backward(sum(x));
  EXPECT_EQ(x.grad()[0], 1.0);
}

TEST(Autodiff, BackwardRequiresScalarLoss) {
  Tensor x = Tensor::from(1, 2, {1.0, 2.0}, true);
  EXPECT_THROW(backward(relu(x)), ContractError);
}

TEST(Autodiff, ConstantsRecordNothing) {
  Tensor x = Tensor::from(1, 2, {1.0, 2.0});
  Tensor y = relu(x);
  EXPECT_TRUE(y.is_leaf());
  EXPECT_FALSE(y.requires_grad());
}

TEST(Autodiff, TapeIsInForwardOrderAndReplaysEachOpOnce) {
  Tensor w = Tensor::from(2, 2, {1, 2, 3, 4}, true);
  Tensor x = Tensor::from(1, 2, {1, -1});
  Tensor loss = sum(relu(matmul(x, w)));
  ComputationTape tape = ComputationTape::record(loss);
  const auto names = tape.op_names();
  ASSERT_EQ(names.size(), 3u);
  EXPECT_EQ(names[0], "matmul");
  EXPECT_EQ(names[1], "relu");
  EXPECT_EQ(names[2], "sum");
  const double one = 1.0;
  EXPECT_EQ(tape.replay_adjoints(loss, {&one, 1}), 3u);
  // x w = [-2, -2], relu kills everything
  for (double g : w.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Autodiff, DetachCutsTheTape) {
  Tensor x = Tensor::from(1, 1, {3.0}, true);
  Tensor y = hadamard(x, x).detach(true);
  backward(sum(hadamard(y, x)));
  EXPECT_DOUBLE_EQ(x.grad()[0], 9.0);
  EXPECT_DOUBLE_EQ(y.grad()[0], 3.0);
}

// Per-op central differences, an independent check of each adjoint.
TEST(Autodiff, FiniteDifferencesPerOp) {
  Rng rng(3);
  Tensor r = oracle::random_tensor(4, 3, rng);
  auto leaf = [&](std::size_t n, std::size_t m, double lo = -1, double hi = 1) {
    return oracle::random_tensor(n, m, rng, lo, hi, true);
  };
  Tensor a = leaf(4, 3), b = leaf(4, 3), w = leaf(3, 3), s = leaf(1, 1), bias = leaf(1, 3);
  Tensor pos = leaf(4, 3, 0.1, 1.0);
  std::vector<Tensor> kinks{Tensor::from(4, 3, {0.3, -0.4, 0.5, -0.6, 0.7, -0.2, 0.9, -0.8, 0.25, -0.35, 0.45, -0.55}, true)};
  auto proj = [&](const Tensor& t) { return sum(hadamard(t, r)); };
  EXPECT_LT(fd_error({a, w}, [&] { return proj(matmul(a, w)); }), 1e-7);
  EXPECT_LT(fd_error({a, b}, [&] { return proj(add(a, b)); }), 1e-7);
  EXPECT_LT(fd_error({a, b}, [&] { return proj(subtract(a, b)); }), 1e-7);
  EXPECT_LT(fd_error({a, b}, [&] { return proj(hadamard(a, b)); }), 1e-7);
  EXPECT_LT(fd_error({a}, [&] { return proj(scalar_mul(a, 1.7)); }), 1e-7);
  EXPECT_LT(fd_error({a, bias}, [&] { return proj(add_row_bias(a, bias)); }), 1e-7);
  EXPECT_LT(fd_error({s, a}, [&] { return proj(scale_by(s, a)); }), 1e-7);
  EXPECT_LT(fd_error({s, a}, [&] { return proj(subtract_from_scalar(s, a)); }), 1e-7);
  EXPECT_LT(fd_error(kinks, [&] { return proj(relu(kinks[0])); }), 1e-7);
  EXPECT_LT(fd_error({a}, [&] { return proj(tanh(a)); }), 1e-7);
  EXPECT_LT(fd_error({a}, [&] { return proj(sigmoid(a)); }), 1e-7);
  EXPECT_LT(fd_error({a}, [&] { return proj(softplus(a)); }), 1e-7);
  EXPECT_LT(fd_error({pos}, [&] { return proj(row_normalize(pos)); }), 1e-7);
  Tensor r4 = oracle::random_tensor(4, 4, rng);
  EXPECT_LT(fd_error({a}, [&] { return sum(hadamard(pairwise_euclidean(a), r4)); }), 1e-7);
  const std::vector<int> labels{0, 2, 1, 2};
  const std::vector<std::uint8_t> mask{1, 0, 1, 1};
  EXPECT_LT(fd_error({a}, [&] { return row_softmax_cross_entropy(a, labels, mask); }), 1e-7);
  Tensor r7 = oracle::random_tensor(7, 3, rng);
  Tensor c = leaf(3, 3);
  EXPECT_LT(fd_error({a, c}, [&] { return sum(hadamard(concat_rows(a, c), r7)); }), 1e-7);
}
