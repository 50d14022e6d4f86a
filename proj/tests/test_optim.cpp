#include <gtest/gtest.h>

#include <cmath>

#include "lgl/errors.hpp"
#include "lgl/optim.hpp"

using namespace lgl;

TEST(LrSchedule, StepsDownEveryHundredEpochs) {
  TrainConfig cfg;
  EXPECT_NEAR(cfg.decay_factor(), 0.398107170553497, 1e-12);
  EXPECT_DOUBLE_EQ(lr_schedule(0, cfg), 0.01);
  EXPECT_DOUBLE_EQ(lr_schedule(99, cfg), 0.01);
  EXPECT_NEAR(lr_schedule(100, cfg), 0.01 * 0.398107170553497, 1e-15);
  EXPECT_NEAR(lr_schedule(250, cfg), 0.01 * std::pow(0.398107170553497, 2), 1e-15);
  EXPECT_NEAR(lr_schedule(599, cfg), 1e-4, 1e-12);
}

TEST(LrSchedule, MonotoneAndClampedAtMinimum) {
  TrainConfig cfg;
  for (std::size_t e = 1; e < 2000; ++e) EXPECT_LE(lr_schedule(e, cfg), lr_schedule(e - 1, cfg));
  EXPECT_DOUBLE_EQ(lr_schedule(5000, cfg), cfg.lr_min);
}

TEST(TrainConfig, ValidateRejectsBadSettings) {
  TrainConfig ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = ok;
  bad.lr_min = 0.1;
  EXPECT_THROW(bad.validate(), ContractError);
  bad = ok;
  bad.lr_step = 0;
  EXPECT_THROW(bad.validate(), ContractError);
  bad = ok;
  bad.folds = 1;
  EXPECT_THROW(bad.validate(), ContractError);
  bad = ok;
  bad.arch.embed_dim = 0;
  EXPECT_THROW(bad.validate(), ContractError);
}

TEST(Adam, MatchesScalarRecurrence) {
  // quadratic 0.5 * (x - 3)^2, gradient x - 3
  std::vector<Tensor> params{Tensor::scalar(0.0)};
  AdamState st = AdamState::for_params(params);
  double x = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 50; ++t) {
    const double g = x - 3.0;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    x -= 0.05 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);

    std::vector<double> grad{params[0].item() - 3.0};
    std::vector<std::span<const double>> grads{grad};
    adam_step(params, grads, st, 0.05);
    EXPECT_NEAR(params[0].item(), x, 1e-14) << "step " << t;
  }
  EXPECT_EQ(st.step, 50u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<Tensor> params{Tensor::from(1, 3, {1.0, 1.0, 1.0})};
  AdamState st = AdamState::for_params(params);
  std::vector<double> grad{2.0, -0.001, 0.0};
  std::vector<std::span<const double>> grads{grad};
  adam_step(params, grads, st, 0.1);
  EXPECT_NEAR(params[0].values()[0], 0.9, 1e-7);
  EXPECT_NEAR(params[0].values()[1], 1.1, 1e-4);
  EXPECT_EQ(params[0].values()[2], 1.0);
}

TEST(Adam, EmptyGradientCountsAsZero) {
  std::vector<Tensor> params{Tensor::scalar(2.0)};
  AdamState st = AdamState::for_params(params);
  std::vector<std::span<const double>> grads{std::span<const double>{}};
  adam_step(params, grads, st, 0.1);
  EXPECT_EQ(params[0].item(), 2.0);
}

TEST(Adam, MismatchedBuffersThrow) {
  std::vector<Tensor> params{Tensor::scalar(2.0)};
  AdamState st = AdamState::for_params(params);
  std::vector<double> grad{1.0, 2.0};
  std::vector<std::span<const double>> grads{grad};
  EXPECT_THROW(adam_step(params, grads, st, 0.1), ContractError);
  std::vector<std::span<const double>> none;
  EXPECT_THROW(adam_step(params, none, st, 0.1), ContractError);
}
