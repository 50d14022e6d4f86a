#pragma once

// End-to-end training of the latent-graph classifier, evaluation, inductive
// inference, the two baselines and the cross-validation driver.

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "lgl/cv.hpp"
#include "lgl/data_io.hpp"
#include "lgl/gcn.hpp"
#include "lgl/metrics.hpp"
#include "lgl/optim.hpp"

namespace lgl {

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;  // NaN when no evaluation rows were given
};

struct TrainedModel {
  ModelParams params;
  Standardizer standardizer;  // empty when standardization is off
  std::size_t num_classes = 0;
  ArchitectureConfig arch;

  // Applies the fitted standardization.
  Tensor prepare(const Tensor& raw_features) const;
};

struct TrainResult {
  TrainedModel model;
  std::vector<EpochRecord> history;
};

// Full-batch training on every row of `data`: the graph spans all rows, the
// loss covers `train_rows`, and `eval_rows` only feed the history. Standardization
// (when enabled) is fitted on all rows of `data`.
TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  std::span<const std::size_t> train_rows,
                  std::span<const std::size_t> eval_rows = {});
// All rows labelled and used for the loss.
TrainResult train(const Dataset& data, const TrainConfig& cfg);

// CSV columns: epoch,lr,loss,train_acc,val_acc (val_acc empty when NaN).
void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path);

// Softmax probabilities (N x C) of a transductive forward pass over `raw_features`.
std::vector<double> predict_proba(const TrainedModel& model, const Tensor& raw_features);

Metrics evaluate(const TrainedModel& model, const Dataset& data, std::span<const std::size_t> rows);

// Learned adjacency over the rows of `raw_features`.
Tensor model_adjacency(const TrainedModel& model, const Tensor& raw_features);

// Builds the graph over train rows followed by test rows and returns the
// class probabilities of the test rows (test_n x C). Parameters are untouched.
std::vector<double> inductive_proba(const TrainedModel& model, const Tensor& train_x,
                                    const Tensor& test_x);
std::vector<int> inductive_infer(const TrainedModel& model, const Tensor& train_x,
                                 const Tensor& test_x);

// ---- baselines ------------------------------------------------------------

struct RidgeModel {
  Tensor weights;            // d x C
  std::vector<double> bias;  // C

  // N x C scores, row-major.
  std::vector<double> scores(const Tensor& x) const;
};

// One-vs-rest ridge regression on +-1 targets, fitted on `rows` through the
// centred normal equations (X'X + lambda I) W = X'Y.
RidgeModel fit_ridge(const Tensor& x, std::span<const int> labels,
                     std::span<const std::size_t> rows, std::size_t num_classes, double lambda);

// Symmetrized binary kNN graph with self-loops from raw feature distances.
// Requires k < N.
Tensor knn_graph(const Tensor& x, std::size_t k);

// Ridge baseline under the given folds.
CVReport linear_baseline(const Dataset& data, const FoldSplit& folds, double lambda = 1.0,
                         bool standardize = true);

// GCN trained on a fixed kNN graph (no graph learning) under the given folds.
CVReport knn_graph_baseline(const Dataset& data, std::size_t k_neighbors, const FoldSplit& folds,
                            const TrainConfig& cfg, std::size_t workers = 0);

// ---- cross-validation -----------------------------------------------------

enum class Method { kLatentGraph, kInductive, kLinear, kKnnGraph };

struct CVOptions {
  Method method = Method::kLatentGraph;
  std::size_t knn_k = 10;
  double ridge_lambda = 1.0;
  std::size_t workers = 0;  // 0: default_worker_count()
};

struct CVResult {
  CVReport report;
  FoldSplit split;
  // Per-fold training histories (empty for the ridge baseline).
  std::vector<std::vector<EpochRecord>> histories;
};

// Stratified k-fold (cfg.folds, cfg.seed) evaluation of the chosen method on
// the test fold of each split. kLatentGraph is transductive: every node is in
// the graph and only training labels enter the loss. kInductive trains on the
// training rows alone and then embeds the unseen test rows.
CVResult cross_validate(const Dataset& data, const TrainConfig& cfg, const CVOptions& opts);

// Seed used to initialize the model of fold `fold`.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

}  // namespace lgl
