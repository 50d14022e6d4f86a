#include "lgl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "lgl/errors.hpp"
#include "lgl/parallel.hpp"
#include "lgl/random.hpp"

namespace lgl {

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

double parameter_norm(std::span<const Tensor> params) {
  double s = 0.0;
  for (const auto& p : params) {
    for (double v : p.values()) s += v * v;
  }
  return std::sqrt(s);
}

void check_rows(const Dataset& data, std::span<const std::size_t> rows, const char* what) {
  for (std::size_t r : rows) {
    if (r >= data.size()) {
      throw ContractError(std::string(what) + ": row " + std::to_string(r) + " out of range for " +
                          std::to_string(data.size()) + " nodes");
    }
  }
}

// Shared full-batch loop: forward -> masked cross-entropy -> backward -> Adam.
std::vector<EpochRecord> run_epochs(std::vector<Tensor> params,
                                    const std::function<Tensor()>& logits_fn,
                                    std::span<const int> labels,
                                    std::span<const std::size_t> train_rows,
                                    std::span<const std::size_t> eval_rows,
                                    const TrainConfig& cfg) {
  std::vector<std::uint8_t> mask(labels.size(), 0);
  for (std::size_t r : train_rows) mask[r] = 1;
  AdamState state = AdamState::for_params(params);
  const AdamSettings adam{cfg.beta1, cfg.beta2, cfg.adam_eps};
  std::vector<EpochRecord> history;
  history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Tensor logits = logits_fn();
    const Tensor loss = row_softmax_cross_entropy(logits, labels, mask);
    const double loss_value = loss.item();
    if (!std::isfinite(loss_value)) {
      std::ostringstream os;
      os << "training diverged at epoch " << epoch << ": loss = " << loss_value
         << ", parameter norm = " << parameter_norm(params);
      throw NumericalError(os.str());
    }
    backward(loss);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr_schedule(epoch, cfg);
    rec.loss = loss_value;
    const std::size_t c = logits.cols();
    rec.train_acc = accuracy(logits.values(), c, labels, train_rows);
    rec.val_acc = eval_rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : accuracy(logits.values(), c, labels, eval_rows);
    history.push_back(rec);
    adam_step(params, state, rec.lr, adam);
  }
  return history;
}

void require_two_classes(std::span<const int> labels, std::span<const std::size_t> rows) {
  std::set<int> seen;
  for (std::size_t r : rows) seen.insert(labels[r]);
  if (seen.size() < 2) {
    throw ContractError("train: the training rows contain " + std::to_string(seen.size()) +
                        " class(es); at least 2 are required");
  }
}

Metrics metrics_from_scores(std::span<const double> scores, std::size_t c,
                            std::span<const int> labels, std::span<const std::size_t> rows) {
  return Metrics{accuracy(scores, c, labels, rows), macro_ovr_auc(scores, c, labels, rows)};
}

// Cholesky solve of the SPD system M X = B (M is n x n, B is n x m), in place.
void cholesky_solve(std::vector<double>& m, std::vector<double>& b, std::size_t n, std::size_t cols) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = m[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= m[j * n + k] * m[j * n + k];
    if (!(d > 0.0)) throw NumericalError("ridge: normal equations not positive definite");
    const double l = std::sqrt(d);
    m[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= m[i * n + k] * m[j * n + k];
      m[i * n + j] = s / l;
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = b[i * cols + c];
      for (std::size_t k = 0; k < i; ++k) s -= m[i * n + k] * b[k * cols + c];
      b[i * cols + c] = s / m[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = b[i * cols + c];
      for (std::size_t k = i + 1; k < n; ++k) s -= m[k * n + i] * b[k * cols + c];
      b[i * cols + c] = s / m[i * n + i];
    }
  }
}

}  // namespace

Tensor TrainedModel::prepare(const Tensor& raw_features) const {
  return standardizer.empty() ? raw_features.detach() : standardizer.apply(raw_features);
}

TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  std::span<const std::size_t> train_rows,
                  std::span<const std::size_t> eval_rows) {
  cfg.validate();
  if (data.features.rows() != data.size()) {
    throw DimensionError("train: " + std::to_string(data.features.rows()) + " feature rows but " +
                         std::to_string(data.size()) + " labels");
  }
  check_rows(data, train_rows, "train");
  check_rows(data, eval_rows, "train");
  require_two_classes(data.labels, train_rows);

  TrainResult result;
  TrainedModel& model = result.model;
  model.num_classes = data.num_classes;
  model.arch = cfg.arch;
  if (cfg.standardize) model.standardizer = Standardizer::fit(data.features);
  const Tensor x = model.prepare(data.features);

  Rng rng(cfg.seed);
  model.params = ModelParams::init(cfg.arch, x, data.num_classes, rng);
  const ModelParams& params = model.params;
  result.history = run_epochs(
      params.trainable(), [&] { return forward(x, params).logits; }, data.labels, train_rows,
      eval_rows, cfg);
  return result;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  const auto rows = all_rows(data.size());
  return train(data, cfg, rows);
}

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  out << "epoch,lr,loss,train_acc,val_acc\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << r.lr << ',' << r.loss << ',' << r.train_acc << ',';
    if (!std::isnan(r.val_acc)) out << r.val_acc;
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<double> predict_proba(const TrainedModel& model, const Tensor& raw_features) {
  return softmax_rows(forward(model.prepare(raw_features), model.params).logits);
}

Metrics evaluate(const TrainedModel& model, const Dataset& data, std::span<const std::size_t> rows) {
  if (rows.empty()) throw ContractError("evaluate: empty evaluation mask");
  check_rows(data, rows, "evaluate");
  const auto probs = predict_proba(model, data.features);
  return metrics_from_scores(probs, model.num_classes, data.labels, rows);
}

Tensor model_adjacency(const TrainedModel& model, const Tensor& raw_features) {
  return forward(model.prepare(raw_features), model.params).adjacency.detach();
}

std::vector<double> inductive_proba(const TrainedModel& model, const Tensor& train_x,
                                    const Tensor& test_x) {
  if (train_x.cols() != test_x.cols()) {
    throw DimensionError("inductive_infer: train features " + train_x.shape().str() +
                         " and test features " + test_x.shape().str() + " differ in width");
  }
  const Tensor all = concat_rows(train_x, test_x).detach();
  const auto probs = predict_proba(model, all);
  const std::size_t c = model.num_classes;
  return {probs.begin() + static_cast<std::ptrdiff_t>(train_x.rows() * c), probs.end()};
}

std::vector<int> inductive_infer(const TrainedModel& model, const Tensor& train_x,
                                 const Tensor& test_x) {
  const auto probs = inductive_proba(model, train_x, test_x);
  return predict(Tensor::from(test_x.rows(), model.num_classes, probs));
}

// ---- baselines ------------------------------------------------------------

std::vector<double> RidgeModel::scores(const Tensor& x) const {
  const Tensor s = matmul(x, weights);
  std::vector<double> out(s.values().begin(), s.values().end());
  const std::size_t c = bias.size();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bias[j];
  }
  return out;
}

RidgeModel fit_ridge(const Tensor& x, std::span<const int> labels,
                     std::span<const std::size_t> rows, std::size_t num_classes, double lambda) {
  if (rows.empty()) throw ContractError("fit_ridge: no training rows");
  if (!(lambda > 0.0)) throw ContractError("fit_ridge: lambda must be positive");
  const std::size_t d = x.cols(), c = num_classes;
  const double n = static_cast<double>(rows.size());
  std::vector<double> xmean(d, 0.0), ymean(c, 0.0);
  for (std::size_t r : rows) {
    for (std::size_t j = 0; j < d; ++j) xmean[j] += x(r, j);
    for (std::size_t k = 0; k < c; ++k) ymean[k] += labels[r] == static_cast<int>(k) ? 1.0 : -1.0;
  }
  for (double& v : xmean) v /= n;
  for (double& v : ymean) v /= n;

  std::vector<double> gram(d * d, 0.0), rhs(d * c, 0.0), xc(d);
  for (std::size_t r : rows) {
    for (std::size_t j = 0; j < d; ++j) xc[j] = x(r, j) - xmean[j];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b <= a; ++b) gram[a * d + b] += xc[a] * xc[b];
      for (std::size_t k = 0; k < c; ++k) {
        const double y = (labels[r] == static_cast<int>(k) ? 1.0 : -1.0) - ymean[k];
        rhs[a * c + k] += xc[a] * y;
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < a; ++b) gram[b * d + a] = gram[a * d + b];
    gram[a * d + a] += lambda;
  }
  cholesky_solve(gram, rhs, d, c);

  RidgeModel model;
  model.bias = ymean;
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t j = 0; j < d; ++j) model.bias[k] -= xmean[j] * rhs[j * c + k];
  }
  model.weights = Tensor::from(d, c, std::move(rhs));
  return model;
}

Tensor knn_graph(const Tensor& x, std::size_t k) {
  const std::size_t n = x.rows();
  if (k >= n) {
    throw ContractError("knn_graph: k = " + std::to_string(k) + " must be below N = " +
                        std::to_string(n));
  }
  const Tensor d = pairwise_euclidean(x.detach());
  std::vector<double> a(n * n, 0.0);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i * n + i] = 1.0;
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t p, std::size_t q) { return d(i, p) < d(i, q); });
    for (std::size_t m = 0; m < k; ++m) a[i * n + order[m]] = a[order[m] * n + i] = 1.0;
  }
  return Tensor::from(n, n, std::move(a));
}

CVReport linear_baseline(const Dataset& data, const FoldSplit& folds, double lambda,
                         bool standardize) {
  const Tensor x = standardize ? Standardizer::fit(data.features).apply(data.features)
                               : data.features.detach();
  CVReport report;
  for (const auto& fold : folds.folds) {
    const RidgeModel model = fit_ridge(x, data.labels, fold.train, data.num_classes, lambda);
    report.folds.push_back(
        metrics_from_scores(model.scores(x), data.num_classes, data.labels, fold.test));
  }
  return report;
}

namespace {

struct KnnFoldResult {
  Metrics metrics;
  std::vector<EpochRecord> history;
};

KnnFoldResult run_knn_fold(const Dataset& data, const Tensor& x, const Tensor& graph,
                           const Fold& fold, const TrainConfig& cfg, std::uint64_t seed) {
  require_two_classes(data.labels, fold.train);
  Rng rng(seed);
  const GCNParams params = GCNParams::glorot(x.cols(), cfg.arch.gc_widths, data.num_classes, rng);
  KnnFoldResult out;
  out.history = run_epochs(
      params.trainable(), [&] { return classify_on_graph(graph, x, params); }, data.labels,
      fold.train, fold.test, cfg);
  const auto probs = softmax_rows(classify_on_graph(graph, x, params));
  out.metrics = metrics_from_scores(probs, data.num_classes, data.labels, fold.test);
  return out;
}

}  // namespace

CVReport knn_graph_baseline(const Dataset& data, std::size_t k_neighbors, const FoldSplit& folds,
                            const TrainConfig& cfg, std::size_t workers) {
  cfg.validate();
  const Tensor x = cfg.standardize ? Standardizer::fit(data.features).apply(data.features)
                                   : data.features.detach();
  const Tensor graph = knn_graph(x, k_neighbors);
  CVReport report;
  report.folds.resize(folds.folds.size());
  parallel_for(folds.folds.size(), workers, [&](std::size_t f) {
    report.folds[f] = run_knn_fold(data, x, graph, folds.folds[f], cfg, fold_seed(cfg.seed, f)).metrics;
  });
  return report;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  return seed * 1000003ULL + 7919ULL * (fold + 1);
}

CVResult cross_validate(const Dataset& data, const TrainConfig& cfg, const CVOptions& opts) {
  cfg.validate();
  CVResult result;
  result.split = stratified_kfold(data.labels, cfg.folds, cfg.seed);
  const std::size_t k = result.split.folds.size();

  if (opts.method == Method::kLinear) {
    result.report = linear_baseline(data, result.split, opts.ridge_lambda, cfg.standardize);
    return result;
  }

  result.report.folds.resize(k);
  result.histories.resize(k);
  Tensor knn_x, graph;
  if (opts.method == Method::kKnnGraph) {
    knn_x = cfg.standardize ? Standardizer::fit(data.features).apply(data.features)
                            : data.features.detach();
    graph = knn_graph(knn_x, opts.knn_k);
  }

  parallel_for(k, opts.workers, [&](std::size_t f) {
    const Fold& fold = result.split.folds[f];
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed(cfg.seed, f);
    switch (opts.method) {
      case Method::kLatentGraph: {
        TrainResult tr = train(data, fold_cfg, fold.train, fold.test);
        result.report.folds[f] = evaluate(tr.model, data, fold.test);
        result.histories[f] = std::move(tr.history);
        break;
      }
      case Method::kInductive: {
        const Dataset train_set = data.subset(fold.train);
        const Dataset test_set = data.subset(fold.test);
        TrainResult tr = train(train_set, fold_cfg);
        const auto probs = inductive_proba(tr.model, train_set.features, test_set.features);
        result.report.folds[f] = metrics_from_scores(probs, data.num_classes, test_set.labels,
                                                     all_rows(test_set.size()));
        result.histories[f] = std::move(tr.history);
        break;
      }
      case Method::kKnnGraph: {
        KnnFoldResult kr = run_knn_fold(data, knn_x, graph, fold, fold_cfg, fold_cfg.seed);
        result.report.folds[f] = kr.metrics;
        result.histories[f] = std::move(kr.history);
        break;
      }
      case Method::kLinear:
        break;
    }
  });
  return result;
}

}  // namespace lgl
