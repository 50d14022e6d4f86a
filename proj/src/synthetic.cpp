#include "lgl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lgl/errors.hpp"
#include "lgl/latent_graph.hpp"
#include "lgl/metrics.hpp"
#include "lgl/parallel.hpp"
#include "lgl/random.hpp"

namespace lgl {

std::size_t GroundTruthGraph::edge_count() const {
  std::size_t e = 0;
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = i + 1; j < nodes; ++j) e += adjacency(i, j) != 0.0;
  }
  return e;
}

GroundTruthGraph generate_graph(std::size_t nodes, double p, std::uint64_t seed) {
  if (nodes < 2) throw ContractError("generate_graph: need at least 2 nodes");
  if (!(p > 0.0 && p < 1.0)) throw ContractError("generate_graph: edge probability must be in (0, 1)");
  Rng rng(seed);
  std::vector<double> a(nodes * nodes, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = i + 1; j < nodes; ++j) {
      if (rng.bernoulli(p)) a[i * nodes + j] = a[j * nodes + i] = 1.0;
    }
  }
  // Repair pass: isolated nodes would give all-zero target rows.
  for (std::size_t i = 0; i < nodes; ++i) {
    bool isolated = true;
    for (std::size_t j = 0; j < nodes && isolated; ++j) isolated = a[i * nodes + j] == 0.0;
    if (!isolated) continue;
    std::size_t other = rng.index(nodes - 1);
    if (other >= i) ++other;
    a[i * nodes + other] = a[other * nodes + i] = 1.0;
  }
  return GroundTruthGraph{nodes, Tensor::from(nodes, nodes, std::move(a)), p, seed};
}

Tensor neighbor_sum_targets(const GroundTruthGraph& g, const Tensor& x) {
  if (x.rows() != g.nodes) {
    throw DimensionError("neighbor_sum_targets: " + std::to_string(g.nodes) +
                         " nodes but features " + x.shape().str());
  }
  return matmul(g.adjacency, x.detach()).detach();
}

double edge_agreement(const Tensor& learned, const Tensor& truth, double tau) {
  if (learned.shape() != truth.shape() || learned.rows() != learned.cols()) {
    throw DimensionError("edge_agreement: shapes " + learned.shape().str() + " and " +
                         truth.shape().str());
  }
  const std::size_t n = learned.rows();
  if (n < 2) return 1.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) agree += (learned(i, j) >= tau) == (truth(i, j) >= 0.5);
    }
  }
  return static_cast<double>(agree) / static_cast<double>(n * (n - 1));
}

namespace {

struct RecoveryModel {
  EmbedderParams embedder;
  EdgeParams edge;

  std::vector<Tensor> trainable() const {
    auto out = embedder.trainable();
    for (auto& t : edge.trainable()) out.push_back(t);
    return out;
  }
};

Tensor offdiagonal_mse(const Tensor& a, const Tensor& targets, const Tensor& mask, double count) {
  const Tensor diff = subtract(a, targets);
  return scalar_mul(sum(hadamard(hadamard(diff, diff), mask)), 1.0 / count);
}

}  // namespace

RecoveryResult recover_graph(const Tensor& targets, const RecoveryConfig& cfg) {
  const std::size_t n = targets.rows();
  if (n < 2 || targets.cols() != n) {
    throw DimensionError("recover_graph: with identity features targets must be N x N, N >= 2; got " +
                         targets.shape().str());
  }
  const Tensor x = Tensor::identity(n);
  std::vector<std::size_t> widths{n};
  widths.insert(widths.end(), cfg.embed_hidden.begin(), cfg.embed_hidden.end());
  widths.push_back(cfg.embed_dim);

  Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  RecoveryModel model;
  model.embedder = EmbedderParams::glorot(widths, rng);
  model.edge = init_edge_params(embed(x, model.embedder).detach());

  std::vector<double> mask_values(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i) mask_values[i * n + i] = 0.0;
  const Tensor mask = Tensor::from(n, n, std::move(mask_values));
  const double count = static_cast<double>(n * (n - 1));
  const Tensor y = targets.detach();

  std::vector<Tensor> params = model.trainable();
  AdamState state = AdamState::for_params(params);
  RecoveryResult result;
  result.loss_history.reserve(cfg.iterations);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const Tensor a = soft_adjacency(embed(x, model.embedder), model.edge);
    const Tensor loss = offdiagonal_mse(a, y, mask, count);
    const double v = loss.item();
    if (!std::isfinite(v) || v > cfg.divergence_limit) {
      std::ostringstream os;
      os << "recover_graph diverged at iteration " << it << ": loss = " << v
         << ", temperature = " << model.edge.temperature()
         << ", threshold = " << model.edge.threshold_value();
      throw NumericalError(os.str());
    }
    result.loss_history.push_back(v);
    backward(loss);
    adam_step(params, state, cfg.lr, cfg.adam);
  }

  const Tensor a = soft_adjacency(embed(x, model.embedder), model.edge);
  result.final_mse = offdiagonal_mse(a, y, mask, count).item();
  result.learned = a.detach();
  result.agreement = edge_agreement(result.learned, y);
  result.temperature = model.edge.temperature();
  result.threshold = model.edge.threshold_value();
  return result;
}

const RecoveryCell& RecoveryTable::cell(std::size_t nodes, std::size_t dim) const {
  for (const auto& c : cells) {
    if (c.nodes == nodes && c.dim == dim) return c;
  }
  throw ContractError("RecoveryTable: no cell for N = " + std::to_string(nodes) +
                      ", dim = " + std::to_string(dim));
}

RecoveryTable recovery_curves(std::span<const std::size_t> node_counts,
                              std::span<const std::size_t> dims,
                              std::span<const std::uint64_t> seeds, double p,
                              const RecoveryConfig& base, std::size_t workers) {
  if (node_counts.empty() || dims.empty() || seeds.empty()) {
    throw ContractError("recovery_curves: node, dimension and seed lists must be non-empty");
  }
  RecoveryTable table;
  for (std::size_t n : node_counts) {
    for (std::size_t d : dims) {
      for (std::uint64_t s : seeds) table.runs.push_back({n, d, s, 0.0, 0.0});
    }
  }
  parallel_for(table.runs.size(), workers, [&](std::size_t r) {
    RecoveryRun& run = table.runs[r];
    const GroundTruthGraph g = generate_graph(run.nodes, p, run.seed);
    RecoveryConfig cfg = base;
    cfg.embed_dim = run.dim;
    cfg.seed = run.seed;
    const RecoveryResult res =
        recover_graph(neighbor_sum_targets(g, Tensor::identity(run.nodes)), cfg);
    run.final_mse = res.final_mse;
    run.agreement = res.agreement;
  });
  for (std::size_t n : node_counts) {
    for (std::size_t d : dims) {
      std::vector<double> mse, agree;
      for (const auto& run : table.runs) {
        if (run.nodes == n && run.dim == d) {
          mse.push_back(run.final_mse);
          agree.push_back(run.agreement);
        }
      }
      const MeanStd m = mean_std(mse);
      table.cells.push_back({n, d, m.mean, m.std, mean_std(agree).mean, m.count});
    }
  }
  return table;
}

void write_recovery_csv(const RecoveryTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  out << "nodes,dim,seed,final_mse,agreement\n";
  for (const auto& r : table.runs) {
    out << r.nodes << ',' << r.dim << ',' << r.seed << ',' << r.final_mse << ',' << r.agreement
        << '\n';
  }
}

void write_recovery_summary_csv(const RecoveryTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  out << "nodes,dim,runs,mse_mean,mse_std,agreement_mean\n";
  for (const auto& c : table.cells) {
    out << c.nodes << ',' << c.dim << ',' << c.runs << ',' << c.mse_mean << ',' << c.mse_std << ','
        << c.agreement_mean << '\n';
  }
}

Dataset make_cluster_benchmark(const ClusterBenchmarkConfig& cfg) {
  if (cfg.classes < 2 || cfg.informative == 0 || cfg.cluster_pairs_per_class == 0 ||
      cfg.nodes < cfg.classes) {
    throw ContractError("make_cluster_benchmark: degenerate configuration");
  }
  Rng rng(cfg.seed);
  const std::size_t clusters_per_class = 2 * cfg.cluster_pairs_per_class;
  // centers[c][m] for class c, cluster m; m and m+1 (m even) are antipodal.
  std::vector<std::vector<std::vector<double>>> centers(cfg.classes);
  for (auto& cls : centers) {
    for (std::size_t pair = 0; pair < cfg.cluster_pairs_per_class; ++pair) {
      std::vector<double> dir(cfg.informative);
      double norm = 0.0;
      for (double& v : dir) {
        v = rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (double& v : dir) v *= cfg.center_radius / norm;
      std::vector<double> opposite(dir);
      for (double& v : opposite) v = -v;
      cls.push_back(std::move(dir));
      cls.push_back(std::move(opposite));
    }
  }

  std::vector<std::vector<double>> confounders(cfg.confounder_groups,
                                               std::vector<double>(cfg.nuisance));
  for (auto& center : confounders) {
    double norm = 0.0;
    for (double& v : center) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : center) v *= norm > 0.0 ? cfg.confounder_radius / norm : 0.0;
  }

  const std::size_t d = cfg.informative + cfg.nuisance;
  std::vector<double> x(cfg.nodes * d);
  Dataset data;
  data.num_classes = cfg.classes;
  data.labels.resize(cfg.nodes);
  for (std::size_t i = 0; i < cfg.nodes; ++i) {
    const std::size_t c = i % cfg.classes;
    const std::size_t m = (i / cfg.classes) % clusters_per_class;
    data.labels[i] = static_cast<int>(c);
    double* row = x.data() + i * d;
    for (std::size_t j = 0; j < cfg.informative; ++j) {
      row[j] = centers[c][m][j] + rng.normal(0.0, cfg.cluster_noise);
    }
    const double* center = nullptr;
    if (!confounders.empty()) center = confounders[rng.index(confounders.size())].data();
    for (std::size_t j = cfg.informative; j < d; ++j) {
      row[j] = rng.normal(0.0, cfg.nuisance_scale) + (center ? center[j - cfg.informative] : 0.0);
    }
  }
  data.features = Tensor::from(cfg.nodes, d, std::move(x));
  return data;
}

}  // namespace lgl
