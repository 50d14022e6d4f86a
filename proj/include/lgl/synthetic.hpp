#pragma once

// Synthetic studies: recovering a random graph from neighbour-sum targets with
// identity features, and a clustered classification benchmark whose labels
// live in a few informative features hidden among nuisance ones.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lgl/data_io.hpp"
#include "lgl/optim.hpp"
#include "lgl/tensor.hpp"

namespace lgl {

struct GroundTruthGraph {
  std::size_t nodes = 0;
  Tensor adjacency;  // symmetric 0/1, zero diagonal
  double edge_probability = 0.0;
  std::uint64_t seed = 0;

  std::size_t edge_count() const;
};

// Erdos-Renyi G(N, p); afterwards every isolated node is joined to a uniformly
// drawn other node. Requires N >= 2 and 0 < p < 1.
GroundTruthGraph generate_graph(std::size_t nodes, double p, std::uint64_t seed);

// Row i is the sum of the feature rows of i's neighbours (A x).
Tensor neighbor_sum_targets(const GroundTruthGraph& g, const Tensor& x);

struct RecoveryConfig {
  std::size_t embed_dim = 8;
  std::vector<std::size_t> embed_hidden{64};
  std::size_t iterations = 2000;
  double lr = 0.01;
  AdamSettings adam;
  std::uint64_t seed = 0;
  double divergence_limit = 1e6;
};

struct RecoveryResult {
  Tensor learned;  // N x N soft adjacency at the final parameters
  double final_mse = 0.0;
  double agreement = 0.0;  // off-diagonal agreement with targets at 0.5
  double temperature = 0.0;
  double threshold = 0.0;
  std::vector<double> loss_history;
};

// Fits the latent-graph module to identity features so that A x_i matches
// y_i. With X = I the objective is the mean squared error between A and Y
// over off-diagonal entries (self-loops are structural and excluded).
RecoveryResult recover_graph(const Tensor& targets, const RecoveryConfig& cfg);

// Fraction of off-diagonal entries where (learned >= tau) equals (truth >= 0.5).
double edge_agreement(const Tensor& learned, const Tensor& truth, double tau = 0.5);

struct RecoveryRun {
  std::size_t nodes = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  double final_mse = 0.0;
  double agreement = 0.0;
};

struct RecoveryCell {
  std::size_t nodes = 0;
  std::size_t dim = 0;
  double mse_mean = 0.0;
  double mse_std = 0.0;
  double agreement_mean = 0.0;
  std::size_t runs = 0;
};

struct RecoveryTable {
  std::vector<RecoveryRun> runs;    // node-major, then dim, then seed
  std::vector<RecoveryCell> cells;  // one per (nodes, dim)

  const RecoveryCell& cell(std::size_t nodes, std::size_t dim) const;
};

// One recovery per (N, dim, seed): graph drawn with G(N, p) from the seed,
// model initialized from the same seed.
RecoveryTable recovery_curves(std::span<const std::size_t> node_counts,
                              std::span<const std::size_t> dims,
                              std::span<const std::uint64_t> seeds, double p,
                              const RecoveryConfig& base, std::size_t workers = 0);

// CSV columns: nodes,dim,seed,final_mse,agreement
void write_recovery_csv(const RecoveryTable& table, const std::filesystem::path& path);
// CSV columns: nodes,dim,runs,mse_mean,mse_std,agreement_mean
void write_recovery_summary_csv(const RecoveryTable& table, const std::filesystem::path& path);

struct ClusterBenchmarkConfig {
  std::size_t nodes = 300;
  std::size_t classes = 3;
  std::size_t informative = 10;
  std::size_t nuisance = 90;
  // Each class is a union of clusters placed in antipodal pairs, so every
  // class has the same mean and no linear direction separates them.
  std::size_t cluster_pairs_per_class = 1;
  double center_radius = 5.0;
  double cluster_noise = 0.5;
  double nuisance_scale = 1.0;
  // Optional label-independent structure in the nuisance block: each node is
  // assigned to one of `confounder_groups` groups whose centers lie at
  // `confounder_radius` from the origin. With many groups the raw nearest
  // neighbours of a node mostly share its group rather than its class.
  // 0 groups gives pure noise.
  std::size_t confounder_groups = 30;
  double confounder_radius = 15.0;
  std::uint64_t seed = 0;
};

Dataset make_cluster_benchmark(const ClusterBenchmarkConfig& cfg);

}  // namespace lgl
