#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace lgl {

// Fraction of `rows` whose argmax score (ties to the lowest class) equals the
// label. `scores` is N x num_classes, row-major.
double accuracy(std::span<const double> scores, std::size_t num_classes,
                std::span<const int> labels, std::span<const std::size_t> rows);

// Mann-Whitney AUC of `scores` for positives vs negatives; ties get half
// credit. Empty when either side is empty.
std::optional<double> binary_auc(std::span<const double> positive_scores,
                                 std::span<const double> negative_scores);

// Mean over classes of the one-vs-rest AUC restricted to `rows`. Classes with
// no positive or no negative row are skipped; empty if none remain.
std::optional<double> macro_ovr_auc(std::span<const double> scores, std::size_t num_classes,
                                    std::span<const int> labels,
                                    std::span<const std::size_t> rows);

struct Metrics {
  double accuracy = 0.0;
  std::optional<double> auc;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t count = 0;
};
MeanStd mean_std(std::span<const double> values);

// Per-fold metrics and their aggregate.
struct CVReport {
  std::vector<Metrics> folds;

  MeanStd accuracy() const;
  // Over the folds where AUC is defined.
  MeanStd auc() const;
};

}  // namespace lgl
