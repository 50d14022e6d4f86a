#include "lgl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgl/errors.hpp"

namespace lgl {

namespace {

int argmax_row(std::span<const double> scores, std::size_t c, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < c; ++j) {
    if (scores[row * c + j] > scores[row * c + best]) best = j;
  }
  return static_cast<int>(best);
}

}  // namespace

double accuracy(std::span<const double> scores, std::size_t num_classes,
                std::span<const int> labels, std::span<const std::size_t> rows) {
  if (rows.empty()) throw ContractError("accuracy: no rows to evaluate");
  std::size_t correct = 0;
  for (std::size_t r : rows) correct += argmax_row(scores, num_classes, r) == labels[r];
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

std::optional<double> binary_auc(std::span<const double> positive_scores,
                                 std::span<const double> negative_scores) {
  const std::size_t np = positive_scores.size(), nn = negative_scores.size();
  if (np == 0 || nn == 0) return std::nullopt;
  // Rank-sum with average ranks over tied groups.
  std::vector<std::pair<double, bool>> all;
  all.reserve(np + nn);
  for (double s : positive_scores) all.emplace_back(s, true);
  for (double s : negative_scores) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].second) rank_sum += avg_rank;
    }
    i = j;
  }
  const double dp = static_cast<double>(np), dn = static_cast<double>(nn);
  return (rank_sum - dp * (dp + 1.0) / 2.0) / (dp * dn);
}

std::optional<double> macro_ovr_auc(std::span<const double> scores, std::size_t num_classes,
                                    std::span<const int> labels,
                                    std::span<const std::size_t> rows) {
  double total = 0.0;
  std::size_t used = 0;
  std::vector<double> pos, neg;
  for (std::size_t c = 0; c < num_classes; ++c) {
    pos.clear();
    neg.clear();
    for (std::size_t r : rows) {
      (labels[r] == static_cast<int>(c) ? pos : neg).push_back(scores[r * num_classes + c]);
    }
    if (auto auc = binary_auc(pos, neg)) {
      total += *auc;
      ++used;
    }
  }
  if (used == 0) return std::nullopt;
  return total / static_cast<double>(used);
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.count = values.size();
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

MeanStd CVReport::accuracy() const {
  std::vector<double> v;
  for (const auto& f : folds) v.push_back(f.accuracy);
  return mean_std(v);
}

MeanStd CVReport::auc() const {
  std::vector<double> v;
  for (const auto& f : folds) {
    if (f.auc) v.push_back(*f.auc);
  }
  return mean_std(v);
}

}  // namespace lgl
