#include "lgl/cv.hpp"

#include <algorithm>
#include <map>

#include "lgl/errors.hpp"
#include "lgl/random.hpp"

namespace lgl {

FoldSplit stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ContractError("stratified_kfold: need at least 2 folds");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < k) {
      throw ContractError("stratified_kfold: class " + std::to_string(label) + " has " +
                          std::to_string(members.size()) + " member(s), fewer than " +
                          std::to_string(k) + " folds");
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> fold_of(labels.size());
  std::size_t deal = 0;
  for (auto& [label, members] : by_class) {
    rng.shuffle(members);
    for (std::size_t idx : members) fold_of[idx] = deal++ % k;
  }

  FoldSplit split;
  split.folds.resize(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (fold_of[i] == f ? split.folds[f].test : split.folds[f].train).push_back(i);
    }
  }
  return split;
}

}  // namespace lgl
