#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lgl {

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct FoldSplit {
  std::vector<Fold> folds;
};

// Shuffles each class with the seed and deals its members round-robin over the
// k test folds, continuing the deal position from one class to the next.
// Every class present must have at least k members.
FoldSplit stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

}  // namespace lgl
