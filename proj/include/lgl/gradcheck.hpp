#pragma once

// Central finite-difference checks of the reverse-mode gradients, per op and
// through the whole classifier loss.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lgl/tensor.hpp"

namespace lgl {

// ||analytic - numeric|| / max(||analytic||, ||numeric||), 0 when both norms
// are below 1e-12. Norms are Euclidean over all entries.
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

// Loss builder over a set of leaf inputs; must return a 1x1 tensor.
using LossFn = std::function<Tensor(const std::vector<Tensor>&)>;

// Backpropagates `loss(inputs)` and compares against central differences of
// step h over every entry of every input. The error is taken over all inputs
// concatenated: some entries have an exactly zero gradient (an embedding bias
// shifts every point alike) where a per-tensor ratio would compare rounding
// noise with rounding noise. Inputs are restored afterwards.
double check_gradients(const LossFn& loss, std::vector<Tensor>& inputs, double h = 1e-5);

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;  // over instances
  std::size_t instances = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> ops;
  GradCheckEntry end_to_end;
  double max_op_error() const;
};

// Random instances for every differentiable op and for the classifier loss
// (embedder with a tanh layer, soft adjacency, two graph convolutions, FC
// head, masked cross-entropy).
GradCheckReport run_gradcheck(std::uint64_t seed, std::size_t instances = 10, double h = 1e-5);

}  // namespace lgl
