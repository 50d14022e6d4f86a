#pragma once

// Dense 2-D tensors with reverse-mode automatic differentiation.
//
// Every tensor is a row-major rows x cols matrix of doubles; scalars are 1x1.
// Operations on tensors that require gradients record themselves on a dynamic
// tape (an op record holding the inputs and an adjoint closure). `backward`
// collects the records reachable from a scalar loss, orders them by creation
// sequence and replays the adjoints in reverse.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lgl {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

namespace detail {
struct Node;

struct OpRecord {
  std::string_view name;
  std::vector<std::shared_ptr<Node>> inputs;
  // Receives the output node (value and accumulated grad) and pushes adjoints
  // into the inputs that require gradients.
  std::function<void(const Node& out)> adjoint;
};

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::uint64_t sequence = 0;
  std::unique_ptr<OpRecord> op;
};
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor filled(std::size_t rows, std::size_t cols, double v, bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor identity(std::size_t n);

  bool defined() const { return node_ != nullptr; }
  Shape shape() const { return node_->shape; }
  std::size_t rows() const { return node_->shape.rows; }
  std::size_t cols() const { return node_->shape.cols; }
  std::size_t size() const { return node_->shape.size(); }

  std::span<const double> values() const { return node_->value; }
  // Direct write access; only meaningful for leaves (parameters, inputs).
  std::span<double> mutable_values() { return node_->value; }
  double operator()(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->op == nullptr; }
  // Empty until a backward pass has reached this tensor.
  std::span<const double> grad() const { return node_->grad; }
  std::string_view op_name() const;

  // Fresh leaf holding a copy of the values, cut off from any tape.
  Tensor detach(bool requires_grad = false) const;

  // Internal: used by op implementations and the tape.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Ordered record of the operations that produced a tensor, in forward order.
class ComputationTape {
 public:
  static ComputationTape record(const Tensor& root);

  std::size_t size() const { return ops_.size(); }
  std::vector<std::string_view> op_names() const;
  // Zeroes every reachable gradient buffer, seeds the root with `seed` and
  // runs the adjoints in reverse order, each exactly once. Returns the number
  // of op records visited.
  std::size_t replay_adjoints(const Tensor& root, std::span<const double> seed);

 private:
  std::vector<std::shared_ptr<detail::Node>> ops_;     // forward order
  std::vector<std::shared_ptr<detail::Node>> leaves_;  // grad-requiring leaves
};

// Populates grad() of every leaf reachable from `loss` with dLoss/dLeaf.
// Throws ContractError if loss is not 1x1.
void backward(const Tensor& loss);

// ---- operations -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);
// x (n x m) + b (1 x m) added to every row.
Tensor add_row_bias(const Tensor& x, const Tensor& b);
// s (1x1) times every entry of x.
Tensor scale_by(const Tensor& s, const Tensor& x);
// s (1x1) minus every entry of x.
Tensor subtract_from_scalar(const Tensor& s, const Tensor& x);

Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor sum(const Tensor& x);

// Epsilon inside the square root used for the distance adjoint.
inline constexpr double kDistanceEpsilon = 1e-12;
// (N x k) -> (N x N) Euclidean distances between rows. Values are exact; the
// adjoint uses sqrt(|e_i - e_j|^2 + eps) so coincident rows get gradient 0.
Tensor pairwise_euclidean(const Tensor& e);

// Divides every row by (row sum + eps). Throws NumericalError naming the row
// if the guarded sum is zero or not finite.
Tensor row_normalize(const Tensor& a, double eps = 1e-12);

// Mean softmax cross-entropy over the rows with mask[i] != 0.
Tensor row_softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                                 std::span<const std::uint8_t> mask);

Tensor concat_rows(const Tensor& top, const Tensor& bottom);
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);

// Numerically stable scalar helpers shared with non-differentiable paths.
double stable_sigmoid(double x);
double stable_softplus(double x);
// Inverse of softplus for y > 0.
double inverse_softplus(double y);

}  // namespace lgl
