#include "lgl/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <mutex>
#include <unordered_set>

#include <cblas.h>

#include "lgl/errors.hpp"

namespace lgl {

using detail::Node;
using detail::OpRecord;
using NodePtr = std::shared_ptr<Node>;

std::string Shape::str() const {
  std::ostringstream os;
  os << '[' << rows << 'x' << cols << ']';
  return os.str();
}

namespace {

std::atomic<std::uint64_t> g_sequence{0};

NodePtr new_node(Shape shape, std::vector<double> value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->shape = shape;
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->sequence = g_sequence.fetch_add(1, std::memory_order_relaxed);
  return n;
}

// Builds the output tensor and attaches an op record when any input needs
// gradients. Inputs that do not need gradients are still kept alive in the
// record because adjoints may read their values.
Tensor make_result(Shape shape, std::vector<double> value, std::string_view name,
                   std::vector<NodePtr> inputs, std::function<void(const Node&)> adjoint) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [](const NodePtr& n) { return n->requires_grad; });
  auto out = new_node(shape, std::move(value), needs);
  if (needs) {
    out->op = std::make_unique<OpRecord>(OpRecord{name, std::move(inputs), std::move(adjoint)});
  }
  return Tensor(out);
}

void require_defined(const Tensor& t, std::string_view op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor operand");
}

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
  }
}

void require_scalar(const Tensor& s, std::string_view op) {
  require_defined(s, op);
  if (s.size() != 1) {
    throw DimensionError(std::string(op) + ": expected a 1x1 scalar, got " + s.shape().str());
  }
}

// C = alpha * op(A) op(B) + beta * C on row-major buffers. BLAS runs single
// threaded; parallelism lives at the level of independent training runs.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double beta, double* c) {
  static std::once_flag single_thread;
  std::call_once(single_thread, [] { openblas_set_num_threads(1); });
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (beta == 0.0) std::fill(c, c + m * n, 0.0);
    return;
  }
  const auto lda = static_cast<blasint>(trans_a ? m : k);
  const auto ldb = static_cast<blasint>(trans_b ? k : n);
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, static_cast<blasint>(m),
              static_cast<blasint>(n), static_cast<blasint>(k), 1.0, a, lda, b, ldb, beta, c,
              static_cast<blasint>(n));
}

// dfdx(in, out) gives the local derivative from the input and output values.
template <typename F, typename D>
Tensor unary(const Tensor& x, std::string_view name, F&& f, D dfdx) {
  require_defined(x, name);
  std::vector<double> v(x.size());
  auto in = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(in[i]);
  NodePtr xn = x.node();
  return make_result(x.shape(), std::move(v), name, {xn},
                     [xn, dfdx](const Node& out) {
                       if (!xn->requires_grad) return;
                       for (std::size_t i = 0; i < out.grad.size(); ++i) {
                         xn->grad[i] += out.grad[i] * dfdx(xn->value[i], out.value[i]);
                       }
                     });
}

}  // namespace

// ---- Tensor ---------------------------------------------------------------

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return filled(rows, cols, 0.0, requires_grad);
}

Tensor Tensor::filled(std::size_t rows, std::size_t cols, double v, bool requires_grad) {
  return Tensor(new_node({rows, cols}, std::vector<double>(rows * cols, v), requires_grad));
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values,
                    bool requires_grad) {
  if (values.size() != rows * cols) {
    throw DimensionError("Tensor::from: " + std::to_string(values.size()) +
                         " values do not fill shape " + Shape{rows, cols}.str());
  }
  return Tensor(new_node({rows, cols}, std::move(values), requires_grad));
}

Tensor Tensor::scalar(double v, bool requires_grad) { return filled(1, 1, v, requires_grad); }

Tensor Tensor::identity(std::size_t n) {
  Tensor t = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) t.node_->value[i * n + i] = 1.0;
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on non-scalar tensor " + shape().str());
  return node_->value[0];
}

std::string_view Tensor::op_name() const { return node_->op ? node_->op->name : "leaf"; }

Tensor Tensor::detach(bool requires_grad) const {
  return Tensor(new_node(node_->shape, node_->value, requires_grad));
}

// ---- tape -----------------------------------------------------------------

ComputationTape ComputationTape::record(const Tensor& root) {
  ComputationTape tape;
  std::unordered_set<const Node*> seen;
  std::vector<NodePtr> stack{root.node()};
  while (!stack.empty()) {
    NodePtr n = std::move(stack.back());
    stack.pop_back();
    if (!n->requires_grad || !seen.insert(n.get()).second) continue;
    if (n->op) {
      for (const auto& in : n->op->inputs) stack.push_back(in);
      tape.ops_.push_back(std::move(n));
    } else {
      tape.leaves_.push_back(std::move(n));
    }
  }
  std::sort(tape.ops_.begin(), tape.ops_.end(),
            [](const NodePtr& a, const NodePtr& b) { return a->sequence < b->sequence; });
  return tape;
}

std::vector<std::string_view> ComputationTape::op_names() const {
  std::vector<std::string_view> names;
  names.reserve(ops_.size());
  for (const auto& n : ops_) names.push_back(n->op->name);
  return names;
}

std::size_t ComputationTape::replay_adjoints(const Tensor& root, std::span<const double> seed) {
  for (auto* group : {&ops_, &leaves_}) {
    for (auto& n : *group) n->grad.assign(n->value.size(), 0.0);
  }
  const NodePtr& r = root.node();
  if (!r->requires_grad) return 0;
  std::copy(seed.begin(), seed.end(), r->grad.begin());
  std::size_t visited = 0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    (*it)->op->adjoint(**it);
    ++visited;
  }
  return visited;
}

void backward(const Tensor& loss) {
  require_defined(loss, "backward");
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be a 1x1 scalar, got " + loss.shape().str());
  }
  const double one = 1.0;
  ComputationTape::record(loss).replay_adjoints(loss, {&one, 1});
}

// ---- scalar helpers -------------------------------------------------------

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw ContractError("inverse_softplus: argument must be positive");
  return y + std::log(-std::expm1(-y));
}

// ---- linear algebra -------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + a.shape().str() + " x " +
                         b.shape().str());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  gemm(false, false, m, n, k, a.values().data(), b.values().data(), 0.0, out.data());
  NodePtr an = a.node(), bn = b.node();
  return make_result({m, n}, std::move(out), "matmul", {an, bn}, [an, bn, m, k, n](const Node& o) {
    // dA += G B^T, dB += A^T G
    if (an->requires_grad) {
      gemm(false, true, m, k, n, o.grad.data(), bn->value.data(), 1.0, an->grad.data());
    }
    if (bn->requires_grad) {
      gemm(true, false, k, n, m, an->value.data(), o.grad.data(), 1.0, bn->grad.data());
    }
  });
}

namespace {

Tensor elementwise_binary(const Tensor& a, const Tensor& b, std::string_view name, double sign_b,
                          bool product) {
  require_same_shape(a, b, name);
  std::vector<double> out(a.size());
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = product ? av[i] * bv[i] : av[i] + sign_b * bv[i];
  }
  NodePtr an = a.node(), bn = b.node();
  return make_result(a.shape(), std::move(out), name, {an, bn},
                     [an, bn, sign_b, product](const Node& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i) {
                         const double g = o.grad[i];
                         if (an->requires_grad) an->grad[i] += product ? g * bn->value[i] : g;
                         if (bn->requires_grad) bn->grad[i] += product ? g * an->value[i] : sign_b * g;
                       }
                     });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return elementwise_binary(a, b, "add", 1.0, false); }

Tensor subtract(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "subtract", -1.0, false);
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "hadamard", 1.0, true);
}

Tensor scalar_mul(const Tensor& a, double s) {
  return unary(a, "scalar_mul", [s](double x) { return s * x; },
               [s](double, double) { return s; });
}

Tensor add_row_bias(const Tensor& x, const Tensor& b) {
  require_defined(x, "add_row_bias");
  require_defined(b, "add_row_bias");
  if (b.rows() != 1 || b.cols() != x.cols()) {
    throw DimensionError("add_row_bias: bias " + b.shape().str() + " does not match rows of " +
                         x.shape().str());
  }
  const std::size_t n = x.rows(), m = x.cols();
  std::vector<double> out(x.values().begin(), x.values().end());
  auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += bv[j];
  }
  NodePtr xn = x.node(), bn = b.node();
  return make_result(x.shape(), std::move(out), "add_row_bias", {xn, bn},
                     [xn, bn, n, m](const Node& o) {
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t j = 0; j < m; ++j) {
                           const double g = o.grad[i * m + j];
                           if (xn->requires_grad) xn->grad[i * m + j] += g;
                           if (bn->requires_grad) bn->grad[j] += g;
                         }
                       }
                     });
}

Tensor scale_by(const Tensor& s, const Tensor& x) {
  require_scalar(s, "scale_by");
  require_defined(x, "scale_by");
  const double sv = s.item();
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv * xv[i];
  NodePtr sn = s.node(), xn = x.node();
  return make_result(x.shape(), std::move(out), "scale_by", {sn, xn}, [sn, xn](const Node& o) {
    const double svv = sn->value[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < o.grad.size(); ++i) {
      acc += o.grad[i] * xn->value[i];
      if (xn->requires_grad) xn->grad[i] += svv * o.grad[i];
    }
    if (sn->requires_grad) sn->grad[0] += acc;
  });
}

Tensor subtract_from_scalar(const Tensor& s, const Tensor& x) {
  require_scalar(s, "subtract_from_scalar");
  require_defined(x, "subtract_from_scalar");
  const double sv = s.item();
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv - xv[i];
  NodePtr sn = s.node(), xn = x.node();
  return make_result(x.shape(), std::move(out), "subtract_from_scalar", {sn, xn},
                     [sn, xn](const Node& o) {
                       double acc = 0.0;
                       for (std::size_t i = 0; i < o.grad.size(); ++i) {
                         acc += o.grad[i];
                         if (xn->requires_grad) xn->grad[i] -= o.grad[i];
                       }
                       if (sn->requires_grad) sn->grad[0] += acc;
                     });
}

// ---- elementwise nonlinearities -------------------------------------------

Tensor relu(const Tensor& x) {
  return unary(x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
               [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary(x, "tanh", [](double v) { return std::tanh(v); },
               [](double, double out) { return 1.0 - out * out; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, "sigmoid", stable_sigmoid,
               [](double, double out) { return out * (1.0 - out); });
}

Tensor softplus(const Tensor& x) {
  return unary(x, "softplus", stable_softplus,
               [](double in, double) { return stable_sigmoid(in); });
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  double s = 0.0;
  for (double v : x.values()) s += v;
  NodePtr xn = x.node();
  return make_result({1, 1}, {s}, "sum", {xn}, [xn](const Node& o) {
    if (!xn->requires_grad) return;
    for (double& g : xn->grad) g += o.grad[0];
  });
}

// ---- graph-specific ops ---------------------------------------------------

Tensor pairwise_euclidean(const Tensor& e) {
  require_defined(e, "pairwise_euclidean");
  const std::size_t n = e.rows(), k = e.cols();
  // Column-major copy so the per-row distance loop runs over contiguous j.
  std::vector<double> et(k * n);
  auto ev = e.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) et[c * n + i] = ev[i * k + c];
  }
  std::vector<double> d(n * n, 0.0);
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(acc.begin() + static_cast<std::ptrdiff_t>(i), acc.end(), 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      const double* col = et.data() + c * n;
      const double ei = col[i];
      for (std::size_t j = i + 1; j < n; ++j) {
        const double diff = ei - col[j];
        acc[j] += diff * diff;
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = std::sqrt(acc[j]);
  }
  NodePtr en = e.node();
  return make_result({n, n}, std::move(d), "pairwise_euclidean", {en}, [en, n, k](const Node& o) {
    if (!en->requires_grad) return;
    // With c_ij = (g_ij + g_ji) / sqrt(d_ij^2 + eps) and c_ii = 0:
    //   dE_i = sum_j c_ij (e_i - e_j) = rowsum(C)_i e_i - (C E)_i.
    std::vector<double> coeff(n * n, 0.0);
    std::vector<double> rowsum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dij = o.value[i * n + j];
        const double c = (o.grad[i * n + j] + o.grad[j * n + i]) / std::sqrt(dij * dij + kDistanceEpsilon);
        coeff[i * n + j] = coeff[j * n + i] = c;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) rowsum[i] += coeff[i * n + j];
    }
    double* ge = en->grad.data();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < k; ++p) ge[i * k + p] += rowsum[i] * en->value[i * k + p];
    }
    // ge -= C E
    std::vector<double> ce(n * k);
    gemm(false, false, n, k, n, coeff.data(), en->value.data(), 0.0, ce.data());
    for (std::size_t i = 0; i < n * k; ++i) ge[i] -= ce[i];
  });
}

Tensor row_normalize(const Tensor& a, double eps) {
  require_defined(a, "row_normalize");
  const std::size_t n = a.rows(), m = a.cols();
  auto av = a.values();
  std::vector<double> sums(n);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < n; ++i) {
    double s = eps;
    for (std::size_t j = 0; j < m; ++j) s += av[i * m + j];
    if (s == 0.0 || !std::isfinite(s)) {
      throw NumericalError("row_normalize: degree of node " + std::to_string(i) +
                           " is zero or not finite (" + std::to_string(s) + ")");
    }
    sums[i] = s;
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = av[i * m + j] / s;
  }
  NodePtr an = a.node();
  return make_result(a.shape(), std::move(out), "row_normalize", {an},
                     [an, sums = std::move(sums), n, m](const Node& o) {
                       if (!an->requires_grad) return;
                       for (std::size_t i = 0; i < n; ++i) {
                         // d out_ij / d a_ik = delta_jk / s - a_ij / s^2
                         double dot = 0.0;
                         for (std::size_t j = 0; j < m; ++j) dot += o.grad[i * m + j] * o.value[i * m + j];
                         const double inv = 1.0 / sums[i];
                         for (std::size_t j = 0; j < m; ++j) {
                           an->grad[i * m + j] += (o.grad[i * m + j] - dot) * inv;
                         }
                       }
                     });
}

Tensor row_softmax_cross_entropy(const Tensor& logits, std::span<const int> labels,
                                 std::span<const std::uint8_t> mask) {
  require_defined(logits, "row_softmax_cross_entropy");
  const std::size_t n = logits.rows(), c = logits.cols();
  if (labels.size() != n || mask.size() != n) {
    throw DimensionError("row_softmax_cross_entropy: logits " + logits.shape().str() + " with " +
                         std::to_string(labels.size()) + " labels and " +
                         std::to_string(mask.size()) + " mask entries");
  }
  auto lv = logits.values();
  std::vector<double> probs(n * c, 0.0);
  std::size_t count = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw ContractError("row_softmax_cross_entropy: label " + std::to_string(labels[i]) +
                          " of row " + std::to_string(i) + " outside [0, " + std::to_string(c) +
                          ")");
    }
    const double* row = lv.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
    const double logz = mx + std::log(z);
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] = std::exp(row[j] - logz);
    total += logz - row[labels[i]];
    ++count;
  }
  if (count == 0) throw ContractError("row_softmax_cross_entropy: mask selects no rows");
  NodePtr ln = logits.node();
  std::vector<int> lab(labels.begin(), labels.end());
  std::vector<std::uint8_t> msk(mask.begin(), mask.end());
  return make_result({1, 1}, {total / static_cast<double>(count)}, "row_softmax_cross_entropy",
                     {ln},
                     [ln, probs = std::move(probs), lab = std::move(lab), msk = std::move(msk), n,
                      c, count](const Node& o) {
                       if (!ln->requires_grad) return;
                       const double scale = o.grad[0] / static_cast<double>(count);
                       for (std::size_t i = 0; i < n; ++i) {
                         if (!msk[i]) continue;
                         for (std::size_t j = 0; j < c; ++j) {
                           const double onehot = static_cast<int>(j) == lab[i] ? 1.0 : 0.0;
                           ln->grad[i * c + j] += scale * (probs[i * c + j] - onehot);
                         }
                       }
                     });
}

Tensor concat_rows(const Tensor& top, const Tensor& bottom) {
  require_defined(top, "concat_rows");
  require_defined(bottom, "concat_rows");
  if (top.cols() != bottom.cols()) {
    throw DimensionError("concat_rows: column counts differ, " + top.shape().str() + " and " +
                         bottom.shape().str());
  }
  std::vector<double> out;
  out.reserve(top.size() + bottom.size());
  out.insert(out.end(), top.values().begin(), top.values().end());
  out.insert(out.end(), bottom.values().begin(), bottom.values().end());
  NodePtr tn = top.node(), bn = bottom.node();
  const std::size_t split = top.size();
  return make_result({top.rows() + bottom.rows(), top.cols()}, std::move(out), "concat_rows",
                     {tn, bn}, [tn, bn, split](const Node& o) {
                       for (std::size_t i = 0; i < o.grad.size(); ++i) {
                         if (i < split) {
                           if (tn->requires_grad) tn->grad[i] += o.grad[i];
                         } else if (bn->requires_grad) {
                           bn->grad[i - split] += o.grad[i];
                         }
                       }
                     });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  require_defined(x, "gather_rows");
  const std::size_t m = x.cols();
  std::vector<double> out(rows.size() * m);
  auto xv = x.values();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= x.rows()) {
      throw DimensionError("gather_rows: row index " + std::to_string(rows[r]) +
                           " out of range for " + x.shape().str());
    }
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(rows[r] * m), m, out.begin() + static_cast<std::ptrdiff_t>(r * m));
  }
  NodePtr xn = x.node();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return make_result({rows.size(), m}, std::move(out), "gather_rows", {xn},
                     [xn, idx = std::move(idx), m](const Node& o) {
                       if (!xn->requires_grad) return;
                       for (std::size_t r = 0; r < idx.size(); ++r) {
                         for (std::size_t j = 0; j < m; ++j) xn->grad[idx[r] * m + j] += o.grad[r * m + j];
                       }
                     });
}

}  // namespace lgl
