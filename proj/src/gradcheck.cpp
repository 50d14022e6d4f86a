#include "lgl/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "lgl/errors.hpp"
#include "lgl/gcn.hpp"
#include "lgl/random.hpp"

namespace lgl {

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) {
    throw DimensionError("relative_error: " + std::to_string(analytic.size()) + " vs " +
                         std::to_string(numeric.size()) + " entries");
  }
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::sqrt(std::max(na, nn));
  if (denom < 1e-12) return 0.0;
  return std::sqrt(diff) / denom;
}

double check_gradients(const LossFn& loss, std::vector<Tensor>& inputs, double h) {
  backward(loss(inputs));
  std::vector<double> analytic, numeric;
  for (const auto& t : inputs) {
    auto g = t.grad();
    if (g.empty()) {
      analytic.insert(analytic.end(), t.size(), 0.0);
    } else {
      analytic.insert(analytic.end(), g.begin(), g.end());
    }
  }
  for (auto& t : inputs) {
    auto v = t.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double up = loss(inputs).item();
      v[i] = keep - h;
      const double down = loss(inputs).item();
      v[i] = keep;
      numeric.push_back((up - down) / (2.0 * h));
    }
  }
  return relative_error(analytic, numeric);
}

double GradCheckReport::max_op_error() const {
  double m = 0.0;
  for (const auto& e : ops) m = std::max(m, e.max_rel_error);
  return m;
}

namespace {

Tensor random_leaf(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(r * c);
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(r, c, std::move(v), true);
}

// Entries bounded away from zero so that ReLU has no kink within h.
Tensor away_from_zero(std::size_t r, std::size_t c, Rng& rng) {
  std::vector<double> v(r * c);
  for (double& x : v) {
    x = rng.uniform(0.05, 1.0);
    if (rng.bernoulli(0.5)) x = -x;
  }
  return Tensor::from(r, c, std::move(v), true);
}

// sum(out * R) with a fixed random R turns any op into a scalar loss.
Tensor project(const Tensor& out, const Tensor& r) { return sum(hadamard(out, r)); }

struct OpCase {
  const char* name;
  std::function<std::pair<std::vector<Tensor>, LossFn>(Rng&)> make;
};

std::vector<OpCase> op_cases() {
  auto with_projection = [](Rng& rng, std::size_t r, std::size_t c) {
    return random_leaf(r, c, rng).detach();
  };
  std::vector<OpCase> cases;
  cases.push_back({"matmul", [=](Rng& rng) {
                     const std::size_t n = 2 + rng.index(4), k = 2 + rng.index(4), m = 2 + rng.index(4);
                     const Tensor r = with_projection(rng, n, m);
                     return std::pair{std::vector<Tensor>{random_leaf(n, k, rng), random_leaf(k, m, rng)},
                                      LossFn([=](const std::vector<Tensor>& in) {
                                        return project(matmul(in[0], in[1]), r);
                                      })};
                   }});
  auto binary = [=](const char* name, Tensor (*op)(const Tensor&, const Tensor&)) {
    return OpCase{name, [=](Rng& rng) {
                    const std::size_t n = 1 + rng.index(5), m = 1 + rng.index(5);
                    const Tensor r = with_projection(rng, n, m);
                    return std::pair{std::vector<Tensor>{random_leaf(n, m, rng), random_leaf(n, m, rng)},
                                     LossFn([=](const std::vector<Tensor>& in) {
                                       return project(op(in[0], in[1]), r);
                                     })};
                  }};
  };
  cases.push_back(binary("add", &add));
  cases.push_back(binary("subtract", &subtract));
  cases.push_back(binary("hadamard", &hadamard));
  cases.push_back({"scalar_mul", [=](Rng& rng) {
                     const double s = rng.uniform(-2.0, 2.0);
                     const Tensor r = with_projection(rng, 3, 4);
                     return std::pair{std::vector<Tensor>{random_leaf(3, 4, rng)},
                                      LossFn([=](const std::vector<Tensor>& in) {
                                        return project(scalar_mul(in[0], s), r);
                                      })};
                   }});
  cases.push_back({"add_row_bias", [=](Rng& rng) {
                     const std::size_t n = 1 + rng.index(5), m = 1 + rng.index(5);
                     const Tensor r = with_projection(rng, n, m);
                     return std::pair{std::vector<Tensor>{random_leaf(n, m, rng), random_leaf(1, m, rng)},
                                      LossFn([=](const std::vector<Tensor>& in) {
                                        return project(add_row_bias(in[0], in[1]), r);
                                      })};
                   }});
  auto scalar_op = [=](const char* name, Tensor (*op)(const Tensor&, const Tensor&)) {
    return OpCase{name, [=](Rng& rng) {
                    const Tensor r = with_projection(rng, 4, 3);
                    return std::pair{std::vector<Tensor>{random_leaf(1, 1, rng), random_leaf(4, 3, rng)},
                                     LossFn([=](const std::vector<Tensor>& in) {
                                       return project(op(in[0], in[1]), r);
                                     })};
                  }};
  };
  cases.push_back(scalar_op("scale_by", &scale_by));
  cases.push_back(scalar_op("subtract_from_scalar", &subtract_from_scalar));
  auto unary = [=](const char* name, Tensor (*op)(const Tensor&), bool avoid_zero) {
    return OpCase{name, [=](Rng& rng) {
                    const std::size_t n = 1 + rng.index(5), m = 1 + rng.index(5);
                    const Tensor r = with_projection(rng, n, m);
                    Tensor x = avoid_zero ? away_from_zero(n, m, rng) : random_leaf(n, m, rng, -3.0, 3.0);
                    return std::pair{std::vector<Tensor>{x}, LossFn([=](const std::vector<Tensor>& in) {
                                       return project(op(in[0]), r);
                                     })};
                  }};
  };
  cases.push_back(unary("relu", &relu, true));
  cases.push_back(unary("tanh", &lgl::tanh, false));
  cases.push_back(unary("sigmoid", &sigmoid, false));
  cases.push_back(unary("softplus", &softplus, false));
  cases.push_back({"sum", [=](Rng& rng) {
                     const double w = rng.uniform(0.5, 2.0);
                     return std::pair{std::vector<Tensor>{random_leaf(3, 5, rng)},
                                      LossFn([=](const std::vector<Tensor>& in) {
                                        return scalar_mul(sum(in[0]), w);
                                      })};
                   }});
  cases.push_back({"pairwise_euclidean", [=](Rng& rng) {
                     const std::size_t n = 2 + rng.index(5), k = 1 + rng.index(4);
                     const Tensor r = with_projection(rng, n, n);
                     return std::pair{std::vector<Tensor>{random_leaf(n, k, rng)},
                                      LossFn([=](const std::vector<Tensor>& in) {
                                        return project(pairwise_euclidean(in[0]), r);
                                      })};
                   }});
  cases.push_back({"row_normalize", [=](Rng& rng) {
                     // m >= 2: a single column normalizes to a constant.
                     const std::size_t n = 1 + rng.index(5), m = 2 + rng.index(4);
                     const Tensor r = with_projection(rng, n, m);
                     return std::pair{std::vector<Tensor>{random_leaf(n, m, rng, 0.1, 1.0)},
                                      LossFn([=](const std::vector<Tensor>& in) {
                                        return project(row_normalize(in[0]), r);
                                      })};
                   }});
  cases.push_back({"row_softmax_cross_entropy", [=](Rng& rng) {
                     const std::size_t n = 2 + rng.index(5), c = 2 + rng.index(3);
                     std::vector<int> labels(n);
                     std::vector<std::uint8_t> mask(n);
                     for (std::size_t i = 0; i < n; ++i) {
                       labels[i] = static_cast<int>(rng.index(c));
                       mask[i] = i == 0 || rng.bernoulli(0.7);
                     }
                     return std::pair{std::vector<Tensor>{random_leaf(n, c, rng, -3.0, 3.0)},
                                      LossFn([=](const std::vector<Tensor>& in) {
                                        return row_softmax_cross_entropy(in[0], labels, mask);
                                      })};
                   }});
  cases.push_back({"concat_rows", [=](Rng& rng) {
                     const std::size_t a = 1 + rng.index(4), b = 1 + rng.index(4), m = 1 + rng.index(4);
                     const Tensor r = with_projection(rng, a + b, m);
                     return std::pair{std::vector<Tensor>{random_leaf(a, m, rng), random_leaf(b, m, rng)},
                                      LossFn([=](const std::vector<Tensor>& in) {
                                        return project(concat_rows(in[0], in[1]), r);
                                      })};
                   }});
  cases.push_back({"gather_rows", [=](Rng& rng) {
                     const std::size_t n = 2 + rng.index(4), m = 1 + rng.index(4), k = 1 + rng.index(6);
                     std::vector<std::size_t> rows(k);
                     for (auto& i : rows) i = rng.index(n);  // repeats allowed
                     const Tensor r = with_projection(rng, k, m);
                     return std::pair{std::vector<Tensor>{random_leaf(n, m, rng)},
                                      LossFn([=](const std::vector<Tensor>& in) {
                                        return project(gather_rows(in[0], rows), r);
                                      })};
                   }});
  return cases;
}

double end_to_end_instance(Rng& rng, double h) {
  const std::size_t n = 6 + rng.index(4), d = 3 + rng.index(3), c = 3;
  std::vector<double> xv(n * d);
  for (double& v : xv) v = rng.normal();
  const Tensor x = Tensor::from(n, d, std::move(xv));
  std::vector<int> labels(n);
  std::vector<std::uint8_t> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % c);
    mask[i] = i < n - 2;
  }
  ArchitectureConfig arch;
  arch.embed_hidden = {5};
  arch.embed_dim = 3;
  arch.gc_widths = {4, 3};
  ModelParams params = ModelParams::init(arch, x, c, rng);
  std::vector<Tensor> leaves = params.trainable();
  // The leaves are shared with `params`, so forward() sees the perturbations.
  const LossFn loss = [&](const std::vector<Tensor>&) {
    return row_softmax_cross_entropy(forward(x, params).logits, labels, mask);
  };
  return check_gradients(loss, leaves, h);
}

}  // namespace

GradCheckReport run_gradcheck(std::uint64_t seed, std::size_t instances, double h) {
  if (instances == 0) throw ContractError("run_gradcheck: need at least one instance");
  Rng rng(seed);
  GradCheckReport report;
  for (const auto& op : op_cases()) {
    GradCheckEntry e{op.name, 0.0, instances};
    for (std::size_t k = 0; k < instances; ++k) {
      auto [inputs, loss] = op.make(rng);
      e.max_rel_error = std::max(e.max_rel_error, check_gradients(loss, inputs, h));
    }
    report.ops.push_back(std::move(e));
  }
  report.end_to_end = {"end_to_end", 0.0, instances};
  for (std::size_t k = 0; k < instances; ++k) {
    report.end_to_end.max_rel_error =
        std::max(report.end_to_end.max_rel_error, end_to_end_instance(rng, h));
  }
  return report;
}

}  // namespace lgl
