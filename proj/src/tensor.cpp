#include "dipgnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace dipgnn {
namespace {

constexpr double kCosineEps = 1e-8;

std::int64_t shape_size(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw DataError("tensor: negative dimension");
    n *= d;
  }
  return n;
}

void check_finite(const TensorNode& node) {
  for (double v : node.value) {
    if (!std::isfinite(v)) {
      throw NumericalError(std::string("non-finite value in op '") + node.op + "'");
    }
  }
}

std::shared_ptr<TensorNode> new_node(std::vector<int> shape, const char* op,
                                     std::vector<std::shared_ptr<TensorNode>> parents) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value.assign(static_cast<std::size_t>(shape_size(node->shape)), 0.0);
  node->op = op;
  for (const auto& p : parents) {
    if (p->requires_grad) node->requires_grad = true;
  }
  node->parents = std::move(parents);
  return node;
}

void finish(const std::shared_ptr<TensorNode>& node,
            std::function<void(TensorNode&)> backward_fn) {
  check_finite(*node);
  if (node->requires_grad) {
    node->grad.assign(node->value.size(), 0.0);
    node->backward = std::move(backward_fn);
  }
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DataError(std::string(op) + ": expected a rank-2 tensor");
}

}  // namespace

Tensor Tensor::constant(std::vector<int> shape, std::vector<double> data) {
  if (static_cast<std::int64_t>(data.size()) != shape_size(shape)) {
    throw DataError("Tensor::constant: data length does not match shape");
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  check_finite(*node);
  return Tensor(node);
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  auto node = std::make_shared<TensorNode>();
  node->value.assign(static_cast<std::size_t>(shape_size(shape)), 0.0);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->value.size(), 0.0);
  return Tensor(node);
}

Tensor Tensor::param(std::vector<int> shape, std::vector<double> data) {
  Tensor t = constant(std::move(shape), std::move(data));
  t.node()->requires_grad = true;
  t.node()->grad.assign(t.node()->value.size(), 0.0);
  return t;
}

int Tensor::rows() const {
  if (rank() == 1) return dim(0);
  if (rank() == 2) return dim(0);
  throw DataError("Tensor::rows: rank must be 1 or 2");
}

int Tensor::cols() const {
  if (rank() == 1) return 1;
  if (rank() == 2) return dim(1);
  throw DataError("Tensor::cols: rank must be 1 or 2");
}

const std::vector<double>& Tensor::grad() const {
  if (!node_->requires_grad) throw DataError("Tensor::grad: tensor does not require grad");
  return node_->grad;
}

std::vector<double>& Tensor::mutable_grad() {
  if (!node_->requires_grad) throw DataError("Tensor::grad: tensor does not require grad");
  return node_->grad;
}

void Tensor::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double Tensor::scalar() const {
  if (size() != 1) throw DataError("Tensor::scalar: tensor is not a scalar");
  return node_->value[0];
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) throw DataError("matmul: inner dimensions do not match");
  auto node = new_node({m, n}, "matmul", {a.node(), b.node()});
  const double* A = a.value().data();
  const double* B = b.value().data();
  double* C = node->value.data();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aip = A[static_cast<std::size_t>(i) * k + p];
      if (aip == 0.0) continue;
      const double* Brow = B + static_cast<std::size_t>(p) * n;
      double* Crow = C + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) Crow[j] += aip * Brow[j];
    }
  }
  finish(node, [m, k, n](TensorNode& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    const double* G = self.grad.data();
    if (pa.requires_grad) {
      const double* B = pb.value.data();
      double* dA = pa.grad.data();
      for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
          double acc = 0.0;
          const double* Grow = G + static_cast<std::size_t>(i) * n;
          const double* Brow = B + static_cast<std::size_t>(p) * n;
          for (int j = 0; j < n; ++j) acc += Grow[j] * Brow[j];
          dA[static_cast<std::size_t>(i) * k + p] += acc;
        }
      }
    }
    if (pb.requires_grad) {
      const double* A = pa.value.data();
      double* dB = pb.grad.data();
      for (int i = 0; i < m; ++i) {
        const double* Grow = G + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
          const double aip = A[static_cast<std::size_t>(i) * k + p];
          if (aip == 0.0) continue;
          double* dBrow = dB + static_cast<std::size_t>(p) * n;
          for (int j = 0; j < n; ++j) dBrow[j] += aip * Grow[j];
        }
      }
    }
  });
  return Tensor(node);
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const int m = a.dim(0), n = a.dim(1);
  auto node = new_node({n, m}, "transpose", {a.node()});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      node->value[static_cast<std::size_t>(j) * m + i] =
          a.value()[static_cast<std::size_t>(i) * n + j];
    }
  }
  finish(node, [m, n](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        pa.grad[static_cast<std::size_t>(i) * n + j] +=
            self.grad[static_cast<std::size_t>(j) * m + i];
      }
    }
  });
  return Tensor(node);
}

namespace {

Tensor add_like(const Tensor& a, const Tensor& b, double sign, const char* opname) {
  const bool broadcast = a.rank() == 2 && b.size() == a.dim(1) && b.rank() <= 2 &&
                         (b.rank() == 1 || b.dim(0) == 1);
  if (!broadcast && a.shape() != b.shape()) {
    throw DataError(std::string(opname) + ": shape mismatch");
  }
  auto node = new_node(a.shape(), opname, {a.node(), b.node()});
  const std::size_t n = a.value().size();
  if (broadcast) {
    const int rows = a.dim(0), cols = a.dim(1);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        node->value[static_cast<std::size_t>(i) * cols + j] =
            a.value()[static_cast<std::size_t>(i) * cols + j] + sign * b.value()[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) node->value[i] = a.value()[i] + sign * b.value()[i];
  }
  finish(node, [broadcast, sign](TensorNode& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      if (broadcast) {
        const int cols = self.shape[1];
        const int rows = self.shape[0];
        for (int i = 0; i < rows; ++i) {
          for (int j = 0; j < cols; ++j) {
            pb.grad[j] += sign * self.grad[static_cast<std::size_t>(i) * cols + j];
          }
        }
      } else {
        for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += sign * self.grad[i];
      }
    }
  });
  return Tensor(node);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_like(a, b, 1.0, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return add_like(a, b, -1.0, "sub"); }

Tensor scale(const Tensor& a, double s) {
  if (!std::isfinite(s)) throw NumericalError("scale: non-finite factor");
  auto node = new_node(a.shape(), "scale", {a.node()});
  for (std::size_t i = 0; i < a.value().size(); ++i) node->value[i] = s * a.value()[i];
  finish(node, [s](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += s * self.grad[i];
  });
  return Tensor(node);
}

Tensor concat(const Tensor& a, const Tensor& b) {
  require_rank2(a, "concat");
  require_rank2(b, "concat");
  if (a.dim(0) != b.dim(0)) throw DataError("concat: row counts differ");
  const int m = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  auto node = new_node({m, ca + cb}, "concat", {a.node(), b.node()});
  for (int i = 0; i < m; ++i) {
    std::copy_n(a.value().begin() + static_cast<std::size_t>(i) * ca, ca,
                node->value.begin() + static_cast<std::size_t>(i) * (ca + cb));
    std::copy_n(b.value().begin() + static_cast<std::size_t>(i) * cb, cb,
                node->value.begin() + static_cast<std::size_t>(i) * (ca + cb) + ca);
  }
  finish(node, [m, ca, cb](TensorNode& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    for (int i = 0; i < m; ++i) {
      const double* g = self.grad.data() + static_cast<std::size_t>(i) * (ca + cb);
      if (pa.requires_grad) {
        for (int j = 0; j < ca; ++j) pa.grad[static_cast<std::size_t>(i) * ca + j] += g[j];
      }
      if (pb.requires_grad) {
        for (int j = 0; j < cb; ++j) pb.grad[static_cast<std::size_t>(i) * cb + j] += g[ca + j];
      }
    }
  });
  return Tensor(node);
}

Tensor row_gather(const Tensor& a, const std::vector<int>& rows) {
  require_rank2(a, "row_gather");
  const int n = a.dim(0), d = a.dim(1);
  for (int r : rows) {
    if (r < 0 || r >= n) throw DataError("row_gather: row index out of range");
  }
  const int m = static_cast<int>(rows.size());
  auto node = new_node({m, d}, "row_gather", {a.node()});
  for (int i = 0; i < m; ++i) {
    std::copy_n(a.value().begin() + static_cast<std::size_t>(rows[i]) * d, d,
                node->value.begin() + static_cast<std::size_t>(i) * d);
  }
  finish(node, [rows, d](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double* g = self.grad.data() + i * d;
      double* dst = pa.grad.data() + static_cast<std::size_t>(rows[i]) * d;
      for (int j = 0; j < d; ++j) dst[j] += g[j];
    }
  });
  return Tensor(node);
}

Tensor segment_mean(const Tensor& values, const std::vector<int>& segment_ids,
                    int num_segments) {
  require_rank2(values, "segment_mean");
  const int m = values.dim(0), d = values.dim(1);
  if (static_cast<int>(segment_ids.size()) != m) {
    throw DataError("segment_mean: one segment id per row required");
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(num_segments));
  for (int i = 0; i < m; ++i) {
    const int s = segment_ids[i];
    if (s < 0 || s >= num_segments) throw DataError("segment_mean: segment id out of range");
    members[static_cast<std::size_t>(s)].push_back(i);
  }
  auto node = new_node({num_segments, d}, "segment_mean", {values.node()});
  const double* V = values.value().data();
  // Rows of one segment are accumulated in lexicographic value order, so equal
  // row multisets produce bitwise-equal sums regardless of node labelling.
  for (int s = 0; s < num_segments; ++s) {
    auto& idx = members[static_cast<std::size_t>(s)];
    if (idx.empty()) continue;
    std::sort(idx.begin(), idx.end(), [&](int x, int y) {
      const double* rx = V + static_cast<std::size_t>(x) * d;
      const double* ry = V + static_cast<std::size_t>(y) * d;
      return std::lexicographical_compare(rx, rx + d, ry, ry + d);
    });
    double* out = node->value.data() + static_cast<std::size_t>(s) * d;
    for (int r : idx) {
      const double* row = V + static_cast<std::size_t>(r) * d;
      for (int j = 0; j < d; ++j) out[j] += row[j];
    }
    const double inv = 1.0 / static_cast<double>(idx.size());
    for (int j = 0; j < d; ++j) out[j] *= inv;
  }
  std::vector<int> counts(static_cast<std::size_t>(num_segments), 0);
  for (int s = 0; s < num_segments; ++s) counts[s] = static_cast<int>(members[s].size());
  finish(node, [segment_ids, counts, d](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < segment_ids.size(); ++i) {
      const int s = segment_ids[i];
      const double inv = 1.0 / static_cast<double>(counts[static_cast<std::size_t>(s)]);
      const double* g = self.grad.data() + static_cast<std::size_t>(s) * d;
      double* dst = pa.grad.data() + i * d;
      for (int j = 0; j < d; ++j) dst[j] += inv * g[j];
    }
  });
  return Tensor(node);
}

Tensor relu(const Tensor& a) {
  auto node = new_node(a.shape(), "relu", {a.node()});
  for (std::size_t i = 0; i < a.value().size(); ++i) {
    node->value[i] = a.value()[i] > 0.0 ? a.value()[i] : 0.0;
  }
  finish(node, [](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa.value[i] > 0.0) pa.grad[i] += self.grad[i];
    }
  });
  return Tensor(node);
}

double sigmoid_value(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& a) {
  auto node = new_node(a.shape(), "sigmoid", {a.node()});
  for (std::size_t i = 0; i < a.value().size(); ++i) {
    node->value[i] = sigmoid_value(a.value()[i]);
  }
  finish(node, [](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double s = self.value[i];
      pa.grad[i] += s * (1.0 - s) * self.grad[i];
    }
  });
  return Tensor(node);
}

Tensor dropout(const Tensor& a, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw DataError("dropout: p must be in [0, 1)");
  if (p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(a.value().size());
  for (auto& m : mask) m = rng.uniform() >= p ? keep_scale : 0.0;
  auto node = new_node(a.shape(), "dropout", {a.node()});
  for (std::size_t i = 0; i < mask.size(); ++i) node->value[i] = a.value()[i] * mask[i];
  finish(node, [mask](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += mask[i] * self.grad[i];
  });
  return Tensor(node);
}

Tensor reshape(const Tensor& a, std::vector<int> shape) {
  if (shape_size(shape) != a.size()) throw DataError("reshape: element count mismatch");
  auto node = new_node(std::move(shape), "reshape", {a.node()});
  node->value = a.value();
  finish(node, [](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
  });
  return Tensor(node);
}

Tensor detach(const Tensor& a) {
  return Tensor::constant(a.shape(), a.value());
}

Tensor sum(const Tensor& a) {
  auto node = new_node({1}, "sum", {a.node()});
  double acc = 0.0;
  for (double v : a.value()) acc += v;
  node->value[0] = acc;
  finish(node, [](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < pa.grad.size(); ++i) pa.grad[i] += self.grad[0];
  });
  return Tensor(node);
}

Tensor l2_loss(const Tensor& a) {
  auto node = new_node({1}, "l2_loss", {a.node()});
  double acc = 0.0;
  for (double v : a.value()) acc += v * v;
  node->value[0] = acc;
  finish(node, [](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < pa.grad.size(); ++i) {
      pa.grad[i] += 2.0 * pa.value[i] * self.grad[0];
    }
  });
  return Tensor(node);
}

Tensor rowwise_cosine(const Tensor& a, const Tensor& b) {
  require_rank2(a, "rowwise_cosine");
  require_rank2(b, "rowwise_cosine");
  if (a.shape() != b.shape()) throw DataError("rowwise_cosine: shape mismatch");
  const int m = a.dim(0), d = a.dim(1);
  auto node = new_node({m}, "rowwise_cosine", {a.node(), b.node()});
  for (int i = 0; i < m; ++i) {
    const double* u = a.value().data() + static_cast<std::size_t>(i) * d;
    const double* v = b.value().data() + static_cast<std::size_t>(i) * d;
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (int j = 0; j < d; ++j) {
      dot += u[j] * v[j];
      nu += u[j] * u[j];
      nv += v[j] * v[j];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    node->value[i] = dot / (std::max(nu, kCosineEps) * std::max(nv, kCosineEps));
  }
  finish(node, [m, d](TensorNode& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    for (int i = 0; i < m; ++i) {
      const double g = self.grad[i];
      if (g == 0.0) continue;
      const double* u = pa.value.data() + static_cast<std::size_t>(i) * d;
      const double* v = pb.value.data() + static_cast<std::size_t>(i) * d;
      double nu = 0.0, nv = 0.0;
      for (int j = 0; j < d; ++j) {
        nu += u[j] * u[j];
        nv += v[j] * v[j];
      }
      nu = std::sqrt(nu);
      nv = std::sqrt(nv);
      const double gu = std::max(nu, kCosineEps);
      const double gv = std::max(nv, kCosineEps);
      const double c = self.value[i];
      const double inv = 1.0 / (gu * gv);
      if (pa.requires_grad) {
        double* du = pa.grad.data() + static_cast<std::size_t>(i) * d;
        const double k = nu > kCosineEps ? c / (gu * gu) : 0.0;
        for (int j = 0; j < d; ++j) du[j] += g * (v[j] * inv - k * u[j]);
      }
      if (pb.requires_grad) {
        double* dv = pb.grad.data() + static_cast<std::size_t>(i) * d;
        const double k = nv > kCosineEps ? c / (gv * gv) : 0.0;
        for (int j = 0; j < d; ++j) dv[j] += g * (u[j] * inv - k * v[j]);
      }
    }
  });
  return Tensor(node);
}

namespace {

// Shared softmax cross entropy over one contiguous score range.
// Returns the loss; writes softmax probabilities if probs != nullptr.
double softmax_ce_forward(const double* z, int n, int truth, double* probs) {
  double m = z[0];
  for (int j = 1; j < n; ++j) m = std::max(m, z[j]);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += std::exp(z[j] - m);
  const double lse = m + std::log(acc);
  if (probs != nullptr) {
    for (int j = 0; j < n; ++j) probs[j] = std::exp(z[j] - lse);
  }
  return lse - z[truth];
}

}  // namespace

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  require_rank2(logits, "softmax_cross_entropy");
  const int m = logits.dim(0), c = logits.dim(1);
  if (static_cast<int>(labels.size()) != m) {
    throw DataError("softmax_cross_entropy: one label per row required");
  }
  if (c == 0) throw DataError("softmax_cross_entropy: empty class dimension");
  for (int y : labels) {
    if (y < 0 || y >= c) throw DataError("softmax_cross_entropy: label out of range");
  }
  auto node = new_node({1}, "softmax_cross_entropy", {logits.node()});
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    total += softmax_ce_forward(logits.value().data() + static_cast<std::size_t>(i) * c, c,
                                labels[i], nullptr);
  }
  node->value[0] = total;
  finish(node, [labels, m, c](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    const double g = self.grad[0];
    std::vector<double> probs(static_cast<std::size_t>(c));
    for (int i = 0; i < m; ++i) {
      softmax_ce_forward(pa.value.data() + static_cast<std::size_t>(i) * c, c, labels[i],
                         probs.data());
      double* dz = pa.grad.data() + static_cast<std::size_t>(i) * c;
      for (int j = 0; j < c; ++j) {
        dz[j] += g * (probs[j] - (j == labels[i] ? 1.0 : 0.0));
      }
    }
  });
  return Tensor(node);
}

Tensor segment_softmax_cross_entropy(const Tensor& scores,
                                     const std::vector<int>& offsets,
                                     const std::vector<int>& truth_pos) {
  if (scores.rank() != 1) throw DataError("segment_softmax_cross_entropy: scores must be rank 1");
  if (offsets.empty() || offsets.front() != 0 ||
      offsets.back() != static_cast<int>(scores.size())) {
    throw DataError("segment_softmax_cross_entropy: bad offsets");
  }
  const int segments = static_cast<int>(offsets.size()) - 1;
  if (static_cast<int>(truth_pos.size()) != segments) {
    throw DataError("segment_softmax_cross_entropy: one truth index per segment required");
  }
  for (int s = 0; s < segments; ++s) {
    const int len = offsets[s + 1] - offsets[s];
    if (len <= 0) throw DataError("segment_softmax_cross_entropy: empty segment");
    if (truth_pos[s] < 0 || truth_pos[s] >= len) {
      throw DataError("segment_softmax_cross_entropy: truth index out of range");
    }
  }
  auto node = new_node({1}, "segment_softmax_cross_entropy", {scores.node()});
  double total = 0.0;
  for (int s = 0; s < segments; ++s) {
    total += softmax_ce_forward(scores.value().data() + offsets[s],
                                offsets[s + 1] - offsets[s], truth_pos[s], nullptr);
  }
  node->value[0] = total;
  finish(node, [offsets, truth_pos, segments](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    const double g = self.grad[0];
    for (int s = 0; s < segments; ++s) {
      const int len = offsets[s + 1] - offsets[s];
      std::vector<double> probs(static_cast<std::size_t>(len));
      softmax_ce_forward(pa.value.data() + offsets[s], len, truth_pos[s], probs.data());
      double* dz = pa.grad.data() + offsets[s];
      for (int j = 0; j < len; ++j) {
        dz[j] += g * (probs[j] - (j == truth_pos[s] ? 1.0 : 0.0));
      }
    }
  });
  return Tensor(node);
}

Tensor binary_cross_entropy_with_logits(const Tensor& logits,
                                        const std::vector<double>& labels) {
  if (logits.rank() == 2 && logits.dim(1) != 1) {
    throw DataError("binary_cross_entropy_with_logits: logits must be flat or a column");
  }
  const int m = logits.rows();
  if (static_cast<int>(labels.size()) != m) {
    throw DataError("binary_cross_entropy_with_logits: one label per logit required");
  }
  for (double y : labels) {
    if (y < 0.0 || y > 1.0) throw DataError("binary_cross_entropy_with_logits: label not in [0,1]");
  }
  auto node = new_node({1}, "binary_cross_entropy_with_logits", {logits.node()});
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = logits.value()[static_cast<std::size_t>(i)];
    const double softplus = std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s)));
    total += softplus - labels[static_cast<std::size_t>(i)] * s;
  }
  node->value[0] = total;
  finish(node, [labels, m](TensorNode& self) {
    auto& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    const double g = self.grad[0];
    for (int i = 0; i < m; ++i) {
      const double s = pa.value[static_cast<std::size_t>(i)];
      pa.grad[static_cast<std::size_t>(i)] +=
          g * (sigmoid_value(s) - labels[static_cast<std::size_t>(i)]);
    }
  });
  return Tensor(node);
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw DataError("backward: undefined tensor");
  if (loss.size() != 1) throw DataError("backward: loss must be a scalar");
  TensorNode* root = loss.node().get();
  if (!root->requires_grad) {
    throw DataError("backward: loss does not depend on any parameter");
  }
  // Iterative post-order over the requires_grad subgraph.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> visited;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    bool descended = false;
    while (next < node->parents.size()) {
      TensorNode* p = node->parents[next].get();
      ++next;
      if (p->requires_grad && visited.insert(p).second) {
        stack.emplace_back(p, 0);
        descended = true;
        break;
      }
    }
    if (!descended && (stack.back().second >= stack.back().first->parents.size())) {
      order.push_back(stack.back().first);
      stack.pop_back();
    }
  }
  for (TensorNode* n : order) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  root->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backward) n->backward(*n);
  }
}

std::vector<double> row_softmax(const Tensor& logits) {
  require_rank2(logits, "row_softmax");
  const int m = logits.dim(0), c = logits.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m) * c);
  for (int i = 0; i < m; ++i) {
    softmax_ce_forward(logits.value().data() + static_cast<std::size_t>(i) * c, c, 0,
                       out.data() + static_cast<std::size_t>(i) * c);
  }
  return out;
}

}  // namespace dipgnn
