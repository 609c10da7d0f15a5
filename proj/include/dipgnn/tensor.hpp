#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dipgnn/errors.hpp"
#include "dipgnn/rng.hpp"

namespace dipgnn {

/// One node of the recorded computation. Holds the forward value and, when
/// any input requires gradients, a closure that pushes this node's gradient
/// into its parents.
struct TensorNode {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward;

  std::int64_t size() const { return static_cast<std::int64_t>(value.size()); }
};

/// Dense row-major tensor handle. Copies share the underlying node; ops build
/// the recorded graph used by backward().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

  static Tensor constant(std::vector<int> shape, std::vector<double> data);
  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor param(std::vector<int> shape, std::vector<double> data);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int i) const { return node_->shape[static_cast<std::size_t>(i)]; }
  std::int64_t size() const { return node_->size(); }
  int rows() const;
  int cols() const;

  const std::vector<double>& value() const { return node_->value; }
  std::vector<double>& mutable_value() { return node_->value; }
  const std::vector<double>& grad() const;
  std::vector<double>& mutable_grad();
  void zero_grad();

  bool requires_grad() const { return node_->requires_grad; }
  double scalar() const;
  double at(int r, int c) const { return node_->value[static_cast<std::size_t>(r) * cols() + c]; }

  const std::shared_ptr<TensorNode>& node() const { return node_; }

 private:
  std::shared_ptr<TensorNode> node_;
};

// Recorded operations. Each returns the forward value and registers an exact
// reverse-mode rule; every output is checked for finiteness.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);  // same shape, or b broadcast over rows
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor concat(const Tensor& a, const Tensor& b);  // column-wise
Tensor row_gather(const Tensor& a, const std::vector<int>& rows);
Tensor segment_mean(const Tensor& values, const std::vector<int>& segment_ids,
                    int num_segments);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor dropout(const Tensor& a, double p, Rng& rng);
Tensor reshape(const Tensor& a, std::vector<int> shape);
Tensor detach(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor l2_loss(const Tensor& a);  // sum of squares

/// Row-wise trainable-free cosine: out[i] = <a_i, b_i> / (||a_i|| * ||b_i||),
/// with 1e-8 guards in the denominators; exact-zero rows score 0.
Tensor rowwise_cosine(const Tensor& a, const Tensor& b);

/// Sum over rows of -log softmax(logits)[label].
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

/// Same loss over variable-length segments of a flat score vector.
/// offsets has num_segments+1 entries; truth_pos[i] indexes within segment i.
Tensor segment_softmax_cross_entropy(const Tensor& scores,
                                     const std::vector<int>& offsets,
                                     const std::vector<int>& truth_pos);

/// Sum over entries of the stable binary cross entropy on logits.
Tensor binary_cross_entropy_with_logits(const Tensor& logits,
                                        const std::vector<double>& labels);

/// Reverse-mode pass from a scalar loss. Gradients of all reachable nodes are
/// reset first, then accumulated exactly (shared subexpressions included).
void backward(const Tensor& loss);

// Forward-only helpers.
std::vector<double> row_softmax(const Tensor& logits);
double sigmoid_value(double x);

}  // namespace dipgnn
