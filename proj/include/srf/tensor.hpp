#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace srf {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes passed to an op.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid layer / model / simulation configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation precondition (e.g. non-scalar loss).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Files that are missing, truncated or of the wrong format.
class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, singular systems, divergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a backward pass reaches this node
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<TensorNode>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(TensorNode&)> backward;

  std::vector<double>& ensure_grad();
};

}  // namespace detail

/// Dense row-major tensor of doubles taking part in a reverse-mode graph.
///
/// Tensor is a handle: copies share storage, like a reference-counted array.
/// Use clone() for a deep copy. Results of ops on tensors that require
/// gradients remember their parents; backward() walks that record.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return node_->data.size(); }

  std::span<const double> data() const { return node_->data; }
  // Writable view; only meaningful on leaves (parameters, inputs).
  std::span<double> mutable_data() { return node_->data; }
  double item() const;
  double at(std::size_t flat_index) const { return node_->data.at(flat_index); }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool flag);
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  bool is_leaf() const { return !node_->backward; }
  const char* op_name() const { return node_->op; }

  // Same values, no graph history, no gradient.
  Tensor detach() const;
  // Deep copy keeping requires_grad, dropping history and gradient.
  Tensor clone() const;

  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::TensorNode>& node() const { return node_; }

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

/// Topologically ordered view of the graph that produced a tensor.
class Graph {
 public:
  static Graph trace(const Tensor& root);

  const std::vector<detail::TensorNode*>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  // True when every node's parents appear before it.
  bool is_topological() const;

 private:
  std::vector<detail::TensorNode*> nodes_;
};

/// While alive, ops on this thread record no graph (inference mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Populates grad on every tensor reachable from `loss` that requires it.
/// Leaf gradients accumulate across calls; call zero_grad() between steps.
/// Returns the number of graph nodes visited.
std::size_t backward(const Tensor& loss);

namespace detail {

// Builds an op result. When no input requires a gradient the result is a
// plain leaf and `backward_fn` is dropped.
Tensor make_result(const char* op, Shape shape, std::vector<double> data,
                   std::vector<Tensor> inputs, std::function<void(TensorNode&)> backward_fn);

void check_finite(const TensorNode& node);

}  // namespace detail

}  // namespace srf
