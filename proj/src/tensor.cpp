#include "srf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace srf {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

namespace detail {

std::vector<double>& TensorNode::ensure_grad() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad;
}

void check_finite(const TensorNode& node) {
  for (double v : node.data) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + node.op);
  }
}

Tensor make_result(const char* op, Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
                   std::function<void(TensorNode&)> backward_fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  const bool needs_grad = g_grad_enabled &&
      std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
#ifndef NDEBUG
  const bool finite_inputs = std::all_of(inputs.begin(), inputs.end(), [](const Tensor& t) {
    return std::all_of(t.data().begin(), t.data().end(), [](double v) { return std::isfinite(v); });
  });
  if (finite_inputs) check_finite(*node);
#endif
  if (needs_grad) {
    node->requires_grad = true;
    node->backward = std::move(backward_fn);
    node->parents.reserve(inputs.size());
    for (auto& t : inputs) node->parents.push_back(t.node());
  }
  return Tensor(std::move(node));
}

}  // namespace detail

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  if (numel(shape) != data.size()) {
    throw ShapeError("tensor shape " + to_string(shape) + " does not match " + std::to_string(data.size()) +
                     " values");
  }
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor shape " + to_string(shape) + " has a zero dimension");
  }
  node_ = std::make_shared<detail::TensorNode>();
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({1}, {value}, requires_grad); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) throw ShapeError("axis " + std::to_string(axis) + " out of range for " + to_string(shape()));
  return node_->shape[axis];
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + to_string(shape()));
  return node_->data[0];
}

Tensor& Tensor::set_requires_grad(bool flag) {
  node_->requires_grad = flag;
  return *this;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->data, false); }

Tensor Tensor::clone() const { return Tensor(node_->shape, node_->data, node_->requires_grad); }

Graph Graph::trace(const Tensor& root) {
  Graph g;
  if (!root.defined()) return g;
  // Iterative post-order DFS; deep GRU graphs would overflow a recursive walk.
  std::unordered_set<detail::TensorNode*> done;
  std::vector<std::pair<detail::TensorNode*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  std::unordered_set<detail::TensorNode*> on_stack{root.node().get()};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      auto* parent = node->parents[next++].get();
      if (!parent->requires_grad || done.count(parent) || on_stack.count(parent)) continue;
      on_stack.insert(parent);
      stack.emplace_back(parent, 0);
    } else {
      done.insert(node);
      on_stack.erase(node);
      g.nodes_.push_back(node);
      stack.pop_back();
    }
  }
  return g;
}

bool Graph::is_topological() const {
  std::unordered_map<const detail::TensorNode*, std::size_t> pos;
  for (std::size_t i = 0; i < nodes_.size(); ++i) pos[nodes_[i]] = i;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (auto& p : nodes_[i]->parents) {
      auto it = pos.find(p.get());
      if (it != pos.end() && it->second >= i) return false;
    }
  }
  return true;
}

std::size_t backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got " +
                        (loss.defined() ? to_string(loss.shape()) : std::string("undefined tensor")));
  }
  if (!loss.requires_grad()) throw ContractError("backward() on a loss that does not require grad");
  auto graph = Graph::trace(loss);
  loss.node()->ensure_grad()[0] += 1.0;
  const auto& nodes = graph.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    auto* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
  // Intermediate gradients are not needed once they have been propagated.
  for (auto* node : nodes) {
    if (node->backward && node != loss.node().get()) {
      std::vector<double>().swap(node->grad);
    }
  }
  return nodes.size();
}

}  // namespace srf
