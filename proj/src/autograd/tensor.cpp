// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/autograd/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_set>

#include "msivd/common/error.hpp"

namespace msivd::ad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::uint64_t next_node_seq() {
  static std::atomic<std::uint64_t> counter{0};
  return counter.fetch_add(1, std::memory_order_relaxed) + 1;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::full(Shape shape, T value, bool requires_grad) {
  const auto n = numel(shape);
  return from(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
  if (numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + shape_string(shape) + " cannot hold " +
                     std::to_string(values.size()) + " values");
  }
  auto n = std::make_shared<Node<T>>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  n->seq = next_node_seq();
  return BasicTensor(std::move(n));
}

template <typename T>
BasicTensor<T> BasicTensor<T>::scalar(T value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::make_result(Shape shape, std::vector<T> values, const char* op,
                                           std::vector<BasicTensor> inputs,
                                           std::function<void(Node<T>&)> backward) {
  BasicTensor out = from(std::move(shape), std::move(values), false);
  out.node_->op = op;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const BasicTensor& t) { return t.requires_grad(); });
  if (any) {
    out.node_->requires_grad = true;
    out.node_->inputs.reserve(inputs.size());
    for (auto& in : inputs) out.node_->inputs.push_back(in.node_);
    out.node_->backward = std::move(backward);
  }
  return out;
}

template <typename T>
std::size_t BasicTensor<T>::rows() const {
  return rank() == 2 ? node_->shape[0] : 1;
}

template <typename T>
std::size_t BasicTensor<T>::cols() const {
  return rank() == 0 ? 1 : node_->shape.back();
}

template <typename T>
T BasicTensor<T>::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

template <typename T>
BasicTensor<T> BasicTensor<T>::clone() const {
  return from(shape(), node_->value, requires_grad());
}

template <typename T>
BasicTensor<T> BasicTensor<T>::detach() const {
  return from(shape(), node_->value, false);
}

template <typename T>
void BasicTensor<T>::backward() const {
  if (size() != 1) {
    throw ShapeError("backward() needs a scalar, got " + shape_string(shape()));
  }
  if (node_->consumed) throw Error("backward() called twice: the recorded tape was consumed");
  if (!node_->requires_grad) throw Error("backward() on a value that does not require grad");

  // Collect every node reachable through recorded inputs. Owning pointers keep
  // the graph alive while it is being released below.
  std::vector<std::shared_ptr<Node<T>>> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::shared_ptr<Node<T>>> stack{node_};
  while (!stack.empty()) {
    auto n = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(n.get()).second) continue;
    for (auto& in : n->inputs) {
      if (in->requires_grad) stack.push_back(in);
    }
    order.push_back(std::move(n));
  }
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a->seq > b->seq; });

  node_->grad_buffer()[0] += T(1);
  for (auto& n : order) {
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  for (auto& n : order) {
    if (!n->inputs.empty() || n->backward) {
      n->inputs.clear();
      n->backward = nullptr;
      n->consumed = true;
    }
  }
}

template class BasicTensor<float>;
template class BasicTensor<double>;

}  // namespace msivd::ad
