// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace msivd::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// One recorded value in the computation graph. Creation order (`seq`) is a
/// topological order of the graph: an operation's inputs always exist before
/// its output, so replaying nodes by descending `seq` is a valid reverse pass.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until a gradient is first accumulated
  bool requires_grad = false;
  bool consumed = false;
  std::uint64_t seq = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return inputs.empty() && !backward; }

  /// Gradient buffer, zero-initialized on first use.
  std::vector<T>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad;
  }
};

std::uint64_t next_node_seq();

/// Shared handle to a graph node. Copies alias the same storage; use
/// `clone()` for an independent copy.
///
/// Storage is row-major. Rank 0 denotes a scalar; most kernels work on rank-2
/// matrices and treat a rank-1 tensor of length n as a 1 x n row.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  static BasicTensor zeros(Shape shape, bool requires_grad = false);
  static BasicTensor full(Shape shape, T value, bool requires_grad = false);
  static BasicTensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
  static BasicTensor scalar(T value, bool requires_grad = false);

  /// Builds an operation result. `inputs` are kept alive for the reverse pass
  /// only when at least one of them requires a gradient.
  static BasicTensor make_result(Shape shape, std::vector<T> values, const char* op,
                                 std::vector<BasicTensor> inputs,
                                 std::function<void(Node<T>&)> backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  /// Leading dimension for rank 2, 1 for rank 0/1.
  std::size_t rows() const;
  /// Trailing dimension (1 for a scalar).
  std::size_t cols() const;

  std::span<const T> data() const { return node_->value; }
  std::span<T> mutable_data() { return node_->value; }
  T item() const;
  T at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad.clear(); }

  /// Independent leaf with the same values and requires_grad flag.
  BasicTensor clone() const;
  /// Leaf sharing nothing with the graph; never requires grad.
  BasicTensor detach() const;

  /// Reverse pass from this scalar. Accumulates into every reachable node that
  /// requires a gradient, then releases the recorded operations. Calling it a
  /// second time on the same result throws.
  void backward() const;

  Node<T>& node() const { return *node_; }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

 private:
  explicit BasicTensor(std::shared_ptr<Node<T>> n) : node_(std::move(n)) {}
  std::shared_ptr<Node<T>> node_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

/// Copies values between precisions (leaf, same requires_grad flag).
template <typename To, typename From>
BasicTensor<To> convert(const BasicTensor<From>& t) {
  std::vector<To> v(t.data().begin(), t.data().end());
  return BasicTensor<To>::from(t.shape(), std::move(v), t.requires_grad());
}

}  // namespace msivd::ad
