// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "msivd/autograd/params.hpp"
#include "msivd/autograd/tensor.hpp"

namespace msivd::lm {

/// Frozen projection W0 [d_out x d_in] plus a trainable low-rank update:
///   y = x W0^T + (alpha / r) x A^T B^T,  A [r x d_in], B [d_out x r].
/// A starts Gaussian and B starts at zero, so a fresh adapter leaves the base
/// projection unchanged.
template <typename T>
class LoraLinear {
 public:
  LoraLinear() = default;
  LoraLinear(std::size_t d_in, std::size_t d_out, std::size_t rank, double alpha, Rng& rng,
             double base_std, double lora_std);
  /// Wraps existing tensors. Throws ShapeError when the ranks of A and B or
  /// their widths disagree with W0.
  LoraLinear(ad::BasicTensor<T> base, ad::BasicTensor<T> a, ad::BasicTensor<T> b, double alpha);

  ad::BasicTensor<T> operator()(const ad::BasicTensor<T>& x) const;

  /// W0 + (alpha / r) B A, detached.
  ad::BasicTensor<T> dense_weight() const;

  std::size_t rank() const { return a_.rows(); }
  double scale() const { return alpha_ / static_cast<double>(rank()); }
  const ad::BasicTensor<T>& base() const { return base_; }
  const ad::BasicTensor<T>& lora_a() const { return a_; }
  const ad::BasicTensor<T>& lora_b() const { return b_; }

  /// When disabled the layer computes the base projection only.
  void set_enabled(bool on) { enabled_ = on; }

  ad::ParamList<T> params() const { return {{"base", base_}, {"lora_a", a_}, {"lora_b", b_}}; }

 private:
  ad::BasicTensor<T> base_;
  ad::BasicTensor<T> a_;
  ad::BasicTensor<T> b_;
  double alpha_ = 1.0;
  bool enabled_ = true;
};

}  // namespace msivd::lm
