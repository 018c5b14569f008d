// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "msivd/autograd/ops.hpp"
#include "msivd/autograd/params.hpp"
#include "msivd/common/error.hpp"

namespace msivd::ad {

/// y = x W^T + b with W [out x in] and b [out].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng, double stddev, bool trainable, bool bias = true)
      : weight_(gaussian<T>(rng, {out, in}, stddev, trainable)) {
    if (bias) bias_ = BasicTensor<T>::zeros({out}, trainable);
  }
  Linear(BasicTensor<T> weight, BasicTensor<T> bias) : weight_(std::move(weight)), bias_(std::move(bias)) {
    if (weight_.rank() != 2) throw ShapeError("linear weight must be a matrix, got " + shape_string(weight_.shape()));
    if (bias_.defined() && bias_.size() != weight_.rows())
      throw ShapeError("linear bias " + shape_string(bias_.shape()) + " does not match weight " +
                       shape_string(weight_.shape()));
  }

  BasicTensor<T> operator()(const BasicTensor<T>& x) const {
    auto y = matmul_nt(x, weight_);
    return bias_.defined() ? add(y, bias_) : y;
  }

  std::size_t in_features() const { return weight_.cols(); }
  std::size_t out_features() const { return weight_.rows(); }
  const BasicTensor<T>& weight() const { return weight_; }
  const BasicTensor<T>& bias() const { return bias_; }

  ParamList<T> params() const {
    ParamList<T> out{{"weight", weight_}};
    if (bias_.defined()) out.push_back({"bias", bias_});
    return out;
  }

 private:
  BasicTensor<T> weight_;
  BasicTensor<T> bias_;
};

}  // namespace msivd::ad
