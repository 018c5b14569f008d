// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "msivd/autograd/tensor.hpp"
#include "msivd/common/rng.hpp"

namespace msivd::ad {

/// Handle to a model weight. The tensor aliases the model's storage.
template <typename T>
struct NamedParam {
  std::string name;
  BasicTensor<T> tensor;
};

template <typename T>
using ParamList = std::vector<NamedParam<T>>;

template <typename T>
BasicTensor<T> gaussian(Rng& rng, Shape shape, double stddev, bool requires_grad) {
  std::vector<T> v(numel(shape));
  for (auto& x : v) x = static_cast<T>(rng.normal(0.0, stddev));
  return BasicTensor<T>::from(std::move(shape), std::move(v), requires_grad);
}

/// Adds `prefix` to every name and appends to `out`.
template <typename T>
void append_params(ParamList<T>& out, const std::string& prefix, const ParamList<T>& more) {
  for (const auto& p : more) out.push_back({prefix + p.name, p.tensor});
}

}  // namespace msivd::ad
