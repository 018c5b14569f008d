// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "msivd/autograd/tensor.hpp"

namespace msivd::ad {

struct GradCheckResult {
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Compares the reverse-mode gradient of a scalar function against central
/// differences, coordinate by coordinate, in 64-bit arithmetic:
///   err_i = |analytic_i - numeric_i| / (|analytic_i| + |numeric_i| + 1e-12)
/// `f` must build a fresh graph from its argument on every call.
inline GradCheckResult grad_check(const std::function<Tensor64(const Tensor64&)>& f,
                                  const Tensor64& x, double h, double tol) {
  Tensor64 probe = Tensor64::from(x.shape(), {x.data().begin(), x.data().end()}, true);
  Tensor64 y = f(probe);
  y.backward();
  std::vector<double> analytic(probe.size(), 0.0);
  if (probe.has_grad()) std::copy(probe.grad().begin(), probe.grad().end(), analytic.begin());

  GradCheckResult r;
  std::vector<double> base(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto eval_at = [&](double v) {
      auto shifted = base;
      shifted[i] = v;
      return f(Tensor64::from(x.shape(), std::move(shifted), false)).item();
    };
    const double numeric = (eval_at(base[i] + h) - eval_at(base[i] - h)) / (2.0 * h);
    const double err = std::abs(analytic[i] - numeric) /
                       (std::abs(analytic[i]) + std::abs(numeric) + 1e-12);
    r.max_relative_error = std::max(r.max_relative_error, err);
  }
  r.passed = r.max_relative_error <= tol;
  return r;
}

}  // namespace msivd::ad
