// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "msivd/autograd/params.hpp"

namespace msivd::train {

struct SgdConfig {
  double learning_rate = 1e-5;
  double momentum = 0.0;
  /// Global gradient norm cap; 0 disables clipping.
  double clip_norm = 1.0;
};

/// Euclidean norm over every gradient in `params`.
double global_grad_norm(const ad::ParamList<float>& params);

/// Mini-batch gradient descent, optionally with heavy-ball momentum.
class Sgd {
 public:
  Sgd(ad::ParamList<float> params, const SgdConfig& config);

  /// Applies one update from the accumulated gradients and clears them.
  /// Returns the gradient norm before clipping.
  double step();
  void zero_grad();

  bool last_step_clipped() const { return last_clipped_; }
  std::size_t clipped_steps() const { return clipped_steps_; }
  const SgdConfig& config() const { return config_; }

 private:
  ad::ParamList<float> params_;
  SgdConfig config_;
  std::vector<std::vector<float>> velocity_;
  bool last_clipped_ = false;
  std::size_t clipped_steps_ = 0;
};

}  // namespace msivd::train
