// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/train/optimizer.hpp"

#include <cmath>

#include "msivd/common/error.hpp"

namespace msivd::train {

double global_grad_norm(const ad::ParamList<float>& params) {
  double sq = 0.0;
  for (const auto& p : params)
    for (float g : p.tensor.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  return std::sqrt(sq);
}

Sgd::Sgd(ad::ParamList<float> params, const SgdConfig& config)
    : params_(std::move(params)), config_(config) {
  if (!(config_.learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (config_.momentum < 0.0 || config_.momentum >= 1.0) throw UsageError("momentum must lie in [0, 1)");
  if (config_.clip_norm < 0.0) throw UsageError("clip norm must be non-negative");
  for (const auto& p : params_) {
    if (!p.tensor.requires_grad()) throw Error("optimizer given frozen parameter '" + p.name + "'");
    velocity_.emplace_back(config_.momentum > 0.0 ? p.tensor.size() : 0, 0.0f);
  }
}

double Sgd::step() {
  const double norm = global_grad_norm(params_);
  double factor = 1.0;
  last_clipped_ = config_.clip_norm > 0.0 && norm > config_.clip_norm;
  if (last_clipped_) {
    factor = config_.clip_norm / norm;
    ++clipped_steps_;
  }
  const auto lr = static_cast<float>(config_.learning_rate * factor);
  const auto mu = static_cast<float>(config_.momentum);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& t = params_[k].tensor;
    if (!t.has_grad()) continue;
    auto w = t.mutable_data();
    const auto g = t.grad();
    if (mu > 0.0f) {
      auto& v = velocity_[k];
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = mu * v[i] + g[i];
        w[i] -= lr * v[i];
      }
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    }
  }
  zero_grad();
  return norm;
}

void Sgd::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

}  // namespace msivd::train
