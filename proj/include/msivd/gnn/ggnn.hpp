// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "msivd/autograd/linear.hpp"
#include "msivd/dfa/features.hpp"
#include "msivd/lm/config.hpp"

namespace msivd::gnn {

enum class Pooling { mean, sum };

using Edge = std::pair<int, int>;

struct GgnnConfig {
  std::size_t feature_dim = 32;
  std::size_t state_dim = 16;
  std::size_t steps = 5;
  std::vector<std::size_t> mlp_hidden{16};
  Pooling pooling = Pooling::mean;
  bool reverse_edges = false;
  std::uint64_t seed = 2;

  static GgnnConfig desk() { return {}; }
  static GgnnConfig paper();
  static GgnnConfig for_profile(Profile p) { return p == Profile::paper ? paper() : desk(); }

  /// Linear layers of the message MLP plus the GRU update.
  std::size_t layer_count() const { return mlp_hidden.size() + 1 + 1; }
  bool projects_input() const { return feature_dim != state_dim; }
  void validate() const;

  bool operator==(const GgnnConfig&) const = default;
};

void to_json(nlohmann::json& j, const GgnnConfig& c);
void from_json(const nlohmann::json& j, GgnnConfig& c);

/// h' = (1 - z) * h + z * tanh(W m + U (r * h) + b), with
/// z = sigmoid(Wz m + Uz h + bz) and r = sigmoid(Wr m + Ur h + br).
template <typename T>
class GruCell {
 public:
  GruCell() = default;
  GruCell(std::size_t input_dim, std::size_t state_dim, Rng& rng);

  ad::BasicTensor<T> operator()(const ad::BasicTensor<T>& state,
                                const ad::BasicTensor<T>& message) const;
  ad::ParamList<T> params() const;

 private:
  ad::Linear<T> wz_, uz_, wr_, ur_, wh_, uh_;
};

/// Gated graph network over a CFG: per step, every node sums an MLP of its
/// in-neighbours' states (each parallel edge counted) and updates through a
/// GRU; node states are then pooled into one graph vector.
template <typename T>
class Ggnn {
 public:
  explicit Ggnn(const GgnnConfig& config);

  const GgnnConfig& config() const { return config_; }

  /// messages[n] = sum over edges m->n of MLP(states[m]). Throws on an edge
  /// naming a missing node.
  ad::BasicTensor<T> mlp_aggregate(const ad::BasicTensor<T>& states,
                                   std::span<const Edge> edges) const;
  ad::BasicTensor<T> gru_update(const ad::BasicTensor<T>& states,
                                const ad::BasicTensor<T>& messages) const {
    return gru_(states, messages);
  }
  /// Node states after `steps` rounds, [n x state_dim].
  ad::BasicTensor<T> node_states(const ad::BasicTensor<T>& features,
                                 std::span<const Edge> edges) const;
  /// Pooled graph embedding, [1 x state_dim].
  ad::BasicTensor<T> forward(const ad::BasicTensor<T>& features,
                             std::span<const Edge> edges) const;

  ad::ParamList<T> params() const;

 private:
  GgnnConfig config_;
  ad::Linear<T> input_;
  std::vector<ad::Linear<T>> mlp_;
  GruCell<T> gru_;
};

template <typename T>
ad::BasicTensor<T> feature_tensor(const dfa::NodeFeatures& f) {
  return ad::BasicTensor<T>::from({f.rows(), f.width}, {f.values.begin(), f.values.end()});
}

}  // namespace msivd::gnn
