// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "msivd/autograd/linear.hpp"
#include "msivd/dfa/features.hpp"
#include "msivd/gnn/ggnn.hpp"
#include "msivd/lm/config.hpp"

namespace msivd::fusion {

/// Logit column of each verdict.
inline constexpr int kYes = 0;  // vulnerable
inline constexpr int kNo = 1;   // safe

enum class Readout { final_token, broadcast };
std::string_view to_string(Readout r);
Readout parse_readout(std::string_view text);

struct FusionConfig {
  std::size_t d_model = 64;
  gnn::GgnnConfig gnn = gnn::GgnnConfig::desk();
  /// False drops the graph branch: the hidden state alone feeds one linear layer.
  bool use_gnn = true;
  Readout readout = Readout::final_token;
  std::uint64_t seed = 3;

  static FusionConfig for_models(const lm::TransformerConfig& lm, const gnn::GgnnConfig& gnn);
  std::size_t input_width() const { return d_model + (use_gnn ? gnn.state_dim : 0); }
  void validate() const;
  bool operator==(const FusionConfig&) const = default;
};

void to_json(nlohmann::json& j, const FusionConfig& c);
void from_json(const nlohmann::json& j, FusionConfig& c);

/// Classifier input width and total layer count for a model pair, computed
/// from the configs alone.
std::size_t fused_width(const lm::TransformerConfig& lm, const gnn::GgnnConfig& gnn);
std::size_t fused_layer_count(const lm::TransformerConfig& lm, const gnn::GgnnConfig& gnn);

struct Prediction {
  bool label = false;  // true = vulnerable
  double score = 0.5;  // probability of vulnerable
  double log_prob_yes = 0.0;
  double log_prob_no = 0.0;
  bool flagged = false;  // graph fallback was used
  bool operator==(const Prediction&) const = default;
};

/// LogSoftmax over (yes, no); label is the argmax with ties going to safe.
Prediction classify(double yes_logit, double no_logit, bool flagged = false);

/// Index of the last token that is not padding. Throws when there is none.
std::size_t final_non_pad(std::span<const int> tokens);

/// Graph branch input for one code sample. Code outside the parser's subset
/// yields a single all-zero node and `fallback` set.
struct GraphInput {
  dfa::NodeFeatures features;
  std::vector<gnn::Edge> edges;
  bool fallback = false;
  std::string error;
};
GraphInput graph_input(std::string_view code, const dfa::FeatureConfig& config);

/// Frozen-LM hidden rows needed by the readout, so the LM need not run again.
template <typename T>
struct LmView {
  ad::BasicTensor<T> rows;  // [1 x d] final token, or [T' x d] non-pad rows for broadcast
};

template <typename T>
LmView<T> lm_view(const ad::BasicTensor<T>& hidden, std::span<const int> tokens, Readout readout);

template <typename T>
class FusedClassifier {
 public:
  explicit FusedClassifier(const FusionConfig& config);

  const FusionConfig& config() const { return config_; }

  /// Concatenation of the LM rows with the graph embedding along the last
  /// dimension: [rows x (d + g)].
  ad::BasicTensor<T> fuse(const LmView<T>& lm, const GraphInput& graph) const;
  /// [1 x 2] logits (yes, no); broadcast readout averages per-row logits.
  ad::BasicTensor<T> logits(const LmView<T>& lm, const GraphInput& graph) const;
  ad::BasicTensor<T> log_probs(const LmView<T>& lm, const GraphInput& graph) const;
  Prediction predict(const LmView<T>& lm, const GraphInput& graph) const;

  const gnn::Ggnn<T>& gnn() const { return gnn_; }
  ad::ParamList<T> params() const;

 private:
  FusionConfig config_;
  gnn::Ggnn<T> gnn_;
  ad::Linear<T> head_;
};

}  // namespace msivd::fusion
