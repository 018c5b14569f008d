// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/fusion/classifier.hpp"

#include <cmath>

#include "msivd/common/error.hpp"
#include "msivd/dfa/parser.hpp"
#include "msivd/dfa/reaching.hpp"
#include "msivd/lm/tokenizer.hpp"

namespace msivd::fusion {

std::string_view to_string(Readout r) { return r == Readout::broadcast ? "broadcast" : "final-token"; }

Readout parse_readout(std::string_view text) {
  if (text == "final-token") return Readout::final_token;
  if (text == "broadcast") return Readout::broadcast;
  throw UsageError("unknown readout '" + std::string(text) + "' (expected final-token or broadcast)");
}

FusionConfig FusionConfig::for_models(const lm::TransformerConfig& lm, const gnn::GgnnConfig& gnn) {
  FusionConfig c;
  c.d_model = lm.d_model;
  c.gnn = gnn;
  return c;
}

void FusionConfig::validate() const {
  if (d_model == 0) throw UsageError("fusion d_model must be positive");
  if (use_gnn) gnn.validate();
}

void to_json(nlohmann::json& j, const FusionConfig& c) {
  j = {{"d_model", c.d_model}, {"gnn", c.gnn},       {"use_gnn", c.use_gnn},
       {"readout", to_string(c.readout)}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, FusionConfig& c) {
  c.d_model = j.value("d_model", c.d_model);
  if (j.contains("gnn")) c.gnn = j["gnn"].get<gnn::GgnnConfig>();
  c.use_gnn = j.value("use_gnn", c.use_gnn);
  if (j.contains("readout")) c.readout = parse_readout(j["readout"].get<std::string>());
  c.seed = j.value("seed", c.seed);
}

std::size_t fused_width(const lm::TransformerConfig& lm, const gnn::GgnnConfig& gnn) {
  return lm.d_model + gnn.state_dim;
}

std::size_t fused_layer_count(const lm::TransformerConfig& lm, const gnn::GgnnConfig& gnn) {
  return lm.n_layers + gnn.layer_count();
}

Prediction classify(double yes_logit, double no_logit, bool flagged) {
  const double m = std::max(yes_logit, no_logit);
  const double lse = m + std::log(std::exp(yes_logit - m) + std::exp(no_logit - m));
  Prediction p;
  p.log_prob_yes = yes_logit - lse;
  p.log_prob_no = no_logit - lse;
  p.score = std::exp(p.log_prob_yes);
  p.label = yes_logit > no_logit;
  p.flagged = flagged;
  return p;
}

std::size_t final_non_pad(std::span<const int> tokens) {
  for (std::size_t i = tokens.size(); i > 0; --i)
    if (tokens[i - 1] != lm::token::pad) return i - 1;
  throw Error("token sequence has no non-pad token");
}

GraphInput graph_input(std::string_view code, const dfa::FeatureConfig& config) {
  GraphInput g;
  try {
    const auto cfg = dfa::parse_mini_c(code);
    g.features = dfa::build_node_features(cfg, dfa::reaching_definitions(cfg), config);
    g.edges.assign(cfg.edges.begin(), cfg.edges.end());
  } catch (const ParseError& e) {
    g.fallback = true;
    g.error = e.what();
    g.features.width = config.width;
    g.features.values.assign(config.width, 0.0f);
    g.edges.clear();
  }
  return g;
}

template <typename T>
LmView<T> lm_view(const ad::BasicTensor<T>& hidden, std::span<const int> tokens, Readout readout) {
  if (hidden.rank() != 2 || hidden.rows() != tokens.size())
    throw ShapeError("hidden states " + ad::shape_string(hidden.shape()) + " do not match " +
                     std::to_string(tokens.size()) + " tokens");
  const std::size_t last = final_non_pad(tokens);
  if (readout == Readout::final_token) return {ad::select_row(hidden, last).detach()};
  std::vector<int> keep;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens[i] != lm::token::pad) keep.push_back(static_cast<int>(i));
  return {ad::gather_rows<T>(hidden, keep).detach()};
}

template <typename T>
FusedClassifier<T>::FusedClassifier(const FusionConfig& config) : config_(config), gnn_(config.gnn) {
  config_.validate();
  Rng rng(mix_seed(config_.seed, 0xC1A5));
  const std::size_t in = config_.input_width();
  head_ = ad::Linear<T>(in, 2, rng, 1.0 / std::sqrt(static_cast<double>(in)), true);
}

template <typename T>
ad::BasicTensor<T> FusedClassifier<T>::fuse(const LmView<T>& lm, const GraphInput& graph) const {
  const auto& rows = lm.rows;
  if (rows.rank() != 2 || rows.cols() != config_.d_model)
    throw ShapeError("LM hidden width " + std::to_string(rows.cols()) + " does not match d_model " +
                     std::to_string(config_.d_model));
  if (!config_.use_gnn) return rows;
  if (graph.features.width != config_.gnn.feature_dim)
    throw ShapeError("graph feature width " + std::to_string(graph.features.width) +
                     " does not match " + std::to_string(config_.gnn.feature_dim));
  ad::BasicTensor<T> embedding;
  if (graph.fallback)
    embedding = ad::BasicTensor<T>::zeros({1, config_.gnn.state_dim});
  else
    embedding = gnn_.forward(gnn::feature_tensor<T>(graph.features), graph.edges);
  if (rows.rows() > 1) embedding = ad::repeat_rows(embedding, rows.rows());
  return ad::concat_last_dim<T>({rows, embedding});
}

template <typename T>
ad::BasicTensor<T> FusedClassifier<T>::logits(const LmView<T>& lm, const GraphInput& graph) const {
  auto z = head_(fuse(lm, graph));
  return z.rows() > 1 ? ad::mean_rows(z) : z;
}

template <typename T>
ad::BasicTensor<T> FusedClassifier<T>::log_probs(const LmView<T>& lm, const GraphInput& graph) const {
  return ad::log_softmax(logits(lm, graph));
}

template <typename T>
Prediction FusedClassifier<T>::predict(const LmView<T>& lm, const GraphInput& graph) const {
  const auto z = logits(lm, graph);
  return classify(static_cast<double>(z.data()[kYes]), static_cast<double>(z.data()[kNo]),
                  config_.use_gnn && graph.fallback);
}

template <typename T>
ad::ParamList<T> FusedClassifier<T>::params() const {
  ad::ParamList<T> out;
  if (config_.use_gnn) ad::append_params(out, "gnn.", gnn_.params());
  ad::append_params(out, "head.", head_.params());
  return out;
}

#define MSIVD_INSTANTIATE(T)                                                                  \
  template LmView<T> lm_view<T>(const ad::BasicTensor<T>&, std::span<const int>, Readout); \
  template class FusedClassifier<T>;
MSIVD_INSTANTIATE(float)
MSIVD_INSTANTIATE(double)
#undef MSIVD_INSTANTIATE

}  // namespace msivd::fusion
