// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/fusion/predict.hpp"

#include <json.hpp>

namespace msivd::fusion {

std::vector<int> prompt_tokens(const Lm& lm, std::string_view code) {
  return dialogue::render_prompt(code, lm::Tokenizer{}, lm.config().context_window);
}

LmView<float> lm_features(const Lm& lm, std::string_view code, Readout readout) {
  const auto tokens = prompt_tokens(lm, code);
  return lm_view(lm.hidden_states(tokens), tokens, readout);
}

dfa::FeatureConfig feature_config(const FusionConfig& config) {
  dfa::FeatureConfig f;
  f.width = config.gnn.feature_dim;
  return f;
}

PreparedSample prepare(const Lm& lm, const FusionConfig& config, const corpus::CodeSample& sample) {
  return {sample.sample_id, sample.label, lm_features(lm, sample.code, config.readout),
          graph_input(sample.code, feature_config(config))};
}

std::vector<PreparedSample> prepare_all(const Lm& lm, const FusionConfig& config,
                                        std::span<const corpus::CodeSample> samples) {
  std::vector<PreparedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(prepare(lm, config, s));
  return out;
}

Prediction predict(const Lm& lm, const Classifier& classifier, std::string_view code) {
  const auto& cfg = classifier.config();
  return classifier.predict(lm_features(lm, code, cfg.readout), graph_input(code, feature_config(cfg)));
}

Prediction lm_verdict(const Lm& lm, std::string_view code, dialogue::AnswerStyle style) {
  const auto tokens = prompt_tokens(lm, code);
  const auto hidden = lm.hidden_states(tokens);
  const auto row = ad::select_row(hidden, final_non_pad(tokens));
  const auto logits = lm.lm_head(row);
  const auto verdict = dialogue::verdict_tokens(style);
  const auto v = logits.data();
  return classify(static_cast<double>(v[static_cast<std::size_t>(verdict.vulnerable)]),
                  static_cast<double>(v[static_cast<std::size_t>(verdict.safe)]));
}

std::string prediction_json(const Prediction& p, std::string_view sample_id) {
  nlohmann::ordered_json j;
  if (!sample_id.empty()) j["sample_id"] = sample_id;
  j["label"] = p.label;
  j["score"] = p.score;
  j["flagged"] = p.flagged;
  return j.dump();
}

std::string write_predictions_jsonl(std::span<const PredictionRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    out += prediction_json(r.prediction, r.sample_id);
    out += '\n';
  }
  return out;
}

}  // namespace msivd::fusion
