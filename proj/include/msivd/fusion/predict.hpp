// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msivd/corpus/types.hpp"
#include "msivd/dialogue/dialogue.hpp"
#include "msivd/fusion/classifier.hpp"
#include "msivd/lm/transformer.hpp"

namespace msivd::fusion {

using Lm = lm::Transformer<float>;
using Classifier = FusedClassifier<float>;

/// Round-1 question tokens fitted to the LM's window.
std::vector<int> prompt_tokens(const Lm& lm, std::string_view code);

/// Frozen-LM rows for the question about `code`.
LmView<float> lm_features(const Lm& lm, std::string_view code, Readout readout);

dfa::FeatureConfig feature_config(const FusionConfig& config);

/// Inputs of the fused classifier, computed once since the LM stays frozen.
struct PreparedSample {
  std::string sample_id;
  bool label = false;
  LmView<float> lm;
  GraphInput graph;
};

PreparedSample prepare(const Lm& lm, const FusionConfig& config, const corpus::CodeSample& sample);
std::vector<PreparedSample> prepare_all(const Lm& lm, const FusionConfig& config,
                                        std::span<const corpus::CodeSample> samples);

/// Question through the LM, code through the dataflow graph, then the classifier.
Prediction predict(const Lm& lm, const Classifier& classifier, std::string_view code);

/// Verdict read from the LM's own next-token distribution after the question:
/// the vulnerable and safe answer tokens act as the two logits.
Prediction lm_verdict(const Lm& lm, std::string_view code, dialogue::AnswerStyle style);

struct PredictionRow {
  std::string sample_id;
  Prediction prediction;
};

/// One {sample_id, label, score, flagged} object per line.
std::string write_predictions_jsonl(std::span<const PredictionRow> rows);
std::string prediction_json(const Prediction& p, std::string_view sample_id = {});

}  // namespace msivd::fusion
