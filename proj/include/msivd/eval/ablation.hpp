// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msivd/corpus/split.hpp"
#include "msivd/eval/metrics.hpp"
#include "msivd/fusion/predict.hpp"
#include "msivd/train/trainer.hpp"

namespace msivd::eval {

enum class AblationMode {
  pretrained,
  label_only_ft,
  single_round_sift,
  multi_round_sift,
  multi_round_sift_gnn,
};

inline constexpr AblationMode kAblationModes[] = {
    AblationMode::pretrained, AblationMode::label_only_ft, AblationMode::single_round_sift,
    AblationMode::multi_round_sift, AblationMode::multi_round_sift_gnn};

std::string_view to_string(AblationMode m);
/// Throws UsageError listing the valid names.
AblationMode parse_ablation_mode(std::string_view text);
std::string valid_mode_names();

/// How a mode tunes the LM (nothing for the pre-trained mode) and whether the
/// graph branch joins the classifier.
struct ModeSetup {
  std::optional<train::SiftMode> sift;
  bool use_gnn = false;
};
ModeSetup setup_of(AblationMode m);

struct AblationOptions {
  lm::TransformerConfig lm = lm::TransformerConfig::desk();
  gnn::GgnnConfig gnn = gnn::GgnnConfig::desk();
  train::TrainConfig sift = train::TrainConfig::desk(train::Stage::sift);
  train::TrainConfig fused = train::TrainConfig::desk(train::Stage::fused);
  std::string dataset = "synthetic";
  /// Adds one report per CWE category present in the test split.
  bool per_category = false;
  /// Rewritten after every mode, and with the finished reports on failure.
  std::optional<std::filesystem::path> report_path;
};

struct ModeRun {
  AblationMode mode = AblationMode::pretrained;
  std::size_t trained_rounds = 0;  // loss-masked rounds per dialogue, 0 without tuning
  train::TrainResult sift;
  train::TrainResult fused;
};

using ModeCallback = std::function<void(const ModeRun&, std::span<const MetricsReport>)>;

/// Trains and scores each mode on the split: the LM is tuned on the training
/// dialogues, a classifier is fitted on the frozen LM, and the test split is
/// scored. Modes sharing a tuning recipe share the tuned LM.
std::vector<MetricsReport> run_ablation(const corpus::Split& split, std::span<const AblationMode> modes,
                                        const AblationOptions& options, const ModeCallback& on_mode = {});

struct Scored {
  std::vector<bool> labels;
  std::vector<bool> predictions;
  std::vector<fusion::PredictionRow> rows;
};

Scored score(const fusion::Lm& lm, const fusion::Classifier& classifier,
             std::span<const corpus::CodeSample> samples);

/// One report per category present in `samples`, dataset labelled "<dataset>/<Category>".
std::vector<MetricsReport> category_reports(std::string_view mode, std::string_view dataset,
                                            std::span<const corpus::CodeSample> samples, const Scored& scored);

}  // namespace msivd::eval
