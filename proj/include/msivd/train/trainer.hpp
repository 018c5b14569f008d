// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "msivd/dialogue/dialogue.hpp"
#include "msivd/fusion/predict.hpp"
#include "msivd/lm/config.hpp"
#include "msivd/lm/loss.hpp"
#include "msivd/train/checkpoint.hpp"

namespace msivd::train {

enum class Stage { sift, fused };
std::string_view to_string(Stage s);
Stage parse_stage(std::string_view text);

/// Which dialogue content the LM is tuned on: every round, round 1 only, or
/// round 1 answered by a bare yes/no token.
enum class SiftMode { multi_round, single_round, label_only };
std::string_view to_string(SiftMode m);
SiftMode parse_sift_mode(std::string_view text);

struct TrainConfig {
  Stage stage = Stage::sift;
  double learning_rate = 1e-5;
  std::size_t batch_size = 4;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  Profile profile = Profile::paper;
  double momentum = 0.0;
  double clip_norm = 1.0;
  SiftMode sift_mode = SiftMode::multi_round;
  lm::TaskGrouping grouping = lm::TaskGrouping::per_round;

  /// Reference hyperparameters: rates 1e-5 / 1e-6, batch 4, 10 / 5 epochs.
  static TrainConfig reference(Stage stage);
  /// Rates and epochs tuned for the desk-scale models.
  static TrainConfig desk(Stage stage);
  static TrainConfig for_profile(Stage stage, Profile profile);

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// ceil(n / batch) * epochs.
std::size_t expected_steps(std::size_t samples, std::size_t batch_size, std::size_t epochs);

/// Sample order of one epoch, seeded by (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t samples, std::uint64_t seed, std::size_t epoch);

struct LossCurve {
  std::vector<double> loss;  // one entry per optimizer step

  /// `step,loss` header, then one 1-based row per step.
  std::string to_csv() const;
  bool strictly_decreasing(std::size_t first_steps) const;
};

struct SiftData {
  std::vector<lm::TaskSequence> sequences;
  std::vector<std::string> tasks;
  std::size_t max_rounds = 0;  // most loss-masked rounds in any sequence
};

/// Renders every dialogue for `mode` and splits its mask by task. Throws when
/// a task receives no tokens from any dialogue.
SiftData make_sift_data(std::span<const dialogue::DialogueRecord> dialogues, SiftMode mode,
                        lm::TaskGrouping grouping, std::size_t context_window);

struct TrainResult {
  LossCurve curve;
  std::vector<double> epoch_loss;
  std::size_t clipped_steps = 0;

  nlohmann::json metrics() const;
};

using StepCallback = std::function<void(std::size_t step, double loss)>;

/// Tunes the LoRA factors under the task-averaged loss; base weights stay
/// untouched. Tasks absent from a batch are left out of that step's average.
TrainResult train_sift(lm::Transformer<float>& model, const SiftData& data, const TrainConfig& config,
                       const StepCallback& on_step = {});

/// Trains the graph branch and classifier head on cached LM rows with the
/// mean NLL of the yes/no log-probabilities.
TrainResult train_fused(fusion::Classifier& classifier, std::span<const fusion::PreparedSample> samples,
                        const TrainConfig& config, const StepCallback& on_step = {});

Checkpoint sift_checkpoint(const lm::Transformer<float>& model, const TrainConfig& config,
                           const TrainResult& result);
/// Rebuilds the LM from a checkpoint. When `expected` is given its dimensions
/// must match the stored config.
lm::Transformer<float> load_lm(const Checkpoint& ckp,
                               const std::optional<lm::TransformerConfig>& expected = std::nullopt);

Checkpoint fused_checkpoint(const lm::Transformer<float>& model, const fusion::Classifier& classifier,
                            const TrainConfig& config, const TrainResult& result);
fusion::Classifier load_classifier(const Checkpoint& ckp);

}  // namespace msivd::train
