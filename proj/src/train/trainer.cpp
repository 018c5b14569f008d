// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/train/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "msivd/common/error.hpp"
#include "msivd/common/rng.hpp"
#include "msivd/train/optimizer.hpp"

namespace msivd::train {

using nlohmann::json;

std::string_view to_string(Stage s) { return s == Stage::sift ? "sift" : "fused"; }

Stage parse_stage(std::string_view text) {
  if (text == "sift") return Stage::sift;
  if (text == "fused") return Stage::fused;
  throw UsageError("unknown stage '" + std::string(text) + "' (expected sift or fused)");
}

std::string_view to_string(SiftMode m) {
  switch (m) {
    case SiftMode::multi_round: return "multi-round";
    case SiftMode::single_round: return "single-round";
    case SiftMode::label_only: return "label-only";
  }
  return "?";
}

SiftMode parse_sift_mode(std::string_view text) {
  if (text == "multi-round") return SiftMode::multi_round;
  if (text == "single-round") return SiftMode::single_round;
  if (text == "label-only") return SiftMode::label_only;
  throw UsageError("unknown SIFT mode '" + std::string(text) +
                   "' (expected multi-round, single-round or label-only)");
}

TrainConfig TrainConfig::reference(Stage stage) {
  TrainConfig c;
  c.stage = stage;
  c.profile = Profile::paper;
  c.learning_rate = stage == Stage::sift ? 1e-5 : 1e-6;
  c.epochs = stage == Stage::sift ? 10 : 5;
  return c;
}

TrainConfig TrainConfig::desk(Stage stage) {
  TrainConfig c = reference(stage);
  c.profile = Profile::desk;
  c.learning_rate = stage == Stage::sift ? 0.2 : 0.1;
  c.epochs = stage == Stage::sift ? 1 : 30;
  return c;
}

TrainConfig TrainConfig::for_profile(Stage stage, Profile profile) {
  return profile == Profile::paper ? reference(stage) : desk(stage);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  if (batch_size == 0) throw UsageError("batch size must be positive");
  if (epochs == 0) throw UsageError("epoch count must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw UsageError("momentum must lie in [0, 1)");
  if (clip_norm < 0.0) throw UsageError("clip norm must be non-negative");
}

void to_json(json& j, const TrainConfig& c) {
  j = {{"stage", to_string(c.stage)},
       {"learning_rate", c.learning_rate},
       {"batch_size", c.batch_size},
       {"epochs", c.epochs},
       {"seed", c.seed},
       {"profile", to_string(c.profile)},
       {"momentum", c.momentum},
       {"clip_norm", c.clip_norm},
       {"sift_mode", to_string(c.sift_mode)},
       {"grouping", lm::to_string(c.grouping)}};
}

void from_json(const json& j, TrainConfig& c) {
  if (j.contains("stage")) c.stage = parse_stage(j["stage"].get<std::string>());
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  if (j.contains("profile")) c.profile = parse_profile(j["profile"].get<std::string>());
  c.momentum = j.value("momentum", c.momentum);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  if (j.contains("sift_mode")) c.sift_mode = parse_sift_mode(j["sift_mode"].get<std::string>());
  if (j.contains("grouping")) c.grouping = lm::parse_task_grouping(j["grouping"].get<std::string>());
}

std::size_t expected_steps(std::size_t samples, std::size_t batch_size, std::size_t epochs) {
  if (batch_size == 0) throw UsageError("batch size must be positive");
  return (samples + batch_size - 1) / batch_size * epochs;
}

std::vector<std::size_t> epoch_order(std::size_t samples, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, epoch));
  rng.shuffle(order);
  return order;
}

std::string LossCurve::to_csv() const {
  std::string out = "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < loss.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i + 1, loss[i]);
    out += buf;
  }
  return out;
}

bool LossCurve::strictly_decreasing(std::size_t first_steps) const {
  if (loss.size() < first_steps) return false;
  for (std::size_t i = 1; i < first_steps; ++i)
    if (!(loss[i] < loss[i - 1])) return false;
  return true;
}

json TrainResult::metrics() const {
  return {{"epoch_loss", epoch_loss},
          {"steps", curve.loss.size()},
          {"final_loss", curve.loss.empty() ? 0.0 : curve.loss.back()},
          {"clipped_steps", clipped_steps}};
}

SiftData make_sift_data(std::span<const dialogue::DialogueRecord> dialogues, SiftMode mode,
                        lm::TaskGrouping grouping, std::size_t context_window) {
  SiftData data;
  const auto names = lm::task_names(grouping);
  dialogue::RenderOptions opt;
  opt.context_window = context_window;
  if (mode == SiftMode::multi_round) {
    data.tasks = names;
  } else {
    opt.up_to_round = 1;
    if (mode == SiftMode::label_only) opt.answers = dialogue::AnswerStyle::label_only;
    data.tasks = {names[lm::task_of_round(grouping, 0)]};
  }
  lm::Tokenizer tok;
  std::vector<std::size_t> task_tokens(names.size(), 0);
  for (const auto& d : dialogues) {
    const auto rendered = dialogue::render(d, tok, opt);
    data.max_rounds = std::max(data.max_rounds, rendered.teacher_spans.size());
    auto seq = dialogue::to_task_sequence(rendered, grouping);
    for (std::size_t t = 0; t < names.size(); ++t)
      task_tokens[t] += static_cast<std::size_t>(std::count(seq.task_masks[t].begin(), seq.task_masks[t].end(), 1));
    data.sequences.push_back(std::move(seq));
  }
  // Keep only the masks of the tasks being trained.
  std::vector<std::size_t> keep;
  for (const auto& name : data.tasks) {
    const auto t = static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
    if (task_tokens[t] == 0) throw Error("task group '" + name + "' has no dialogue tokens");
    keep.push_back(t);
  }
  for (auto& seq : data.sequences) {
    std::vector<ad::Mask> masks;
    for (auto t : keep) masks.push_back(std::move(seq.task_masks[t]));
    seq.task_masks = std::move(masks);
  }
  return data;
}

namespace {

template <typename StepFn>
TrainResult run_epochs(std::size_t n, const TrainConfig& config, Sgd& sgd, const StepCallback& on_step,
                       StepFn&& loss_for_batch) {
  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(n, config.seed, epoch);
    double epoch_sum = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::span<const std::size_t> batch(order.data() + start, std::min(config.batch_size, n - start));
      auto loss = loss_for_batch(batch);
      loss.backward();
      sgd.step();
      const double value = static_cast<double>(loss.item());
      result.curve.loss.push_back(value);
      epoch_sum += value;
      ++epoch_steps;
      if (on_step) on_step(result.curve.loss.size(), value);
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(epoch_steps));
  }
  result.clipped_steps = sgd.clipped_steps();
  return result;
}

SgdConfig sgd_config(const TrainConfig& c) { return {c.learning_rate, c.momentum, c.clip_norm}; }

}  // namespace

TrainResult train_sift(lm::Transformer<float>& model, const SiftData& data, const TrainConfig& config,
                       const StepCallback& on_step) {
  config.validate();
  if (data.sequences.empty()) throw Error("no dialogues to train on");
  Sgd sgd(model.trainable_parameters(), sgd_config(config));
  return run_epochs(data.sequences.size(), config, sgd, on_step, [&](std::span<const std::size_t> batch) {
    std::vector<lm::TaskSequence> seqs;
    for (auto i : batch) seqs.push_back(data.sequences[i]);
    std::vector<std::string> present;
    for (std::size_t t = 0; t < data.tasks.size(); ++t) {
      const bool any = std::any_of(seqs.begin(), seqs.end(), [&](const auto& s) {
        return std::find(s.task_masks[t].begin(), s.task_masks[t].end(), 1) != s.task_masks[t].end();
      });
      if (any) present.push_back(data.tasks[t]);
    }
    // Sequences keep one mask per trained task; narrow them to the present ones.
    for (auto& s : seqs) {
      std::vector<ad::Mask> masks;
      for (std::size_t t = 0; t < data.tasks.size(); ++t)
        if (std::find(present.begin(), present.end(), data.tasks[t]) != present.end())
          masks.push_back(std::move(s.task_masks[t]));
      s.task_masks = std::move(masks);
    }
    return lm::multitask_loss<float>(model, seqs, present);
  });
}

TrainResult train_fused(fusion::Classifier& classifier, std::span<const fusion::PreparedSample> samples,
                        const TrainConfig& config, const StepCallback& on_step) {
  config.validate();
  if (samples.empty()) throw Error("no samples to train on");
  Sgd sgd(classifier.params(), sgd_config(config));
  return run_epochs(samples.size(), config, sgd, on_step, [&](std::span<const std::size_t> batch) {
    ad::Tensor total;
    for (auto i : batch) {
      const auto& s = samples[i];
      const std::vector<int> target{s.label ? fusion::kYes : fusion::kNo};
      const ad::Mask on{1};
      auto nll = ad::cross_entropy<float>(classifier.logits(s.lm, s.graph), target, on);
      total = total.defined() ? ad::add(total, nll) : nll;
    }
    return ad::scale(total, 1.0f / static_cast<float>(batch.size()));
  });
}

Checkpoint sift_checkpoint(const lm::Transformer<float>& model, const TrainConfig& config,
                           const TrainResult& result) {
  Checkpoint ckp;
  ckp.config = {{"stage", "sift"}, {"lm", model.config()}, {"train", config}};
  ckp.metrics = result.metrics();
  store_params(ckp, "lm.", model.parameters());
  return ckp;
}

lm::Transformer<float> load_lm(const Checkpoint& ckp, const std::optional<lm::TransformerConfig>& expected) {
  if (!ckp.config.contains("lm")) throw Error("checkpoint does not contain a language model");
  const auto stored = ckp.config["lm"].get<lm::TransformerConfig>();
  if (expected && (expected->d_model != stored.d_model || expected->n_layers != stored.n_layers ||
                   expected->n_heads != stored.n_heads || expected->vocab_size != stored.vocab_size ||
                   expected->lora_rank != stored.lora_rank))
    throw ShapeError("checkpoint LM has d_model=" + std::to_string(stored.d_model) + ", layers=" +
                     std::to_string(stored.n_layers) + " but the config asks for d_model=" +
                     std::to_string(expected->d_model) + ", layers=" + std::to_string(expected->n_layers));
  lm::Transformer<float> model(stored);
  auto params = model.parameters();
  restore_params(ckp, "lm.", params);
  return model;
}

Checkpoint fused_checkpoint(const lm::Transformer<float>& model, const fusion::Classifier& classifier,
                            const TrainConfig& config, const TrainResult& result) {
  Checkpoint ckp;
  ckp.config = {{"stage", "fused"}, {"lm", model.config()}, {"fusion", classifier.config()}, {"train", config}};
  ckp.metrics = result.metrics();
  store_params(ckp, "lm.", model.parameters());
  store_params(ckp, "clf.", classifier.params());
  return ckp;
}

fusion::Classifier load_classifier(const Checkpoint& ckp) {
  if (!ckp.config.contains("fusion")) throw Error("checkpoint does not contain a fused classifier");
  fusion::Classifier clf(ckp.config["fusion"].get<fusion::FusionConfig>());
  auto params = clf.params();
  restore_params(ckp, "clf.", params);
  return clf;
}

}  // namespace msivd::train
