// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "msivd/cli/run_config.hpp"
#include "msivd/common/error.hpp"
#include "msivd/common/io.hpp"
#include "msivd/corpus/nvd.hpp"
#include "msivd/corpus/samples.hpp"
#include "msivd/corpus/serialize.hpp"
#include "msivd/corpus/synthetic.hpp"
#include "msivd/eval/ablation.hpp"
#include "msivd/fusion/predict.hpp"
#include "msivd/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace msivd;

namespace {

struct Globals {
  std::string profile = "desk";
  std::string config_file;

  Profile resolved() const { return parse_profile(profile); }
};

/// Dimensions for models the command will allocate.
lm::TransformerConfig trainable_lm(Profile p) {
  if (p == Profile::paper)
    throw UsageError("paper-profile models are bookkeeping only; train with --profile desk");
  return lm::TransformerConfig::desk();
}

struct TrainFlags {
  std::optional<double> learning_rate;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::uint64_t seed = 0;
  std::optional<double> momentum;
  std::optional<double> clip_norm;

  void add(CLI::App* cmd) {
    cmd->add_option("--lr", learning_rate, "Learning rate (profile default when omitted)");
    cmd->add_option("--epochs", epochs, "Epochs (profile default when omitted)");
    cmd->add_option("--batch-size", batch_size, "Mini-batch size");
    cmd->add_option("--seed", seed, "Shuffling seed");
    cmd->add_option("--momentum", momentum, "Heavy-ball momentum in [0, 1)");
    cmd->add_option("--clip-norm", clip_norm, "Global gradient norm cap, 0 disables");
  }

  train::TrainConfig resolve(train::Stage stage, Profile p) const {
    auto c = train::TrainConfig::for_profile(stage, p);
    if (learning_rate) c.learning_rate = *learning_rate;
    if (epochs) c.epochs = *epochs;
    if (batch_size) c.batch_size = *batch_size;
    if (momentum) c.momentum = *momentum;
    if (clip_norm) c.clip_norm = *clip_norm;
    c.seed = seed;
    c.validate();
    return c;
  }
};

void print_json(const ordered_json& j) { std::cout << j.dump() << "\n"; }

corpus::Split load_split(const std::string& samples_path, const std::string& splits_path) {
  const auto samples = corpus::read_samples_jsonl(read_file(samples_path));
  return corpus::apply_assignment(samples, corpus::read_splits_json(read_file(splits_path)));
}

void save_curve(const fs::path& path, const train::LossCurve& curve, const cli::RunConfig& run) {
  write_file(path, curve.to_csv());
  cli::write_provenance(path, run);
}

fs::path curve_path_for(const std::string& flag, const fs::path& checkpoint) {
  if (!flag.empty()) return flag;
  auto p = checkpoint;
  p.replace_extension(".loss_curve.csv");
  return p;
}

// ---------------------------------------------------------------------------

struct Ingest {
  std::string dump, out;
  bool cpp_only = false;
  bool negatives = false;
  std::optional<double> negative_share;
  std::size_t max_tokens = 2048;
  std::uint64_t seed = 0;
  bool window_level = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("ingest", "Extract labelled code samples from an NVD dump");
    c->add_option("--nvd-dump", dump, "NVD API v2 document or fixture array")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out, "Output samples.jsonl")->required();
    c->add_flag("--cpp-only", cpp_only, "Keep only C/C++ file patches");
    c->add_flag("--negatives", negatives, "Add the post-fix code of each kept file as a safe sample");
    c->add_option("--negative-share", negative_share, "Downsample to this share of safe samples")
        ->check(CLI::Range(0.0, 1.0));
    c->add_option("--max-tokens", max_tokens, "Window budget in bytes");
    c->add_option("--seed", seed, "Window placement seed");
    c->add_flag("--window-level", window_level, "Samples are windows, not whole functions");
    cmd = c;
  }

  void run(const cli::RunConfig& rc) const {
    const auto parsed = corpus::parse_nvd_dump(read_file(dump));
    const auto records = corpus::filter_patch_records(parsed.records);
    corpus::WindowOptions wopt{max_tokens, seed, cpp_only};
    corpus::ExclusionOptions eopt;
    eopt.function_level = !window_level;

    std::map<std::string, std::size_t> dropped;
    for (auto r : {corpus::DropReason::Incomplete, corpus::DropReason::NoChange, corpus::DropReason::MassRewrite,
                   corpus::DropReason::TooShort})
      dropped[std::string(corpus::to_string(r))] = 0;
    std::vector<corpus::CodeSample> kept;
    std::size_t skipped_files = 0, positives = 0, negatives_kept = 0;
    for (const auto& rec : records) {
      if (rec.file_patches.empty()) {
        ++skipped_files;
        continue;
      }
      const auto batch = corpus::split_into_file_samples(rec, wopt);
      skipped_files += batch.skipped.size();
      for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        const auto& s = batch.samples[i];
        if (auto why = corpus::apply_exclusion_filters(s, batch.changed_fractions[i], eopt)) {
          ++dropped[std::string(corpus::to_string(*why))];
          continue;
        }
        kept.push_back(s);
        ++positives;
        if (!negatives) continue;
        const auto patch = std::stoul(s.sample_id.substr(s.sample_id.rfind(':') + 1));
        auto neg = corpus::make_negative_sample(rec, patch, wopt);
        if (auto why = corpus::apply_exclusion_filters(neg, 0.0, eopt)) {
          ++dropped[std::string(corpus::to_string(*why))];
          continue;
        }
        kept.push_back(std::move(neg));
        ++negatives_kept;
      }
    }
    if (negative_share) kept = corpus::mix_classes(kept, *negative_share, seed);

    write_file(out, corpus::write_samples_jsonl(kept));
    cli::write_provenance(out, rc);

    ordered_json skipped = ordered_json::array();
    for (const auto& n : parsed.skipped) skipped.push_back({{"entry", n.id}, {"reason", n.reason}});
    ordered_json summary;
    summary["records"] = parsed.records.size() + parsed.skipped.size();
    summary["unreadable_records"] = skipped;
    summary["patch_records"] = records.size();
    summary["skipped_files"] = skipped_files;
    summary["positives"] = positives;
    summary["negatives"] = negatives_kept;
    summary["dropped"] = dropped;
    summary["written"] = kept.size();
    print_json(summary);
  }

  CLI::App* cmd = nullptr;
};

struct Prepare {
  std::string samples, out_dir = ".", cutoff = "2023-01-01";
  std::vector<double> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  bool no_temporal = false;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("prepare", "Split samples by date and render training dialogues");
    c->add_option("--samples", samples, "samples.jsonl")->required()->check(CLI::ExistingFile);
    c->add_option("--out-dir", out_dir, "Directory for splits.json and dialogues.jsonl");
    c->add_option("--cutoff", cutoff, "Evaluation and test samples date from this day on");
    c->add_option("--ratios", ratios, "train,eval,test shares summing to 1")->delimiter(',')->expected(3);
    c->add_option("--seed", seed, "Shuffle seed");
    c->add_flag("--no-temporal", no_temporal, "Ignore the cutoff and split one shuffled pool");
    cmd = c;
  }

  void run(const cli::RunConfig& rc) const {
    corpus::SplitSpec split_spec;
    try {
      split_spec.cutoff_date = Date::parse(cutoff);
    } catch (const ParseError& e) {
      throw UsageError(std::string("--cutoff: ") + e.what());
    }
    std::copy(ratios.begin(), ratios.end(), split_spec.ratios.begin());
    split_spec.seed = seed;
    split_spec.temporal = !no_temporal;
    split_spec.validate();

    const auto all = corpus::read_samples_jsonl(read_file(samples));
    const auto split = corpus::make_split(all, split_spec);
    std::vector<dialogue::DialogueRecord> dialogues;
    for (const auto& s : split.train) dialogues.push_back(dialogue::dialogue_for(s));

    const fs::path splits_path = fs::path(out_dir) / "splits.json";
    const fs::path dialogues_path = fs::path(out_dir) / "dialogues.jsonl";
    write_file(splits_path, corpus::write_splits_json(corpus::assignment_of(split)));
    write_file(dialogues_path, dialogue::write_jsonl(dialogues));
    cli::write_provenance(splits_path, rc);
    cli::write_provenance(dialogues_path, rc);
    print_json({{"train", split.train.size()},
                {"eval", split.eval.size()},
                {"test", split.test.size()},
                {"unassigned", all.size() - split.size()},
                {"dialogues", dialogues.size()}});
  }

  CLI::App* cmd = nullptr;
};

struct TrainSift {
  std::string dialogues, out, mode = "multi-round", grouping = "per-round", loss_curve;
  TrainFlags flags;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("train-sift", "Tune the LM adapters on teacher-student dialogues");
    c->add_option("--dialogues", dialogues, "dialogues.jsonl from prepare")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out, "Checkpoint path")->required();
    c->add_option("--mode", mode, "multi-round, single-round or label-only");
    c->add_option("--grouping", grouping, "Task grouping: per-round or detection-explanation");
    c->add_option("--loss-curve", loss_curve, "Loss curve CSV (default: beside the checkpoint)");
    flags.add(c);
    cmd = c;
  }

  void run(const Globals& g, const cli::RunConfig& rc) const {
    const auto profile = g.resolved();
    auto cfg = flags.resolve(train::Stage::sift, profile);
    cfg.sift_mode = train::parse_sift_mode(mode);
    cfg.grouping = lm::parse_task_grouping(grouping);
    const auto lm_cfg = trainable_lm(profile);

    const auto records = dialogue::parse_jsonl(read_file(dialogues));
    const auto data = train::make_sift_data(records, cfg.sift_mode, cfg.grouping, lm_cfg.context_window);
    fusion::Lm model(lm_cfg);
    const auto result = train::train_sift(model, data, cfg);

    auto ckp = train::sift_checkpoint(model, cfg, result);
    ckp.config["run"] = rc.to_json();
    train::save_checkpoint(out, ckp);
    cli::write_provenance(out, rc);
    const auto curve = curve_path_for(loss_curve, out);
    save_curve(curve, result.curve, rc);
    auto summary = ordered_json(result.metrics());
    summary["rounds"] = data.max_rounds;
    summary["loss_curve"] = curve.string();
    print_json(summary);
  }

  CLI::App* cmd = nullptr;
};

struct TrainFused {
  std::string samples, splits, sift, out, readout = "final-token", loss_curve;
  bool no_gnn = false;
  TrainFlags flags;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("train-fused", "Train the graph branch and classifier on the frozen LM");
    c->add_option("--samples", samples, "samples.jsonl")->required()->check(CLI::ExistingFile);
    c->add_option("--splits", splits, "splits.json from prepare")->required()->check(CLI::ExistingFile);
    c->add_option("--sift", sift, "Checkpoint from train-sift")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out, "Checkpoint path")->required();
    c->add_option("--readout", readout, "final-token or broadcast");
    c->add_flag("--no-gnn", no_gnn, "Classify from the LM hidden state alone");
    c->add_option("--loss-curve", loss_curve, "Loss curve CSV (default: beside the checkpoint)");
    flags.add(c);
    cmd = c;
  }

  void run(const Globals& g, const cli::RunConfig& rc) const {
    const auto profile = g.resolved();
    const auto cfg = flags.resolve(train::Stage::fused, profile);
    const auto model = train::load_lm(train::load_checkpoint(sift), trainable_lm(profile));
    auto fc = fusion::FusionConfig::for_models(model.config(), gnn::GgnnConfig::for_profile(profile));
    fc.use_gnn = !no_gnn;
    fc.readout = fusion::parse_readout(readout);

    const auto split = load_split(samples, splits);
    const auto prepared = fusion::prepare_all(model, fc, split.train);
    fusion::Classifier clf(fc);
    const auto result = train::train_fused(clf, prepared, cfg);

    auto ckp = train::fused_checkpoint(model, clf, cfg, result);
    ckp.config["run"] = rc.to_json();
    train::save_checkpoint(out, ckp);
    cli::write_provenance(out, rc);
    const auto curve = curve_path_for(loss_curve, out);
    save_curve(curve, result.curve, rc);
    auto summary = ordered_json(result.metrics());
    summary["loss_curve"] = curve.string();
    print_json(summary);
  }

  CLI::App* cmd = nullptr;
};

struct Eval {
  std::string samples, splits, out = "report.json", checkpoint, dataset = "synthetic", predictions;
  std::vector<std::string> modes;
  bool per_category = false;
  std::optional<std::size_t> sift_epochs, fused_epochs;
  std::uint64_t seed = 0;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("eval", "Score ablation modes on the test split");
    c->add_option("--mode", modes, "Ablation mode, repeatable; 'all' runs every mode")->required();
    c->add_option("--samples", samples, "samples.jsonl")->required()->check(CLI::ExistingFile);
    c->add_option("--splits", splits, "splits.json from prepare")->required()->check(CLI::ExistingFile);
    c->add_option("--out", out, "report.json path");
    c->add_option("--checkpoint", checkpoint, "Score this fused checkpoint instead of training")
        ->check(CLI::ExistingFile);
    c->add_option("--predictions", predictions, "Also write predictions.jsonl (with --checkpoint)");
    c->add_option("--dataset", dataset, "Dataset label in the report");
    c->add_flag("--per-category", per_category, "Add one report per CWE category");
    c->add_option("--sift-epochs", sift_epochs, "Override SIFT epochs");
    c->add_option("--fused-epochs", fused_epochs, "Override classifier epochs");
    c->add_option("--seed", seed, "Training seed");
    cmd = c;
  }

  std::vector<eval::AblationMode> resolved_modes() const {
    std::vector<eval::AblationMode> out_modes;
    for (const auto& m : modes) {
      if (m == "all") {
        out_modes.insert(out_modes.end(), std::begin(eval::kAblationModes), std::end(eval::kAblationModes));
      } else {
        out_modes.push_back(eval::parse_ablation_mode(m));
      }
    }
    return out_modes;
  }

  void run(const Globals& g, const cli::RunConfig& rc) const {
    const auto chosen = resolved_modes();
    const auto split = load_split(samples, splits);
    std::vector<eval::MetricsReport> reports;
    if (!checkpoint.empty()) {
      if (chosen.size() != 1) throw UsageError("--checkpoint scores exactly one --mode");
      const auto ckp = train::load_checkpoint(checkpoint);
      const auto model = train::load_lm(ckp);
      const auto clf = train::load_classifier(ckp);
      const auto scored = eval::score(model, clf, split.test);
      const auto label = std::string(eval::to_string(chosen.front()));
      reports.push_back(eval::MetricsReport::from_counts(label, dataset, eval::confusion(scored.labels, scored.predictions)));
      if (per_category) {
        auto extra = eval::category_reports(label, dataset, split.test, scored);
        reports.insert(reports.end(), extra.begin(), extra.end());
      }
      write_file(out, eval::write_reports_json(reports));
      if (!predictions.empty()) {
        write_file(predictions, fusion::write_predictions_jsonl(scored.rows));
        cli::write_provenance(predictions, rc);
      }
    } else {
      const auto profile = g.resolved();
      eval::AblationOptions opt;
      opt.lm = trainable_lm(profile);
      opt.gnn = gnn::GgnnConfig::for_profile(profile);
      opt.sift = train::TrainConfig::for_profile(train::Stage::sift, profile);
      opt.fused = train::TrainConfig::for_profile(train::Stage::fused, profile);
      opt.sift.seed = opt.fused.seed = seed;
      if (sift_epochs) opt.sift.epochs = *sift_epochs;
      if (fused_epochs) opt.fused.epochs = *fused_epochs;
      opt.dataset = dataset;
      opt.per_category = per_category;
      opt.report_path = out;
      try {
        reports = eval::run_ablation(split, chosen, opt, [](const eval::ModeRun& run, auto) {
          std::cerr << eval::to_string(run.mode) << ": done\n";
        });
      } catch (...) {
        cli::write_provenance(out, rc);
        throw;
      }
    }
    cli::write_provenance(out, rc);
    ordered_json rows = ordered_json::array();
    for (const auto& r : reports) rows.push_back(eval::report_json(r));
    print_json(rows);
  }

  CLI::App* cmd = nullptr;
};

struct Predict {
  std::string code, checkpoint;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("predict", "Classify one source file with a fused checkpoint");
    c->add_option("--code", code, "Source file")->required()->check(CLI::ExistingFile);
    c->add_option("--checkpoint", checkpoint, "Checkpoint from train-fused")->required()->check(CLI::ExistingFile);
    cmd = c;
  }

  void run() const {
    const auto ckp = train::load_checkpoint(checkpoint);
    const auto model = train::load_lm(ckp);
    const auto clf = train::load_classifier(ckp);
    std::cout << fusion::prediction_json(fusion::predict(model, clf, read_file(code)), code) << "\n";
  }

  CLI::App* cmd = nullptr;
};

struct Synth {
  std::string out;
  corpus::SyntheticOptions opt;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("synth", "Write the generated separable corpus");
    c->add_option("--out", out, "Output samples.jsonl")->required();
    c->add_option("--count", opt.count, "Number of samples");
    c->add_option("--positive-share", opt.positive_share, "Share of vulnerable samples")->check(CLI::Range(0.0, 1.0));
    c->add_option("--decoy-share", opt.decoy_share, "Share of vulnerable samples masking another variable")
        ->check(CLI::Range(0.0, 1.0));
    c->add_option("--seed", opt.seed, "Generator seed");
    cmd = c;
  }

  void run(const cli::RunConfig& rc) const {
    const auto samples = corpus::make_synthetic_corpus(opt);
    write_file(out, corpus::write_samples_jsonl(samples));
    cli::write_provenance(out, rc);
    print_json({{"written", samples.size()}});
  }

  CLI::App* cmd = nullptr;
};

struct ShowConfig {
  void add(CLI::App& app) { cmd = app.add_subcommand("show-config", "Print the model and training settings of the profile"); }

  void run(const Globals& g) const {
    const auto p = g.resolved();
    const auto lm_cfg = lm::TransformerConfig::for_profile(p);
    const auto gnn_cfg = gnn::GgnnConfig::for_profile(p);
    nlohmann::json j;
    j["profile"] = to_string(p);
    j["lm"] = lm_cfg;
    j["gnn"] = gnn_cfg;
    j["fused_width"] = fusion::fused_width(lm_cfg, gnn_cfg);
    j["fused_layers"] = fusion::fused_layer_count(lm_cfg, gnn_cfg);
    j["sift"] = train::TrainConfig::for_profile(train::Stage::sift, p);
    j["fused"] = train::TrainConfig::for_profile(train::Stage::fused, p);
    std::cout << j.dump(2) << "\n";
  }

  CLI::App* cmd = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vulnerability detection from tuned dialogues and dataflow graphs", "msivd"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.allow_config_extras(CLI::config_extras_mode::ignore);

  Globals g;
  Ingest ingest;
  Prepare prepare;
  TrainSift train_sift;
  TrainFused train_fused;
  Eval evaluate;
  Predict predict;
  Synth synth;
  ShowConfig show;
  ingest.add(app);
  prepare.add(app);
  train_sift.add(app);
  train_fused.add(app);
  evaluate.add(app);
  predict.add(app);
  synth.add(app);
  show.add(app);

  std::vector<std::string> sections;
  for (const auto* sub : app.get_subcommands({})) sections.push_back(sub->get_name());
  app.config_formatter(std::make_shared<cli::JsonConfig>(sections));
  app.set_config("--config", "", "JSON run config; flags override its values");
  app.add_option("--profile", g.profile, "desk or paper")->envname("MSIVD_PROFILE")->check(CLI::IsMember({"desk", "paper"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (auto* cfg = app.get_config_ptr(); cfg && cfg->count() > 0) g.config_file = cfg->as<std::string>();

  try {
    const auto* sub = app.get_subcommands().front();
    auto rc = cli::RunConfig::capture(*sub, g.config_file);
    rc.options["profile"] = g.profile;
    if (sub == ingest.cmd) ingest.run(rc);
    else if (sub == prepare.cmd) prepare.run(rc);
    else if (sub == train_sift.cmd) train_sift.run(g, rc);
    else if (sub == train_fused.cmd) train_fused.run(g, rc);
    else if (sub == evaluate.cmd) evaluate.run(g, rc);
    else if (sub == predict.cmd) predict.run();
    else if (sub == synth.cmd) synth.run(rc);
    else if (sub == show.cmd) show.run(g);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
