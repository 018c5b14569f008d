// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/eval/ablation.hpp"

#include <map>

#include "msivd/common/error.hpp"
#include "msivd/common/io.hpp"

namespace msivd::eval {

std::string_view to_string(AblationMode m) {
  switch (m) {
    case AblationMode::pretrained: return "pre-trained";
    case AblationMode::label_only_ft: return "label-only-ft";
    case AblationMode::single_round_sift: return "single-round-sift";
    case AblationMode::multi_round_sift: return "multi-round-sift";
    case AblationMode::multi_round_sift_gnn: return "multi-round-sift-gnn";
  }
  return "?";
}

std::string valid_mode_names() {
  std::string out;
  for (auto m : kAblationModes) {
    if (!out.empty()) out += ", ";
    out += to_string(m);
  }
  return out;
}

AblationMode parse_ablation_mode(std::string_view text) {
  for (auto m : kAblationModes)
    if (to_string(m) == text) return m;
  throw UsageError("unknown mode '" + std::string(text) + "'; valid modes: " + valid_mode_names());
}

ModeSetup setup_of(AblationMode m) {
  switch (m) {
    case AblationMode::pretrained: return {std::nullopt, false};
    case AblationMode::label_only_ft: return {train::SiftMode::label_only, false};
    case AblationMode::single_round_sift: return {train::SiftMode::single_round, false};
    case AblationMode::multi_round_sift: return {train::SiftMode::multi_round, false};
    case AblationMode::multi_round_sift_gnn: return {train::SiftMode::multi_round, true};
  }
  return {};
}

Scored score(const fusion::Lm& lm, const fusion::Classifier& classifier,
             std::span<const corpus::CodeSample> samples) {
  Scored s;
  for (const auto& sample : samples) {
    const auto p = fusion::predict(lm, classifier, sample.code);
    s.labels.push_back(sample.label);
    s.predictions.push_back(p.label);
    s.rows.push_back({sample.sample_id, p});
  }
  return s;
}

std::vector<MetricsReport> category_reports(std::string_view mode, std::string_view dataset,
                                            std::span<const corpus::CodeSample> samples, const Scored& scored) {
  std::vector<MetricsReport> out;
  for (auto cat : corpus::kAllCategories) {
    std::vector<bool> labels, preds;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].cwe_category != cat) continue;
      labels.push_back(scored.labels[i]);
      preds.push_back(scored.predictions[i]);
    }
    if (labels.empty()) continue;
    out.push_back(MetricsReport::from_counts(std::string(mode),
                                             std::string(dataset) + "/" + std::string(corpus::to_string(cat)),
                                             confusion(labels, preds)));
  }
  return out;
}

namespace {

void persist(const AblationOptions& options, std::span<const MetricsReport> reports) {
  if (options.report_path) write_file(*options.report_path, write_reports_json(reports));
}

}  // namespace

std::vector<MetricsReport> run_ablation(const corpus::Split& split, std::span<const AblationMode> modes,
                                        const AblationOptions& options, const ModeCallback& on_mode) {
  std::vector<MetricsReport> reports;
  if (modes.empty()) return reports;
  if (split.train.empty() || split.test.empty()) throw Error("ablation needs non-empty train and test splits");

  std::vector<dialogue::DialogueRecord> dialogues;
  for (const auto& s : split.train) dialogues.push_back(dialogue::dialogue_for(s));

  struct Tuned {
    fusion::Lm lm;
    std::size_t rounds = 0;
    train::TrainResult result;
  };
  std::map<std::optional<train::SiftMode>, Tuned> tuned;

  try {
    for (auto mode : modes) {
      const auto setup = setup_of(mode);
      auto it = tuned.find(setup.sift);
      if (it == tuned.end()) {
        Tuned t{fusion::Lm(options.lm), 0, {}};
        if (setup.sift) {
          const auto data =
              train::make_sift_data(dialogues, *setup.sift, options.sift.grouping, options.lm.context_window);
          auto cfg = options.sift;
          cfg.sift_mode = *setup.sift;
          t.rounds = data.max_rounds;
          t.result = train::train_sift(t.lm, data, cfg);
        }
        it = tuned.emplace(setup.sift, std::move(t)).first;
      }
      const auto& lm = it->second.lm;

      auto fc = fusion::FusionConfig::for_models(lm.config(), options.gnn);
      fc.use_gnn = setup.use_gnn;
      fusion::Classifier clf(fc);
      const auto prepared = fusion::prepare_all(lm, fc, split.train);
      ModeRun run{mode, it->second.rounds, it->second.result, train::train_fused(clf, prepared, options.fused)};

      const auto scored = score(lm, clf, split.test);
      const auto first = reports.size();
      reports.push_back(MetricsReport::from_counts(std::string(to_string(mode)), options.dataset,
                                                   confusion(scored.labels, scored.predictions)));
      if (options.per_category) {
        auto extra = category_reports(to_string(mode), options.dataset, split.test, scored);
        reports.insert(reports.end(), extra.begin(), extra.end());
      }
      persist(options, reports);
      if (on_mode) on_mode(run, std::span<const MetricsReport>(reports).subspan(first));
    }
  } catch (...) {
    persist(options, reports);
    throw;
  }
  return reports;
}

}  // namespace msivd::eval
