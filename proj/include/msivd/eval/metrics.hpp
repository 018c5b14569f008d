// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace msivd::eval {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

/// Counts over paired labels and predictions (true = vulnerable). Throws on
/// empty input or a length mismatch.
Confusion confusion(std::span<const bool> labels, std::span<const bool> predictions);
Confusion confusion(const std::vector<bool>& labels, const std::vector<bool>& predictions);

/// `as_printed` divides by TP + 0.5(TP + FN) instead of TP + 0.5(FP + FN).
enum class F1Formula { standard, as_printed };

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when a ratio had a zero denominator and was reported as 0.
  bool degenerate = false;
  bool operator==(const Metrics&) const = default;
};

Metrics metrics(const Confusion& c, F1Formula formula = F1Formula::standard);

/// Expected metrics of a predictor that flags each sample independently with
/// probability `predict_rate` on data with the given positive share.
Metrics random_baseline(double prevalence, double predict_rate = 0.5);

struct MetricsReport {
  std::string mode;
  std::string dataset;
  Confusion counts;
  Metrics metrics;

  static MetricsReport from_counts(std::string mode, std::string dataset, const Confusion& counts);
  bool operator==(const MetricsReport&) const = default;
};

/// Keys: mode, dataset, TP, FP, TN, FN, precision, recall, f1.
nlohmann::ordered_json report_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

std::string write_reports_json(std::span<const MetricsReport> reports);
std::vector<MetricsReport> read_reports_json(std::string_view text);

}  // namespace msivd::eval
