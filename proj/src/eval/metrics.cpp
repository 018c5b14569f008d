// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/eval/metrics.hpp"

#include "msivd/common/error.hpp"

namespace msivd::eval {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double ratio(double num, double den, bool& degenerate) {
  if (den <= 0.0) {
    degenerate = true;
    return 0.0;
  }
  return num / den;
}

template <typename Seq>
Confusion count(const Seq& labels, const Seq& predictions) {
  if (labels.size() != predictions.size())
    throw Error("confusion over " + std::to_string(labels.size()) + " labels but " +
                std::to_string(predictions.size()) + " predictions");
  if (labels.empty()) throw Error("confusion over an empty sample set");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) predictions[i] ? ++c.tp : ++c.fn;
    else predictions[i] ? ++c.fp : ++c.tn;
  }
  return c;
}

}  // namespace

Confusion confusion(std::span<const bool> labels, std::span<const bool> predictions) {
  return count(labels, predictions);
}

Confusion confusion(const std::vector<bool>& labels, const std::vector<bool>& predictions) {
  return count(labels, predictions);
}

Metrics metrics(const Confusion& c, F1Formula formula) {
  const auto tp = static_cast<double>(c.tp);
  const auto fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn);
  Metrics m;
  m.precision = ratio(tp, tp + fp, m.degenerate);
  m.recall = ratio(tp, tp + fn, m.degenerate);
  const double miss = formula == F1Formula::standard ? fp + fn : tp + fn;
  m.f1 = ratio(tp, tp + 0.5 * miss, m.degenerate);
  if (c.tp == 0) m.degenerate = true;
  return m;
}

Metrics random_baseline(double prevalence, double predict_rate) {
  if (!(prevalence >= 0.0 && prevalence <= 1.0) || !(predict_rate >= 0.0 && predict_rate <= 1.0))
    throw UsageError("prevalence and predict rate must lie in [0, 1]");
  Metrics m;
  m.precision = prevalence;
  m.recall = predict_rate;
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall, m.degenerate);
  if (prevalence == 0.0 || predict_rate == 0.0) m.degenerate = true;
  return m;
}

MetricsReport MetricsReport::from_counts(std::string mode, std::string dataset, const Confusion& counts) {
  return {std::move(mode), std::move(dataset), counts, eval::metrics(counts)};
}

ordered_json report_json(const MetricsReport& r) {
  ordered_json j;
  j["mode"] = r.mode;
  j["dataset"] = r.dataset;
  j["TP"] = r.counts.tp;
  j["FP"] = r.counts.fp;
  j["TN"] = r.counts.tn;
  j["FN"] = r.counts.fn;
  j["precision"] = r.metrics.precision;
  j["recall"] = r.metrics.recall;
  j["f1"] = r.metrics.f1;
  return j;
}

MetricsReport report_from_json(const json& j) {
  try {
    Confusion c{j.at("TP").get<std::size_t>(), j.at("FP").get<std::size_t>(), j.at("TN").get<std::size_t>(),
                j.at("FN").get<std::size_t>()};
    auto r = MetricsReport::from_counts(j.at("mode").get<std::string>(), j.at("dataset").get<std::string>(), c);
    r.metrics.precision = j.at("precision").get<double>();
    r.metrics.recall = j.at("recall").get<double>();
    r.metrics.f1 = j.at("f1").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed metrics report: ") + e.what(), 0);
  }
}

std::string write_reports_json(std::span<const MetricsReport> reports) {
  auto arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2) + "\n";
}

std::vector<MetricsReport> read_reports_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed report file: ") + e.what(), e.byte);
  }
  if (!doc.is_array()) throw ParseError("report file must hold an array", 0);
  std::vector<MetricsReport> out;
  for (const auto& j : doc) out.push_back(report_from_json(j));
  return out;
}

}  // namespace msivd::eval
