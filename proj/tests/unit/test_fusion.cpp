// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "msivd/autograd/grad_check.hpp"
#include "msivd/common/error.hpp"
#include "msivd/fusion/predict.hpp"
#include "msivd/lm/tokenizer.hpp"
#include "msivd/train/trainer.hpp"
#include "support/tensors.hpp"

using namespace msivd;
using namespace msivd::fusion;

namespace {

constexpr const char* kParsable = "int f(int a) {\n  int b = a + 1;\n  if (b > 3) {\n    b = 0;\n  }\n  return b;\n}\n";

lm::TransformerConfig tiny_lm() {
  auto c = lm::TransformerConfig::desk();
  c.d_model = 8;
  c.n_heads = 2;
  c.n_layers = 1;
  c.context_window = 64;
  return c;
}

gnn::GgnnConfig tiny_gnn() {
  gnn::GgnnConfig g;
  g.feature_dim = 8;
  g.state_dim = 4;
  g.steps = 2;
  g.mlp_hidden = {4};
  return g;
}

// Label decided by a single call: gets() is vulnerable, fgets() is safe.
std::vector<corpus::CodeSample> token_pattern_set(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const char* names[] = {"buf", "dst", "line", "name", "path", "tmp"};
  std::vector<corpus::CodeSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    corpus::CodeSample s;
    s.sample_id = "T-" + std::to_string(i);
    s.label = i % 2 == 0;
    const std::string v = names[rng.below(6)];
    s.code = "void f(char *" + v + ") {\n  " + (s.label ? "gets(" + v + ");" : "fgets(" + v + ", 64, stdin);") +
             "\n}\n";
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("width and layer bookkeeping") {
  FusionConfig c;
  c.d_model = 8;
  c.gnn = tiny_gnn();
  CHECK(c.input_width() == 12);
  c.use_gnn = false;
  CHECK(c.input_width() == 8);

  CHECK(fused_width(lm::TransformerConfig::paper(), gnn::GgnnConfig::paper()) == 4352);
  CHECK(fused_layer_count(lm::TransformerConfig::paper(), gnn::GgnnConfig::paper()) == 11);
  CHECK(fused_width(lm::TransformerConfig::desk(), gnn::GgnnConfig::desk()) == 80);
}

TEST_CASE("fuse concatenates along the last dimension") {
  FusionConfig c;
  c.d_model = 8;
  c.gnn = tiny_gnn();
  FusedClassifier<double> clf(c);
  Rng rng(1);
  LmView<double> view{testing::random_tensor<double>(rng, {1, 8})};
  const auto graph = graph_input(kParsable, feature_config(c));
  REQUIRE_FALSE(graph.fallback);
  const auto fused = clf.fuse(view, graph);
  CHECK(fused.shape() == ad::Shape{1, 12});
  for (std::size_t j = 0; j < 8; ++j) CHECK(fused.at(0, j) == view.rows.at(0, j));

  c.readout = Readout::broadcast;
  FusedClassifier<double> wide(c);
  LmView<double> rows{testing::random_tensor<double>(rng, {5, 8})};
  const auto all = wide.fuse(rows, graph);
  CHECK(all.shape() == ad::Shape{5, 12});
  for (std::size_t r = 1; r < 5; ++r)
    for (std::size_t j = 8; j < 12; ++j) CHECK(all.at(r, j) == all.at(0, j));
  CHECK(wide.logits(rows, graph).shape() == ad::Shape{1, 2});
}

TEST_CASE("classify") {
  const auto even = classify(0.0, 0.0);
  CHECK(even.score == doctest::Approx(0.5));
  CHECK(even.log_prob_yes == doctest::Approx(std::log(0.5)));
  CHECK(even.log_prob_no == doctest::Approx(std::log(0.5)));
  CHECK_FALSE(even.label);

  CHECK(classify(3.0, 1.0).label);
  CHECK_FALSE(classify(1.0, 3.0).label);

  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.normal(0, 4), b = rng.normal(0, 4), c = rng.normal(0, 100);
    const auto p = classify(a, b);
    CHECK(std::abs(std::exp(p.log_prob_yes) + std::exp(p.log_prob_no) - 1.0) <= 1e-6);
    CHECK(p.score == doctest::Approx(std::exp(p.log_prob_yes)));
    const auto shifted = classify(a + c, b + c);
    CHECK(shifted.label == p.label);
    CHECK(shifted.score == doctest::Approx(p.score).epsilon(1e-9));
    CHECK(classify(std::tanh(a), std::tanh(b)).label == p.label);
  }
}

TEST_CASE("readout picks the final non-pad token") {
  const std::vector<int> tokens{lm::token::bos, 'a', 'b', lm::token::pad, lm::token::pad};
  CHECK(final_non_pad(tokens) == 2);
  const std::vector<int> pads{lm::token::pad, lm::token::pad};
  CHECK_THROWS_AS(final_non_pad(pads), Error);
  CHECK_THROWS_AS(final_non_pad(std::vector<int>{}), Error);
}

TEST_CASE("trailing padding leaves the fused vector unchanged") {
  lm::Transformer<double> model(tiny_lm());
  FusionConfig c;
  c.d_model = 8;
  c.gnn = tiny_gnn();
  FusedClassifier<double> clf(c);
  const auto graph = graph_input(kParsable, feature_config(c));

  std::vector<int> tokens{lm::token::bos, 'i', 'n', 't', lm::token::teacher};
  auto fused_with = [&](std::size_t pads, int filler) {
    auto seq = tokens;
    seq.insert(seq.end(), pads, filler);
    return clf.fuse(lm_view(model.hidden_states(seq), seq, Readout::final_token), graph);
  };
  const auto base = fused_with(2, lm::token::pad);
  const auto more = fused_with(7, lm::token::pad);
  for (std::size_t j = 0; j < base.size(); ++j) CHECK(std::abs(base.data()[j] - more.data()[j]) <= 1e-12);
}

TEST_CASE("unparseable code falls back to a flagged zero embedding") {
  FusionConfig c;
  c.d_model = 8;
  c.gnn = tiny_gnn();
  const auto graph = graph_input("#include <x.h>\nstruct s { int a; };\n", feature_config(c));
  CHECK(graph.fallback);
  CHECK_FALSE(graph.error.empty());

  FusedClassifier<double> clf(c);
  Rng rng(3);
  LmView<double> view{testing::random_tensor<double>(rng, {1, 8})};
  const auto fused = clf.fuse(view, graph);
  for (std::size_t j = 8; j < 12; ++j) CHECK(fused.at(0, j) == 0.0);
  CHECK(clf.predict(view, graph).flagged);
  CHECK_FALSE(clf.predict(view, graph_input(kParsable, feature_config(c))).flagged);
}

TEST_CASE("parameters follow the graph switch") {
  FusionConfig c;
  c.d_model = 8;
  c.gnn = tiny_gnn();
  FusedClassifier<float> with(c);
  c.use_gnn = false;
  FusedClassifier<float> without(c);
  auto has_gnn = [](const ad::ParamList<float>& ps) {
    return std::any_of(ps.begin(), ps.end(), [](const auto& p) { return p.name.starts_with("gnn."); });
  };
  CHECK(has_gnn(with.params()));
  CHECK_FALSE(has_gnn(without.params()));
  for (const auto& p : without.params()) CHECK(p.name.starts_with("head."));
}

TEST_CASE("fused logits gradient matches central differences") {
  FusionConfig c;
  c.d_model = 8;
  c.gnn = tiny_gnn();
  FusedClassifier<double> clf(c);
  const auto graph = graph_input(kParsable, feature_config(c));
  Rng rng(4);
  auto rows = testing::random_tensor<double>(rng, {1, 8});
  auto f = [&](const ad::Tensor64& x) { return testing::weighted_sum(clf.log_probs({x}, graph), 5); };
  CHECK(ad::grad_check(f, rows, 1e-3, 1e-4).passed);
}

TEST_CASE("config json round trip") {
  FusionConfig c;
  c.readout = Readout::broadcast;
  c.use_gnn = false;
  const nlohmann::json j = c;
  CHECK(j.get<FusionConfig>() == c);
  CHECK(parse_readout("final-token") == Readout::final_token);
  CHECK_THROWS_AS(parse_readout("mean"), UsageError);
}

TEST_CASE("lm-only classifier overfits a token-pattern set") {
  const auto set = token_pattern_set(200, 11);
  Lm model(lm::TransformerConfig::desk());
  auto fc = FusionConfig::for_models(model.config(), gnn::GgnnConfig::desk());
  fc.use_gnn = false;
  REQUIRE(fc.input_width() == model.config().d_model);
  const auto prepared = prepare_all(model, fc, set);
  Classifier clf(fc);
  train::train_fused(clf, prepared, train::TrainConfig::desk(train::Stage::fused));

  int tp = 0, fp = 0, fn = 0;
  for (const auto& s : prepared) {
    const auto p = clf.predict(s.lm, s.graph);
    tp += p.label && s.label;
    fp += p.label && !s.label;
    fn += !p.label && s.label;
  }
  const double f1 = 2.0 * tp / (2.0 * tp + fp + fn);
  CHECK(f1 >= 0.95);

  const auto& safe = set[1];
  REQUIRE_FALSE(safe.label);
  const auto first = predict(model, clf, safe.code);
  CHECK_FALSE(first.label);
  CHECK(predict(model, clf, safe.code) == first);
}

TEST_CASE("prediction rows serialize with the documented keys") {
  const std::vector<PredictionRow> rows{{"a:0", classify(2.0, 1.0)}, {"b:0", classify(0.0, 1.0, true)}};
  const auto text = write_predictions_jsonl(rows);
  std::size_t line_count = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const auto j = nlohmann::json::parse(text.substr(start, end - start));
    CHECK(j.size() == 4);
    for (const char* key : {"sample_id", "label", "score", "flagged"}) CHECK(j.contains(key));
    ++line_count;
    start = end + 1;
  }
  CHECK(line_count == 2);
  const auto one = nlohmann::json::parse(prediction_json(rows[1].prediction, "b:0"));
  CHECK(one["flagged"] == true);
  CHECK(one["label"] == false);
}
