// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "msivd/common/error.hpp"
#include "msivd/corpus/synthetic.hpp"
#include "msivd/train/optimizer.hpp"
#include "msivd/train/trainer.hpp"

using namespace msivd;
using namespace msivd::train;

namespace {

lm::TransformerConfig small_lm() {
  auto c = lm::TransformerConfig::desk();
  c.d_model = 16;
  c.n_heads = 2;
  c.n_layers = 1;
  return c;
}

std::vector<dialogue::DialogueRecord> dialogues(std::size_t n) {
  corpus::SyntheticOptions opt;
  opt.count = n;
  std::vector<dialogue::DialogueRecord> out;
  for (const auto& s : corpus::make_synthetic_corpus(opt)) out.push_back(dialogue::dialogue_for(s));
  return out;
}

std::vector<float> snapshot(const ad::ParamList<float>& params) {
  std::vector<float> out;
  for (const auto& p : params) out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

TrainConfig quick_sift(std::size_t epochs) {
  auto c = TrainConfig::desk(Stage::sift);
  c.epochs = epochs;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("reference hyperparameters") {
  const auto sift = TrainConfig::reference(Stage::sift);
  CHECK(sift.learning_rate == 1e-5);
  CHECK(sift.batch_size == 4);
  CHECK(sift.epochs == 10);
  const auto fused = TrainConfig::reference(Stage::fused);
  CHECK(fused.learning_rate == 1e-6);
  CHECK(fused.epochs == 5);
  CHECK(fused.momentum == 0.0);
  CHECK(TrainConfig::for_profile(Stage::sift, Profile::paper) == sift);

  auto bad = sift;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad = sift;
  bad.learning_rate = -1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  const nlohmann::json j = TrainConfig::desk(Stage::fused);
  CHECK(j.get<TrainConfig>() == TrainConfig::desk(Stage::fused));
  CHECK(parse_sift_mode("label-only") == SiftMode::label_only);
  CHECK_THROWS_AS(parse_stage("pretrain"), UsageError);
}

TEST_CASE("step count law") {
  CHECK(expected_steps(10, 4, 3) == 9);
  CHECK(expected_steps(8, 4, 5) == 10);
  CHECK(expected_steps(1, 4, 1) == 1);

  const auto order = epoch_order(9, 3, 0);
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 9; ++i) CHECK(sorted[i] == i);
  CHECK(epoch_order(9, 3, 0) == order);
  CHECK(epoch_order(9, 3, 1) != order);
}

TEST_CASE("loss curve csv") {
  LossCurve c{{3.0, 2.5, 2.25}};
  CHECK(c.to_csv() == "step,loss\n1,3\n2,2.5\n3,2.25\n");
  CHECK(c.strictly_decreasing(3));
  CHECK_FALSE(c.strictly_decreasing(4));
  c.loss.push_back(2.25);
  CHECK_FALSE(c.strictly_decreasing(4));
}

TEST_CASE("sift data per mode") {
  const auto ds = dialogues(12);
  const auto multi = make_sift_data(ds, SiftMode::multi_round, lm::TaskGrouping::per_round, 1024);
  CHECK(multi.max_rounds == 3);
  CHECK(multi.tasks.size() == 3);
  CHECK(multi.sequences.size() == ds.size());
  for (const auto& s : multi.sequences) CHECK(s.task_masks.size() == 3);

  const auto single = make_sift_data(ds, SiftMode::single_round, lm::TaskGrouping::per_round, 1024);
  CHECK(single.max_rounds == 1);
  CHECK(single.tasks.size() == 1);

  const auto label = make_sift_data(ds, SiftMode::label_only, lm::TaskGrouping::per_round, 1024);
  CHECK(label.max_rounds == 1);
  for (const auto& s : label.sequences)
    CHECK(std::count(s.task_masks[0].begin(), s.task_masks[0].end(), 1) == 1);

  std::vector<dialogue::DialogueRecord> negatives;
  for (const auto& d : ds)
    if (!d.label) negatives.push_back(d);
  REQUIRE_FALSE(negatives.empty());
  CHECK_THROWS_WITH_AS(make_sift_data(negatives, SiftMode::multi_round, lm::TaskGrouping::per_round, 1024),
                       doctest::Contains("has no dialogue tokens"), Error);
}

TEST_CASE("sgd") {
  auto w = ad::Tensor::from({2}, {1.0f, 1.0f}, true);
  ad::ParamList<float> params{{"w", w}};
  Sgd sgd(params, {0.5, 0.0, 1.0});
  ad::sum(ad::scale(w, 6.0f)).backward();
  const double norm = sgd.step();
  CHECK(norm == doctest::Approx(std::sqrt(72.0)));
  CHECK(sgd.last_step_clipped());
  CHECK(w.data()[0] == doctest::Approx(1.0 - 0.5 / std::sqrt(2.0)));
  CHECK_FALSE(w.has_grad());

  ad::sum(ad::scale(w, 0.1f)).backward();
  sgd.step();
  CHECK_FALSE(sgd.last_step_clipped());
  CHECK(sgd.clipped_steps() == 1);

  ad::ParamList<float> frozen{{"f", ad::Tensor::zeros({2})}};
  CHECK_THROWS_AS(Sgd(frozen, {}), Error);
}

TEST_CASE("sift training lowers the loss and leaves the base untouched") {
  const auto data = make_sift_data(dialogues(20), SiftMode::multi_round, lm::TaskGrouping::per_round, 1024);
  lm::Transformer<float> model(small_lm());
  auto base = model.parameters();
  std::erase_if(base, [](const auto& p) { return p.name.find("lora") != std::string::npos; });
  const auto base_before = snapshot(base);
  const auto adapters_before = snapshot(model.trainable_parameters());

  const auto cfg = quick_sift(10);
  const auto result = train_sift(model, data, cfg);
  CHECK(result.curve.loss.size() == expected_steps(20, 4, 10));
  CHECK(result.epoch_loss.size() == 10);
  CHECK(result.epoch_loss.back() < result.epoch_loss.front());
  CHECK(snapshot(base) == base_before);
  CHECK(snapshot(model.trainable_parameters()) != adapters_before);
}

TEST_CASE("identical seeds give identical curves and weights") {
  const auto data = make_sift_data(dialogues(8), SiftMode::multi_round, lm::TaskGrouping::per_round, 1024);
  auto run = [&](std::uint64_t seed) {
    lm::Transformer<float> model(small_lm());
    auto cfg = quick_sift(2);
    cfg.seed = seed;
    const auto r = train_sift(model, data, cfg);
    return std::pair{r.curve.to_csv(), snapshot(model.parameters())};
  };
  const auto a = run(1);
  const auto b = run(1);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(run(2).first != a.first);
}

TEST_CASE("fused training keeps the LM frozen") {
  corpus::SyntheticOptions opt;
  opt.count = 12;
  const auto samples = corpus::make_synthetic_corpus(opt);
  lm::Transformer<float> model(small_lm());
  const auto lm_before = snapshot(model.parameters());

  auto fc = fusion::FusionConfig::for_models(model.config(), gnn::GgnnConfig::desk());
  fusion::Classifier clf(fc);
  const auto clf_before = snapshot(clf.params());
  const auto prepared = fusion::prepare_all(model, fc, samples);
  auto cfg = TrainConfig::desk(Stage::fused);
  cfg.epochs = 3;
  std::size_t calls = 0;
  const auto result = train_fused(clf, prepared, cfg, [&](std::size_t, double) { ++calls; });

  CHECK(result.curve.loss.size() == expected_steps(12, 4, 3));
  CHECK(calls == result.curve.loss.size());
  CHECK(snapshot(model.parameters()) == lm_before);
  CHECK(snapshot(clf.params()) != clf_before);
}

TEST_CASE("checkpoint container") {
  lm::Transformer<float> model(small_lm());
  TrainResult result;
  result.curve.loss = {2.0, 1.5};
  result.epoch_loss = {1.75};
  const auto ckp = sift_checkpoint(model, quick_sift(1), result);
  const auto bytes = serialize_checkpoint(ckp);
  CHECK(bytes.substr(0, 8) == "MSIVDCKP");
  CHECK(parse_checkpoint(bytes) == ckp);
  CHECK(serialize_checkpoint(parse_checkpoint(bytes)) == bytes);

  const auto path = std::filesystem::temp_directory_path() / "msivd_test_ckp.bin";
  save_checkpoint(path, ckp);
  CHECK(load_checkpoint(path) == ckp);
  std::filesystem::remove(path);

  auto corrupt = bytes;
  corrupt[0] = 'X';
  CHECK_THROWS_AS(parse_checkpoint(corrupt), ParseError);
  auto future = bytes;
  future[8] = 9;
  CHECK_THROWS_WITH_AS(parse_checkpoint(future), doctest::Contains("version"), ParseError);
  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() - 3)), ParseError);
  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, 10)), ParseError);
}

TEST_CASE("restored models match bitwise") {
  lm::Transformer<float> model(small_lm());
  const auto ckp = sift_checkpoint(model, quick_sift(1), {});
  const auto loaded = load_lm(parse_checkpoint(serialize_checkpoint(ckp)), model.config());
  CHECK(snapshot(loaded.parameters()) == snapshot(model.parameters()));

  auto other = small_lm();
  other.d_model = 32;
  CHECK_THROWS_AS(load_lm(ckp, other), ShapeError);

  auto fc = fusion::FusionConfig::for_models(model.config(), gnn::GgnnConfig::desk());
  fusion::Classifier clf(fc);
  const auto fused = fused_checkpoint(model, clf, TrainConfig::desk(Stage::fused), {});
  const auto back = load_classifier(parse_checkpoint(serialize_checkpoint(fused)));
  CHECK(back.config() == clf.config());
  CHECK(snapshot(back.params()) == snapshot(clf.params()));

  fusion::FusionConfig narrow = fc;
  narrow.d_model = 8;
  fusion::Classifier small(narrow);
  auto params = small.params();
  CHECK_THROWS_WITH_AS(restore_params(fused, "clf.", params), doctest::Contains("head."), ShapeError);
}
