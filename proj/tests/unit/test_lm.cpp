// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "msivd/autograd/grad_check.hpp"
#include "msivd/lm/loss.hpp"
#include "msivd/lm/tokenizer.hpp"
#include "msivd/lm/transformer.hpp"
#include "support/tensors.hpp"

using namespace msivd;
using namespace msivd::lm;
using msivd::testing::random_tensor;
using msivd::testing::weighted_sum;

namespace {

TransformerConfig small_config() {
  TransformerConfig c;
  c.d_model = 16;
  c.n_layers = 1;
  c.n_heads = 2;
  c.context_window = 32;
  c.lora_rank = 2;
  c.init_std = 0.4;
  c.seed = 5;
  return c;
}

std::vector<int> random_tokens(Rng& rng, std::size_t n, int vocab = 256) {
  std::vector<int> t(n);
  for (auto& x : t) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab)));
  return t;
}

double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  REQUIRE(a.size() == b.size());
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

}  // namespace

TEST_CASE("tokenizer") {
  Tokenizer tok;
  CHECK(tok.encode("").empty());
  CHECK(Tokenizer::is_special(token::yes));
  CHECK(tok.decode(std::vector<int>{token::yes}) == "<|yes|>");
  CHECK(tok.encode("yes") == std::vector<int>{'y', 'e', 's'});
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    const auto len = rng.below(40);
    for (std::uint64_t k = 0; k < len; ++k) {
      // Random code points across the 1-4 byte UTF-8 ranges.
      const std::uint32_t ranges[] = {0x7f, 0x7ff, 0xd7ff, 0x10ffff};
      std::uint32_t cp = static_cast<std::uint32_t>(rng.below(ranges[rng.below(4)] + 1));
      if (cp >= 0xd800 && cp <= 0xdfff) cp = 'a';
      if (cp < 0x80) {
        s += static_cast<char>(cp);
      } else if (cp < 0x800) {
        s += static_cast<char>(0xc0 | (cp >> 6));
        s += static_cast<char>(0x80 | (cp & 0x3f));
      } else if (cp < 0x10000) {
        s += static_cast<char>(0xe0 | (cp >> 12));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        s += static_cast<char>(0x80 | (cp & 0x3f));
      } else {
        s += static_cast<char>(0xf0 | (cp >> 18));
        s += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        s += static_cast<char>(0x80 | (cp & 0x3f));
      }
    }
    const auto ids = tok.encode(s);
    for (int id : ids) REQUIRE_FALSE(Tokenizer::is_special(id));
    REQUIRE(tok.decode(ids) == s);
  }
}

TEST_CASE("config validation") {
  auto c = TransformerConfig::desk();
  CHECK(c.d_model == 64);
  CHECK(c.n_layers == 2);
  CHECK(c.n_heads == 4);
  CHECK(c.context_window == 1024);
  const auto p = TransformerConfig::paper();
  CHECK(p.d_model == 4096);
  CHECK(p.n_layers == 8);
  CHECK(p.context_window == 2048);
  c.n_heads = 5;
  CHECK_THROWS_AS(c.validate(), UsageError);
  nlohmann::json j = p;
  CHECK(j.get<TransformerConfig>() == p);
}

TEST_CASE("lora layer") {
  Rng rng(3);
  LoraLinear<float> layer(6, 5, 2, 16.0, rng, 0.3, 0.02);
  const auto x = random_tensor<float>(rng, {4, 6});

  SUBCASE("zero B reproduces the base layer exactly") {
    const auto y = layer(x);
    const auto base = ad::matmul_nt(x, layer.base());
    CHECK(max_abs_diff(y.data(), base.data()) == 0.0);
  }
  SUBCASE("matches the materialized dense weight") {
    auto b = layer.lora_b();
    for (auto& v : b.mutable_data()) v = static_cast<float>(rng.normal(0, 0.5));
    const auto y = layer(x);
    const auto dense = ad::matmul_nt(x, layer.dense_weight());
    CHECK(max_abs_diff(y.data(), dense.data()) <= 1e-5);
  }
  SUBCASE("gradient reaches A and B but never W0") {
    auto b = layer.lora_b();
    for (auto& v : b.mutable_data()) v = 0.1f;
    auto loss = ad::sum(layer(x));
    loss.backward();
    CHECK(layer.lora_a().has_grad());
    CHECK(layer.lora_b().has_grad());
    CHECK_FALSE(layer.base().has_grad());
  }
  SUBCASE("rank mismatch is rejected") {
    CHECK_THROWS_AS(LoraLinear<float>(ad::Tensor::zeros({5, 6}), ad::Tensor::zeros({2, 6}),
                                      ad::Tensor::zeros({5, 3}), 16.0),
                    ShapeError);
  }
}

TEST_CASE("lora and attention gradients match finite differences") {
  Rng rng(11);
  const auto base = random_tensor<double>(rng, {4, 3});
  const auto a = random_tensor<double>(rng, {2, 3});
  const auto b = random_tensor<double>(rng, {4, 2});
  const auto x = random_tensor<double>(rng, {5, 3});
  auto via_a = [&](const ad::Tensor64& p) {
    return weighted_sum(LoraLinear<double>(base, p, b, 16.0)(x), 1);
  };
  auto via_b = [&](const ad::Tensor64& p) {
    return weighted_sum(LoraLinear<double>(base, a, p, 16.0)(x), 2);
  };
  auto via_x = [&](const ad::Tensor64& p) {
    return weighted_sum(LoraLinear<double>(base, a, b, 16.0)(p), 3);
  };
  CHECK(ad::grad_check(via_a, a, 1e-5, 1e-4).passed);
  CHECK(ad::grad_check(via_b, b, 1e-5, 1e-4).passed);
  CHECK(ad::grad_check(via_x, x, 1e-5, 1e-4).passed);

  Transformer<double> model(small_config());
  auto attn = [&](const ad::Tensor64& p) { return weighted_sum(model.block(0).attention(p), 4); };
  auto block = [&](const ad::Tensor64& p) { return weighted_sum(model.block(0)(p), 5); };
  const auto h = random_tensor<double>(rng, {6, 16});
  CHECK(ad::grad_check(attn, h, 1e-5, 1e-4).max_relative_error <= 1e-4);
  CHECK(ad::grad_check(block, h, 1e-5, 1e-4).max_relative_error <= 1e-4);
}

TEST_CASE("transformer forward") {
  SUBCASE("shapes") {
    TransformerConfig c;
    c.vocab_size = 300;
    Transformer<float> model(c);
    Rng rng(2);
    const auto out = model.forward(random_tokens(rng, 16));
    CHECK(out.logits.shape() == ad::Shape{16, 300});
    CHECK(out.hidden.shape() == ad::Shape{16, 64});
  }
  SUBCASE("causality is exact") {
    Transformer<float> model(small_config());
    Rng rng(4);
    auto tokens = random_tokens(rng, 12);
    const auto before = model.forward(tokens).logits;
    tokens[7] = (tokens[7] + 1) % 256;
    const auto after = model.forward(tokens).logits;
    const std::size_t v = before.cols();
    for (std::size_t i = 0; i < 7 * v; ++i) REQUIRE(before.data()[i] == after.data()[i]);
    CHECK(max_abs_diff(before.data().subspan(7 * v), after.data().subspan(7 * v)) > 0.0);
  }
  SUBCASE("fresh adapters leave the base model unchanged") {
    Transformer<float> model(TransformerConfig::desk());
    Rng rng(6);
    for (int i = 0; i < 5; ++i) {
      const auto tokens = random_tokens(rng, 1 + rng.below(40));
      model.set_adapters_enabled(true);
      const auto with = model.forward(tokens).logits;
      model.set_adapters_enabled(false);
      const auto without = model.forward(tokens).logits;
      CHECK(max_abs_diff(with.data(), without.data()) <= 1e-6);
    }
  }
  SUBCASE("overlength and empty input are rejected") {
    Transformer<float> model(small_config());
    CHECK_THROWS_AS(model.forward(std::vector<int>(33, 1)), ShapeError);
    CHECK_THROWS_AS(model.forward(std::vector<int>{}), ShapeError);
  }
  SUBCASE("only adapters are trainable") {
    Transformer<float> model(small_config());
    for (const auto& p : model.trainable_parameters()) {
      const bool lora = p.name.find("lora_a") != std::string::npos ||
                        p.name.find("lora_b") != std::string::npos;
      CHECK(lora);
    }
    CHECK(model.trainable_parameters().size() == 4);
  }
}

TEST_CASE("multitask loss laws") {
  using Term = TaskTerm<double>;
  SUBCASE("mean of per-task means") {
    std::vector<Term> terms{{"a", ad::Tensor64::scalar(2.0), 2}, {"b", ad::Tensor64::scalar(9.0), 3}};
    CHECK(combine_task_terms<double>(terms).item() == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("zero-token task is named in the error") {
    std::vector<Term> terms{{"description", ad::Tensor64::scalar(0.0), 0}};
    CHECK_THROWS_WITH(combine_task_terms<double>(terms),
                      doctest::Contains("description"));
  }

  Transformer<double> model(small_config());
  Rng rng(8);
  auto make_seq = [&](std::size_t n, std::size_t ntasks) {
    TaskSequence s;
    s.tokens = random_tokens(rng, n);
    s.task_masks.assign(ntasks, ad::Mask(n, 0));
    for (std::size_t i = 1; i < n; ++i) s.task_masks[rng.below(ntasks)][i] = rng.below(2);
    for (std::size_t t = 0; t < ntasks; ++t) s.task_masks[t][1 + t] = 1;
    return s;
  };
  const std::vector<std::string> one{"existence"};
  const std::vector<std::string> three = task_names(TaskGrouping::per_round);

  SUBCASE("a single task reduces to cross-entropy") {
    const auto s = make_seq(20, 1);
    const auto loss = multitask_loss<double>(model, std::vector{s}, one).item();
    const auto logits = model.forward(s.tokens).logits;
    std::vector<int> targets(s.tokens.begin() + 1, s.tokens.end());
    ad::Mask mask(s.task_masks[0].begin() + 1, s.task_masks[0].end());
    const auto shifted = ad::slice_cols(ad::transpose(logits), 0, 19);
    const auto ce = ad::cross_entropy<double>(ad::transpose(shifted), targets, mask).item();
    CHECK(std::abs(loss - ce) <= 1e-9);
  }
  SUBCASE("equals the mean of per-task token means") {
    const std::vector<TaskSequence> batch{make_seq(20, 3), make_seq(25, 3)};
    const auto loss = multitask_loss<double>(model, batch, three).item();
    double expect = 0;
    for (std::size_t t = 0; t < 3; ++t) {
      double nll = 0;
      std::size_t count = 0;
      for (const auto& s : batch) {
        const auto lp = ad::log_softmax(model.forward(s.tokens).logits);
        for (std::size_t i = 1; i < s.tokens.size(); ++i) {
          if (!s.task_masks[t][i]) continue;
          nll -= lp.at(i - 1, static_cast<std::size_t>(s.tokens[i]));
          ++count;
        }
      }
      expect += nll / static_cast<double>(count) / 3.0;
    }
    CHECK(std::abs(loss - expect) <= 1e-9);
  }
  SUBCASE("duplicating one task's samples changes nothing") {
    // Two single-task groups: the first task's samples are duplicated.
    auto s1 = make_seq(18, 2);
    auto s2 = make_seq(22, 2);
    s1.task_masks[1].assign(18, 0);
    s2.task_masks[0].assign(22, 0);
    const std::vector<std::string> two{"detection", "explanation"};
    const auto base = multitask_loss<double>(model, std::vector{s1, s2}, two).item();
    const auto dup = multitask_loss<double>(model, std::vector{s1, s1, s2}, two).item();
    CHECK(std::abs(base - dup) <= 1e-9);
  }
  SUBCASE("a listed task without tokens is an error naming it") {
    auto s = make_seq(10, 3);
    s.task_masks[2].assign(10, 0);
    CHECK_THROWS_WITH(multitask_loss<double>(model, std::vector{s}, three),
                      doctest::Contains("localization"));
  }
}

TEST_CASE("greedy generation") {
  Transformer<float> model(small_config());
  const std::vector<int> prompt{token::bos, 'a', 'b'};
  CHECK(model.generate_greedy(prompt, 0).empty());
  const auto a = model.generate_greedy(prompt, 8);
  CHECK(a.size() <= 8);
  CHECK(a == model.generate_greedy(prompt, 8));
}

TEST_CASE("a trained adapter memorizes one answer") {
  auto c = small_config();
  c.d_model = 32;
  c.n_heads = 2;
  c.lora_rank = 8;
  c.init_std = 0.3;
  c.context_window = 64;
  Transformer<float> model(c);
  Tokenizer tok;
  std::vector<int> prompt{token::student};
  for (int id : tok.encode("vuln?")) prompt.push_back(id);
  prompt.push_back(token::teacher);
  const std::vector<int> answer{token::yes, 'o', 'k', token::eos};
  TaskSequence seq;
  seq.tokens = prompt;
  seq.tokens.insert(seq.tokens.end(), answer.begin(), answer.end());
  seq.task_masks.assign(1, ad::Mask(seq.tokens.size(), 0));
  for (std::size_t i = prompt.size(); i < seq.tokens.size(); ++i) seq.task_masks[0][i] = 1;
  const std::vector<std::string> tasks{"existence"};

  auto params = model.trainable_parameters();
  double first = 0, last = 0;
  for (int step = 0; step < 300; ++step) {
    for (auto& p : params) p.tensor.zero_grad();
    auto loss = multitask_loss<float>(model, std::vector{seq}, tasks);
    if (step == 0) first = loss.item();
    last = loss.item();
    loss.backward();
    for (auto& p : params) {
      auto v = p.tensor.mutable_data();
      auto g = p.tensor.grad();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= 0.5f * g[i];
    }
  }
  CHECK(last < first);
  CHECK(model.generate_greedy(prompt, 8) == answer);
}
