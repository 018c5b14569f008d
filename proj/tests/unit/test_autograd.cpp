// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "msivd/autograd/grad_check.hpp"
#include "msivd/autograd/ops.hpp"
#include "msivd/common/error.hpp"
#include "support/grad_suite.hpp"
#include "support/tensors.hpp"

using namespace msivd;
using namespace msivd::ad;
using msivd::testing::random_tensor;
using msivd::testing::weighted_sum;

namespace {

constexpr double kH = 1e-3;
constexpr double kTol = 1e-4;

double check(const std::function<Tensor64(const Tensor64&)>& f, const Tensor64& x) {
  return grad_check(f, x, kH, kTol).max_relative_error;
}

}  // namespace

TEST_CASE("shape laws") {
  Rng rng(1);
  CHECK(matmul(random_tensor<float>(rng, {2, 3}), random_tensor<float>(rng, {3, 4})).shape() ==
        Shape{2, 4});
  CHECK(concat_last_dim<float>({random_tensor<float>(rng, {5, 8}), random_tensor<float>(rng, {5, 4})})
            .shape() == Shape{5, 12});
  CHECK_THROWS_AS(matmul(random_tensor<float>(rng, {2, 3}), random_tensor<float>(rng, {2, 3})),
                  ShapeError);
  CHECK_THROWS_AS(concat_last_dim<float>({random_tensor<float>(rng, {5, 8}),
                                          random_tensor<float>(rng, {4, 4})}),
                  ShapeError);
  CHECK_THROWS_AS(add(random_tensor<float>(rng, {2, 3}), random_tensor<float>(rng, {2, 2})),
                  ShapeError);
}

TEST_CASE("shape error names both shapes") {
  Rng rng(2);
  try {
    matmul(random_tensor<float>(rng, {2, 3}), random_tensor<float>(rng, {4, 5}));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x5]") != std::string::npos);
  }
}

TEST_CASE("concat width is the sum of input widths") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 1 + rng.below(5);
    std::vector<Tensor> parts;
    std::size_t total = 0;
    for (std::size_t k = 0, n = 1 + rng.below(4); k < n; ++k) {
      const std::size_t w = 1 + rng.below(6);
      total += w;
      parts.push_back(random_tensor<float>(rng, {rows, w}));
    }
    CHECK(concat_last_dim(parts).shape() == Shape{rows, total});
  }
}

TEST_CASE("analytic values") {
  CHECK(sigmoid(Tensor::scalar(0.0f)).item() == doctest::Approx(0.5));

  auto sm = softmax(Tensor::from({1, 4}, {0.3f, 0.3f, 0.3f, 0.3f}));
  for (float v : sm.data()) CHECK(v == doctest::Approx(0.25));

  Rng rng(4);
  auto x = random_tensor<float>(rng, {3, 7}, 3.0);
  auto ls = log_softmax(x);
  for (std::size_t r = 0; r < 3; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 7; ++c) s += std::exp(ls.at(r, c));
    CHECK(std::abs(s - 1.0) <= 1e-6);
  }
  auto shifted = softmax(affine(x, 1.0f, 5.0f));
  auto plain = softmax(x);
  for (std::size_t i = 0; i < plain.size(); ++i)
    CHECK(std::abs(shifted.data()[i] - plain.data()[i]) <= 1e-6);
}

TEST_CASE("cross entropy") {
  const std::vector<int> targets{1, 3};
  const Mask both{1, 1};
  auto uniform = Tensor64::zeros({2, 4});
  CHECK(cross_entropy(uniform, targets, both).item() == doctest::Approx(std::log(4.0)));

  // Row 0 gives the target probability 0.5, row 1 gives 0.25.
  auto logits = Tensor64::from({2, 4}, {std::log(0.5), std::log(0.5), -1e9, -1e9,  //
                                   std::log(0.25), std::log(0.25), std::log(0.25), std::log(0.25)});
  const std::vector<int> t2{0, 3};
  CHECK(cross_entropy(logits, t2, both).item() ==
        doctest::Approx((std::log(2.0) + std::log(4.0)) / 2).epsilon(1e-12));
  CHECK(cross_entropy(logits, t2, Mask{1, 0}).item() == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(cross_entropy(logits, t2, Mask{0, 0}), Error);
  CHECK_THROWS_AS(cross_entropy(logits, std::vector<int>{0, 9}, both), ShapeError);
}

TEST_CASE("backward basics") {
  auto x = Tensor64::from({2}, {1.0, 2.0}, true);
  sum(x).backward();
  CHECK(x.grad()[0] == 1.0);
  CHECK(x.grad()[1] == 1.0);

  x.zero_grad();
  auto loss = sum(mul(x, x));
  loss.backward();
  CHECK(x.grad()[0] == 2.0);
  CHECK(x.grad()[1] == 4.0);

  CHECK_THROWS_AS(loss.backward(), Error);
  CHECK_THROWS_AS(mul(x, x).backward(), ShapeError);
}

TEST_CASE("gradients accumulate across backward calls until cleared") {
  auto x = Tensor64::from({1}, {3.0}, true);
  sum(scale(x, 2.0)).backward();
  sum(scale(x, 2.0)).backward();
  CHECK(x.grad()[0] == 4.0);
}

TEST_CASE("frozen inputs never receive gradient") {
  Rng rng(5);
  auto w = random_tensor<double>(rng, {3, 3});
  auto x = random_tensor<double>(rng, {2, 3}, 1.0, true);
  sum(matmul(x, w)).backward();
  CHECK(x.has_grad());
  CHECK_FALSE(w.has_grad());
}

TEST_CASE("matmul + sigmoid chain matches central differences") {
  Rng rng(6);
  auto w = random_tensor<double>(rng, {4, 3});
  auto x = random_tensor<double>(rng, {2, 4});
  auto f = [&](const Tensor64& in) { return weighted_sum(sigmoid(matmul(in, w)), 7); };
  CHECK(check(f, x) <= kTol);
}

TEST_CASE("grad_check: every kernel") {
  for (const auto& c : testing::kernel_cases()) {
    CAPTURE(c.name);
    CHECK(testing::max_relative_error(c) <= kTol);
  }
}

TEST_CASE("grad_check: model blocks") {
  for (const auto& c : testing::model_cases()) {
    CAPTURE(c.name);
    CHECK(testing::max_relative_error(c) <= kTol);
  }
}

TEST_CASE("grad_check is exact for linear functions") {
  Rng rng(8);
  auto w = random_tensor<double>(rng, {3, 4});
  auto f = [&](const Tensor64& x) { return sum(mul(x, w)); };
  CHECK(grad_check(f, random_tensor<double>(rng, {3, 4}), 1e-3, 1e-8).passed);
}

TEST_CASE("grad_check flags a wrong gradient") {
  // Detached inner value: analytic gradient misses a term.
  auto f = [](const Tensor64& x) { return sum(mul(x, x.detach())); };
  auto r = grad_check(f, Tensor64::from({2}, {1.0, 2.0}), 1e-3, 1e-4);
  CHECK_FALSE(r.passed);
  CHECK(r.max_relative_error > 0.3);
}

TEST_CASE("identical inputs give bitwise identical outputs") {
  auto run = [] {
    Rng rng(9);
    auto a = random_tensor<float>(rng, {16, 32}, 1.0, true);
    auto b = random_tensor<float>(rng, {32, 8});
    auto y = log_softmax(matmul(layer_norm(a, Tensor::full({32}, 1.0f), Tensor::zeros({32})), b));
    auto loss = sum(y);
    loss.backward();
    std::vector<float> out(y.data().begin(), y.data().end());
    out.insert(out.end(), a.grad().begin(), a.grad().end());
    return out;
  };
  CHECK(run() == run());
}
