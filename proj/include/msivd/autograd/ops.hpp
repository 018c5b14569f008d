// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "msivd/autograd/tensor.hpp"

// Differentiable kernels. Every function records its backward rule when any
// input requires a gradient. Summation order is fixed (row-major,
// sequential), so identical inputs give bitwise-identical outputs.
//
//   kernel            inputs                         output
//   matmul            [m x k], [k x n]               [m x n]
//   matmul_nt         [m x k], [n x k]               [m x n]   (a * b^T)
//   transpose         [m x n]                        [n x m]
//   add               [m x n], [m x n] or [n]        [m x n]   (row broadcast)
//   sub, mul          [m x n], [m x n]               [m x n]
//   scale, affine     any                            same
//   sigmoid/tanh/relu any                            same
//   concat_last_dim   [m x n_i]...                   [m x sum n_i]
//   slice_cols        [m x n]                        [m x len]
//   embedding_lookup  [V x d], ids (T)               [T x d]
//   layer_norm        [m x d], gamma [d], beta [d]   [m x d]
//   softmax/log_softmax  [m x n] (last dim)          [m x n]
//   causal_mask       [T x T]                        [T x T]   (-inf above diagonal)
//   cross_entropy     [T x V], targets (T), mask (T) scalar    (mean over masked rows)
//   nll_sum           [T x V], targets (T), mask (T) scalar    (sum over masked rows)
//   sum, mean         any                            scalar
//   sum_rows/mean_rows [m x n]                       [1 x n]
//   select_row        [m x n], i                     [1 x n]
//   repeat_rows       [1 x n], m                     [m x n]
//   gather_rows       [m x n], ids (k)               [k x n]

namespace msivd::ad {

using Mask = std::vector<std::uint8_t>;

template <typename T> BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> matmul_nt(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> transpose(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T> BasicTensor<T> scale(const BasicTensor<T>& a, T factor);
/// alpha * a + beta, elementwise.
template <typename T> BasicTensor<T> affine(const BasicTensor<T>& a, T alpha, T beta);
template <typename T> BasicTensor<T> sigmoid(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> tanh(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> relu(const BasicTensor<T>& a);
template <typename T>
BasicTensor<T> concat_last_dim(const std::vector<BasicTensor<T>>& parts);
template <typename T>
BasicTensor<T> slice_cols(const BasicTensor<T>& a, std::size_t start, std::size_t len);
template <typename T>
BasicTensor<T> embedding_lookup(const BasicTensor<T>& table, std::span<const int> ids);
template <typename T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                          const BasicTensor<T>& beta, T eps = T(1e-5));
template <typename T> BasicTensor<T> softmax(const BasicTensor<T>& x);
template <typename T> BasicTensor<T> log_softmax(const BasicTensor<T>& x);
template <typename T> BasicTensor<T> causal_mask(const BasicTensor<T>& scores);
/// Mean over masked rows of -log softmax(logits)[t, targets[t]]. Throws when
/// the mask selects nothing.
template <typename T>
BasicTensor<T> cross_entropy(const BasicTensor<T>& logits, std::span<const int> targets,
                             std::span<const std::uint8_t> mask);
/// Sum over masked rows of -log softmax(logits)[t, targets[t]]; 0 for an empty mask.
template <typename T>
BasicTensor<T> nll_sum(const BasicTensor<T>& logits, std::span<const int> targets,
                       std::span<const std::uint8_t> mask);
template <typename T> BasicTensor<T> sum(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> mean(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> sum_rows(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> mean_rows(const BasicTensor<T>& a);
template <typename T> BasicTensor<T> select_row(const BasicTensor<T>& a, std::size_t row);
template <typename T> BasicTensor<T> repeat_rows(const BasicTensor<T>& a, std::size_t rows);
template <typename T>
BasicTensor<T> gather_rows(const BasicTensor<T>& a, std::span<const int> rows);

}  // namespace msivd::ad
