// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "msivd/autograd/linear.hpp"
#include "msivd/autograd/params.hpp"
#include "msivd/lm/config.hpp"
#include "msivd/lm/lora.hpp"

namespace msivd::lm {

template <typename T>
struct LmOutput {
  ad::BasicTensor<T> logits;  // [T x V]
  ad::BasicTensor<T> hidden;  // [T x d_model], after the final layer norm
};

/// Pre-norm decoder block: causal multi-head self-attention with LoRA on the
/// query and value projections, then a ReLU MLP. Base weights are frozen.
template <typename T>
class DecoderBlock {
 public:
  DecoderBlock(const TransformerConfig& config, Rng& rng);

  ad::BasicTensor<T> operator()(const ad::BasicTensor<T>& x) const;
  /// Attention sublayer alone, without residual or norm.
  ad::BasicTensor<T> attention(const ad::BasicTensor<T>& x) const;

  ad::ParamList<T> params() const;
  void set_adapters_enabled(bool on);

 private:
  std::size_t n_heads_;
  ad::BasicTensor<T> ln1_gamma_, ln1_beta_, ln2_gamma_, ln2_beta_;
  LoraLinear<T> query_;
  ad::Linear<T> key_;
  LoraLinear<T> value_;
  ad::Linear<T> out_;
  ad::Linear<T> mlp_in_;
  ad::Linear<T> mlp_out_;
};

/// Decoder-only byte-level language model. Identical configs (including the
/// seed) give identical weights for every scalar type.
template <typename T>
class Transformer {
 public:
  explicit Transformer(const TransformerConfig& config);

  const TransformerConfig& config() const { return config_; }

  /// Final-norm hidden states [T x d_model]. Throws when the sequence is
  /// empty or longer than the context window.
  ad::BasicTensor<T> hidden_states(std::span<const int> tokens) const;
  /// Vocabulary logits for the given hidden rows.
  ad::BasicTensor<T> lm_head(const ad::BasicTensor<T>& hidden) const;
  LmOutput<T> forward(std::span<const int> tokens) const;

  /// Argmax decoding; stops at eos, after `max_new` tokens, or at the context
  /// window. Returns only the continuation.
  std::vector<int> generate_greedy(std::span<const int> prompt, std::size_t max_new) const;

  const DecoderBlock<T>& block(std::size_t i) const { return blocks_.at(i); }

  /// Switches every adapter off (base model) or back on.
  void set_adapters_enabled(bool on) {
    for (auto& b : blocks_) b.set_adapters_enabled(on);
  }

  /// Every weight, base and adapter, with stable dotted names.
  ad::ParamList<T> parameters() const;
  /// The LoRA factors only.
  ad::ParamList<T> trainable_parameters() const;

 private:
  TransformerConfig config_;
  ad::BasicTensor<T> token_embedding_;
  ad::BasicTensor<T> position_embedding_;
  std::vector<DecoderBlock<T>> blocks_;
  ad::BasicTensor<T> final_gamma_, final_beta_;
  ad::BasicTensor<T> head_;
};

}  // namespace msivd::lm
