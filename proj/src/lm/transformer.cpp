// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/lm/transformer.hpp"

#include <algorithm>
#include <cmath>

#include "msivd/autograd/ops.hpp"
#include "msivd/common/error.hpp"
#include "msivd/lm/tokenizer.hpp"

namespace msivd::lm {

using ad::BasicTensor;

template <typename T>
DecoderBlock<T>::DecoderBlock(const TransformerConfig& c, Rng& rng)
    : n_heads_(c.n_heads),
      ln1_gamma_(BasicTensor<T>::full({c.d_model}, T(1))),
      ln1_beta_(BasicTensor<T>::zeros({c.d_model})),
      ln2_gamma_(BasicTensor<T>::full({c.d_model}, T(1))),
      ln2_beta_(BasicTensor<T>::zeros({c.d_model})),
      query_(c.d_model, c.d_model, c.lora_rank, c.lora_alpha, rng, c.init_std, c.lora_init_std),
      key_(c.d_model, c.d_model, rng, c.init_std, false, false),
      value_(c.d_model, c.d_model, c.lora_rank, c.lora_alpha, rng, c.init_std, c.lora_init_std),
      out_(c.d_model, c.d_model, rng, c.init_std, false, false),
      mlp_in_(c.d_model, c.mlp_hidden(), rng, c.init_std, false),
      mlp_out_(c.mlp_hidden(), c.d_model, rng, c.init_std, false) {}

template <typename T>
BasicTensor<T> DecoderBlock<T>::attention(const BasicTensor<T>& x) const {
  const auto q = query_(x);
  const auto k = key_(x);
  const auto v = value_(x);
  const std::size_t dh = x.cols() / n_heads_;
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  std::vector<BasicTensor<T>> heads;
  heads.reserve(n_heads_);
  for (std::size_t h = 0; h < n_heads_; ++h) {
    const auto qh = ad::slice_cols(q, h * dh, dh);
    const auto kh = ad::slice_cols(k, h * dh, dh);
    const auto vh = ad::slice_cols(v, h * dh, dh);
    const auto scores = ad::causal_mask(ad::scale(ad::matmul_nt(qh, kh), inv_sqrt));
    heads.push_back(ad::matmul(ad::softmax(scores), vh));
  }
  return out_(n_heads_ == 1 ? heads.front() : ad::concat_last_dim(heads));
}

template <typename T>
BasicTensor<T> DecoderBlock<T>::operator()(const BasicTensor<T>& x) const {
  const auto h = ad::add(x, attention(ad::layer_norm(x, ln1_gamma_, ln1_beta_)));
  const auto m = mlp_out_(ad::relu(mlp_in_(ad::layer_norm(h, ln2_gamma_, ln2_beta_))));
  return ad::add(h, m);
}

template <typename T>
ad::ParamList<T> DecoderBlock<T>::params() const {
  ad::ParamList<T> out{{"ln1.gamma", ln1_gamma_},
                       {"ln1.beta", ln1_beta_},
                       {"ln2.gamma", ln2_gamma_},
                       {"ln2.beta", ln2_beta_}};
  ad::append_params(out, "attn.query.", query_.params());
  ad::append_params(out, "attn.key.", key_.params());
  ad::append_params(out, "attn.value.", value_.params());
  ad::append_params(out, "attn.out.", out_.params());
  ad::append_params(out, "mlp.in.", mlp_in_.params());
  ad::append_params(out, "mlp.out.", mlp_out_.params());
  return out;
}

template <typename T>
void DecoderBlock<T>::set_adapters_enabled(bool on) {
  query_.set_enabled(on);
  value_.set_enabled(on);
}

template <typename T>
Transformer<T>::Transformer(const TransformerConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  const auto d = config_.d_model;
  token_embedding_ = ad::gaussian<T>(rng, {config_.vocab_size, d}, config_.init_std, false);
  position_embedding_ = ad::gaussian<T>(rng, {config_.context_window, d}, config_.init_std, false);
  blocks_.reserve(config_.n_layers);
  for (std::size_t i = 0; i < config_.n_layers; ++i) blocks_.emplace_back(config_, rng);
  final_gamma_ = BasicTensor<T>::full({d}, T(1));
  final_beta_ = BasicTensor<T>::zeros({d});
  head_ = ad::gaussian<T>(rng, {config_.vocab_size, d}, config_.head_init_std, false);
}

template <typename T>
BasicTensor<T> Transformer<T>::hidden_states(std::span<const int> tokens) const {
  if (tokens.empty()) throw ShapeError("forward on an empty token sequence");
  if (tokens.size() > config_.context_window)
    throw ShapeError("sequence of " + std::to_string(tokens.size()) +
                     " tokens exceeds the context window of " +
                     std::to_string(config_.context_window));
  std::vector<int> positions(tokens.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
  auto x = ad::add(ad::embedding_lookup(token_embedding_, tokens),
                   ad::embedding_lookup<T>(position_embedding_, positions));
  for (const auto& b : blocks_) x = b(x);
  return ad::layer_norm(x, final_gamma_, final_beta_);
}

template <typename T>
BasicTensor<T> Transformer<T>::lm_head(const BasicTensor<T>& hidden) const {
  return ad::matmul_nt(hidden, head_);
}

template <typename T>
LmOutput<T> Transformer<T>::forward(std::span<const int> tokens) const {
  auto hidden = hidden_states(tokens);
  return {lm_head(hidden), hidden};
}

template <typename T>
std::vector<int> Transformer<T>::generate_greedy(std::span<const int> prompt,
                                                 std::size_t max_new) const {
  std::vector<int> seq(prompt.begin(), prompt.end());
  std::vector<int> out;
  while (out.size() < max_new && seq.size() < config_.context_window) {
    const auto hidden = hidden_states(seq);
    const auto logits = lm_head(ad::select_row(hidden, hidden.rows() - 1));
    const auto row = logits.data();
    const int next = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    out.push_back(next);
    if (next == token::eos) break;
    seq.push_back(next);
  }
  return out;
}

template <typename T>
ad::ParamList<T> Transformer<T>::parameters() const {
  ad::ParamList<T> out{{"embed.token", token_embedding_}, {"embed.position", position_embedding_}};
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    ad::append_params(out, "block" + std::to_string(i) + ".", blocks_[i].params());
  out.push_back({"final_norm.gamma", final_gamma_});
  out.push_back({"final_norm.beta", final_beta_});
  out.push_back({"head", head_});
  return out;
}

template <typename T>
ad::ParamList<T> Transformer<T>::trainable_parameters() const {
  ad::ParamList<T> out;
  for (auto& p : parameters())
    if (p.tensor.requires_grad()) out.push_back(p);
  return out;
}

template class DecoderBlock<float>;
template class DecoderBlock<double>;
template class Transformer<float>;
template class Transformer<double>;

}  // namespace msivd::lm
