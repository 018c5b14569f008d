// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/lm/config.hpp"

#include "msivd/common/error.hpp"

namespace msivd {

std::string_view to_string(Profile p) { return p == Profile::paper ? "paper" : "desk"; }

Profile parse_profile(std::string_view name) {
  if (name == "desk") return Profile::desk;
  if (name == "paper") return Profile::paper;
  throw UsageError("unknown profile '" + std::string(name) + "' (expected desk or paper)");
}

}  // namespace msivd

namespace msivd::lm {

TransformerConfig TransformerConfig::desk() { return {}; }

TransformerConfig TransformerConfig::paper() {
  TransformerConfig c;
  c.profile = Profile::paper;
  c.d_model = 4096;
  c.n_layers = 8;
  c.n_heads = 32;
  c.context_window = 2048;
  c.head_init_std = 1.0 / 64.0;
  return c;
}

TransformerConfig TransformerConfig::for_profile(Profile p) {
  return p == Profile::paper ? paper() : desk();
}

void TransformerConfig::validate() const {
  if (d_model == 0 || n_layers == 0 || n_heads == 0 || context_window == 0)
    throw UsageError("transformer dimensions must be positive");
  if (d_model % n_heads != 0)
    throw UsageError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " +
                     std::to_string(n_heads));
  if (vocab_size < static_cast<std::size_t>(kVocabSize))
    throw UsageError("vocab_size must cover the " + std::to_string(kVocabSize) + " reserved ids");
  if (lora_rank == 0) throw UsageError("lora rank must be at least 1");
  if (profile == Profile::paper &&
      (d_model != 4096 || n_layers != 8 || context_window != 2048))
    throw UsageError("paper profile pins d_model=4096, n_layers=8, context_window=2048");
}

void to_json(nlohmann::json& j, const TransformerConfig& c) {
  j = {{"profile", std::string(to_string(c.profile))},
       {"d_model", c.d_model},
       {"n_layers", c.n_layers},
       {"n_heads", c.n_heads},
       {"context_window", c.context_window},
       {"vocab_size", c.vocab_size},
       {"lora_rank", c.lora_rank},
       {"lora_alpha", c.lora_alpha},
       {"lora_init_std", c.lora_init_std},
       {"init_std", c.init_std},
       {"head_init_std", c.head_init_std},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TransformerConfig& c) {
  c = TransformerConfig::for_profile(parse_profile(j.value("profile", "desk")));
  c.d_model = j.value("d_model", c.d_model);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.context_window = j.value("context_window", c.context_window);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.lora_rank = j.value("lora_rank", c.lora_rank);
  c.lora_alpha = j.value("lora_alpha", c.lora_alpha);
  c.lora_init_std = j.value("lora_init_std", c.lora_init_std);
  c.init_std = j.value("init_std", c.init_std);
  c.head_init_std = j.value("head_init_std", c.head_init_std);
  c.seed = j.value("seed", c.seed);
}

}  // namespace msivd::lm
