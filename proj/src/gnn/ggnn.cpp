// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/gnn/ggnn.hpp"

#include <cmath>

#include "msivd/autograd/ops.hpp"
#include "msivd/common/error.hpp"

namespace msivd::gnn {

using ad::BasicTensor;

GgnnConfig GgnnConfig::paper() {
  GgnnConfig c;
  c.state_dim = 256;
  c.mlp_hidden = {256};
  return c;
}

void GgnnConfig::validate() const {
  if (feature_dim == 0 || state_dim == 0) throw UsageError("gnn dimensions must be positive");
  for (auto h : mlp_hidden)
    if (h == 0) throw UsageError("gnn mlp hidden sizes must be positive");
}

void to_json(nlohmann::json& j, const GgnnConfig& c) {
  j = {{"feature_dim", c.feature_dim},
       {"state_dim", c.state_dim},
       {"steps", c.steps},
       {"mlp_hidden", c.mlp_hidden},
       {"pooling", c.pooling == Pooling::mean ? "mean" : "sum"},
       {"reverse_edges", c.reverse_edges},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, GgnnConfig& c) {
  c = GgnnConfig{};
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.state_dim = j.value("state_dim", c.state_dim);
  c.steps = j.value("steps", c.steps);
  c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
  const std::string pooling = j.value("pooling", std::string("mean"));
  if (pooling != "mean" && pooling != "sum") throw UsageError("unknown pooling '" + pooling + "'");
  c.pooling = pooling == "sum" ? Pooling::sum : Pooling::mean;
  c.reverse_edges = j.value("reverse_edges", c.reverse_edges);
  c.seed = j.value("seed", c.seed);
}

namespace {

double fan_in_std(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

}  // namespace

template <typename T>
GruCell<T>::GruCell(std::size_t in, std::size_t d, Rng& rng)
    : wz_(in, d, rng, fan_in_std(in), true),
      uz_(d, d, rng, fan_in_std(d), true, false),
      wr_(in, d, rng, fan_in_std(in), true),
      ur_(d, d, rng, fan_in_std(d), true, false),
      wh_(in, d, rng, fan_in_std(in), true),
      uh_(d, d, rng, fan_in_std(d), true, false) {}

template <typename T>
BasicTensor<T> GruCell<T>::operator()(const BasicTensor<T>& h, const BasicTensor<T>& m) const {
  const auto z = ad::sigmoid(ad::add(wz_(m), uz_(h)));
  const auto r = ad::sigmoid(ad::add(wr_(m), ur_(h)));
  const auto candidate = ad::tanh(ad::add(wh_(m), uh_(ad::mul(r, h))));
  // (1 - z) * h + z * candidate = h + z * (candidate - h)
  return ad::add(h, ad::mul(z, ad::sub(candidate, h)));
}

template <typename T>
ad::ParamList<T> GruCell<T>::params() const {
  ad::ParamList<T> out;
  ad::append_params(out, "wz.", wz_.params());
  ad::append_params(out, "uz.", uz_.params());
  ad::append_params(out, "wr.", wr_.params());
  ad::append_params(out, "ur.", ur_.params());
  ad::append_params(out, "wh.", wh_.params());
  ad::append_params(out, "uh.", uh_.params());
  return out;
}

template <typename T>
Ggnn<T>::Ggnn(const GgnnConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  if (config_.projects_input())
    input_ = ad::Linear<T>(config_.feature_dim, config_.state_dim, rng,
                           fan_in_std(config_.feature_dim), true);
  std::size_t width = config_.state_dim;
  for (auto h : config_.mlp_hidden) {
    mlp_.emplace_back(width, h, rng, fan_in_std(width), true);
    width = h;
  }
  mlp_.emplace_back(width, config_.state_dim, rng, fan_in_std(width), true);
  gru_ = GruCell<T>(config_.state_dim, config_.state_dim, rng);
}

template <typename T>
BasicTensor<T> Ggnn<T>::mlp_aggregate(const BasicTensor<T>& states,
                                      std::span<const Edge> edges) const {
  const std::size_t n = states.rows();
  std::vector<T> adjacency(n * n, T(0));
  auto add_edge = [&](int from, int to) {
    if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= n ||
        static_cast<std::size_t>(to) >= n)
      throw Error("edge " + std::to_string(from) + "->" + std::to_string(to) +
                  " references a node outside 0.." + std::to_string(n ? n - 1 : 0));
    adjacency[static_cast<std::size_t>(to) * n + static_cast<std::size_t>(from)] += T(1);
  };
  for (auto [a, b] : edges) {
    add_edge(a, b);
    if (config_.reverse_edges) add_edge(b, a);
  }
  auto x = states;
  for (std::size_t i = 0; i < mlp_.size(); ++i) {
    x = mlp_[i](x);
    if (i + 1 < mlp_.size()) x = ad::relu(x);
  }
  return ad::matmul(BasicTensor<T>::from({n, n}, std::move(adjacency)), x);
}

template <typename T>
BasicTensor<T> Ggnn<T>::node_states(const BasicTensor<T>& features,
                                    std::span<const Edge> edges) const {
  if (features.rank() != 2 || features.cols() != config_.feature_dim)
    throw ShapeError("gnn features " + ad::shape_string(features.shape()) + " do not have width " +
                     std::to_string(config_.feature_dim));
  auto h = config_.projects_input() ? input_(features) : features;
  for (std::size_t s = 0; s < config_.steps; ++s) h = gru_(h, mlp_aggregate(h, edges));
  return h;
}

template <typename T>
BasicTensor<T> Ggnn<T>::forward(const BasicTensor<T>& features, std::span<const Edge> edges) const {
  const auto h = node_states(features, edges);
  return config_.pooling == Pooling::mean ? ad::mean_rows(h) : ad::sum_rows(h);
}

template <typename T>
ad::ParamList<T> Ggnn<T>::params() const {
  ad::ParamList<T> out;
  if (config_.projects_input()) ad::append_params(out, "input.", input_.params());
  for (std::size_t i = 0; i < mlp_.size(); ++i)
    ad::append_params(out, "mlp" + std::to_string(i) + ".", mlp_[i].params());
  ad::append_params(out, "gru.", gru_.params());
  return out;
}

template class GruCell<float>;
template class GruCell<double>;
template class Ggnn<float>;
template class Ggnn<double>;

}  // namespace msivd::gnn
