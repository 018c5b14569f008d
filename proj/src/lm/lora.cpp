// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/lm/lora.hpp"

#include "msivd/autograd/ops.hpp"
#include "msivd/common/error.hpp"

namespace msivd::lm {

using ad::BasicTensor;

template <typename T>
LoraLinear<T>::LoraLinear(std::size_t d_in, std::size_t d_out, std::size_t rank, double alpha,
                          Rng& rng, double base_std, double lora_std)
    : LoraLinear(ad::gaussian<T>(rng, {d_out, d_in}, base_std, false),
                 ad::gaussian<T>(rng, {rank, d_in}, lora_std, true),
                 BasicTensor<T>::zeros({d_out, rank}, true), alpha) {}

template <typename T>
LoraLinear<T>::LoraLinear(BasicTensor<T> base, BasicTensor<T> a, BasicTensor<T> b, double alpha)
    : base_(std::move(base)), a_(std::move(a)), b_(std::move(b)), alpha_(alpha) {
  if (base_.rank() != 2 || a_.rank() != 2 || b_.rank() != 2)
    throw ShapeError("lora tensors must be matrices");
  if (a_.rows() == 0) throw ShapeError("lora rank must be at least 1");
  if (a_.rows() != b_.cols())
    throw ShapeError("lora rank mismatch: A " + ad::shape_string(a_.shape()) + " vs B " +
                     ad::shape_string(b_.shape()));
  if (a_.cols() != base_.cols() || b_.rows() != base_.rows())
    throw ShapeError("lora factors A " + ad::shape_string(a_.shape()) + ", B " +
                     ad::shape_string(b_.shape()) + " do not fit base " +
                     ad::shape_string(base_.shape()));
}

template <typename T>
BasicTensor<T> LoraLinear<T>::operator()(const BasicTensor<T>& x) const {
  auto y = ad::matmul_nt(x, base_);
  if (!enabled_) return y;
  auto delta = ad::matmul_nt(ad::matmul_nt(x, a_), b_);
  return ad::add(y, ad::scale(delta, static_cast<T>(scale())));
}

template <typename T>
BasicTensor<T> LoraLinear<T>::dense_weight() const {
  auto ba = ad::matmul(b_.detach(), a_.detach());
  return ad::add(base_.detach(), ad::scale(ba, static_cast<T>(scale())));
}

template class LoraLinear<float>;
template class LoraLinear<double>;

}  // namespace msivd::lm
