// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/autograd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "msivd/common/error.hpp"

namespace msivd::ad {
namespace {

template <typename T>
using NodeT = Node<T>;

template <typename T>
bool wants(const NodeT<T>& out, std::size_t i) {
  return out.inputs[i]->requires_grad;
}

template <typename T>
std::vector<T>& grad_of(NodeT<T>& out, std::size_t i) {
  return out.inputs[i]->grad_buffer();
}

template <typename T>
void require_matrix(const BasicTensor<T>& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(t.shape()));
  }
}

template <typename T>
void require_same(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapC = Eigen::Map<const RowMajor<T>>;

// C[m x n] += A[m x k] * B[k x n]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  const auto M = static_cast<Eigen::Index>(m), K = static_cast<Eigen::Index>(k),
             N = static_cast<Eigen::Index>(n);
  Eigen::Map<RowMajor<T>>(c, M, N).noalias() += MapC<T>(a, M, K) * MapC<T>(b, K, N);
}

// C[m x n] += A[k x m]^T * B[k x n]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  const auto M = static_cast<Eigen::Index>(m), K = static_cast<Eigen::Index>(k),
             N = static_cast<Eigen::Index>(n);
  Eigen::Map<RowMajor<T>>(c, M, N).noalias() += MapC<T>(a, K, M).transpose() * MapC<T>(b, K, N);
}

template <typename T>
std::vector<T> transposed(std::span<const T> a, std::size_t m, std::size_t n) {
  std::vector<T> t(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t[j * m + i] = a[i * n + j];
  return t;
}

// C[m x n] += A[m x k] * B[n x k]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  const auto M = static_cast<Eigen::Index>(m), K = static_cast<Eigen::Index>(k),
             N = static_cast<Eigen::Index>(n);
  Eigen::Map<RowMajor<T>>(c, M, N).noalias() += MapC<T>(a, M, K) * MapC<T>(b, N, K).transpose();
}

template <typename T, typename F, typename D>
BasicTensor<T> unary(const BasicTensor<T>& a, const char* op, F f, D dfdx_from_y) {
  std::vector<T> y(a.size());
  auto x = a.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(x[i]);
  std::vector<T> ycopy = a.requires_grad() ? y : std::vector<T>{};
  return BasicTensor<T>::make_result(
      a.shape(), std::move(y), op, {a},
      [ycopy = std::move(ycopy), dfdx_from_y](NodeT<T>& out) {
        auto& ga = grad_of(out, 0);
        const auto& xin = out.inputs[0]->value;
        for (std::size_t i = 0; i < ga.size(); ++i)
          ga[i] += out.grad[i] * dfdx_from_y(xin[i], ycopy[i]);
      });
}

}  // namespace

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul: shape mismatch " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  std::vector<T> c(m * n, T(0));
  gemm_nn(a.data().data(), b.data().data(), c.data(), m, k, n);
  return BasicTensor<T>::make_result({m, n}, std::move(c), "matmul", {a, b},
                                     [m, k, n](NodeT<T>& out) {
                                       if (wants(out, 0))
                                         gemm_nt(out.grad.data(), out.inputs[1]->value.data(),
                                                 grad_of(out, 0).data(), m, n, k);
                                       if (wants(out, 1))
                                         gemm_tn(out.inputs[0]->value.data(), out.grad.data(),
                                                 grad_of(out, 1).data(), k, m, n);
                                     });
}

template <typename T>
BasicTensor<T> matmul_nt(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw ShapeError("matmul_nt: shape mismatch " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()) + "^T");
  }
  std::vector<T> c(m * n, T(0));
  gemm_nt(a.data().data(), b.data().data(), c.data(), m, k, n);
  return BasicTensor<T>::make_result(
      {m, n}, std::move(c), "matmul_nt", {a, b}, [m, k, n](NodeT<T>& out) {
        if (wants(out, 0))
          gemm_nn(out.grad.data(), out.inputs[1]->value.data(), grad_of(out, 0).data(), m, n, k);
        if (wants(out, 1))
          gemm_tn(out.grad.data(), out.inputs[0]->value.data(), grad_of(out, 1).data(), n, m, k);
      });
}

template <typename T>
BasicTensor<T> transpose(const BasicTensor<T>& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  return BasicTensor<T>::make_result({n, m}, transposed<T>(a.data(), m, n), "transpose", {a},
                                     [m, n](NodeT<T>& out) {
                                       auto& ga = grad_of(out, 0);
                                       for (std::size_t i = 0; i < m; ++i)
                                         for (std::size_t j = 0; j < n; ++j)
                                           ga[i * n + j] += out.grad[j * m + i];
                                     });
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() == b.shape()) {
    std::vector<T> y(a.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] + b.data()[i];
    return BasicTensor<T>::make_result(a.shape(), std::move(y), "add", {a, b},
                                       [](NodeT<T>& out) {
                                         for (std::size_t k = 0; k < 2; ++k) {
                                           if (!wants(out, k)) continue;
                                           auto& g = grad_of(out, k);
                                           for (std::size_t i = 0; i < g.size(); ++i)
                                             g[i] += out.grad[i];
                                         }
                                       });
  }
  // Row broadcast: b holds one value per column of a.
  if (a.rank() == 0 || b.size() != a.cols() || b.rank() > 2 || (b.rank() == 2 && b.rows() != 1)) {
    throw ShapeError("add: shape mismatch " + shape_string(a.shape()) + " + " +
                     shape_string(b.shape()));
  }
  const std::size_t m = a.size() / a.cols(), n = a.cols();
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = a.data()[i * n + j] + b.data()[j];
  return BasicTensor<T>::make_result(a.shape(), std::move(y), "add_row", {a, b},
                                     [m, n](NodeT<T>& out) {
                                       if (wants(out, 0)) {
                                         auto& g = grad_of(out, 0);
                                         for (std::size_t i = 0; i < g.size(); ++i)
                                           g[i] += out.grad[i];
                                       }
                                       if (wants(out, 1)) {
                                         auto& g = grad_of(out, 1);
                                         for (std::size_t i = 0; i < m; ++i)
                                           for (std::size_t j = 0; j < n; ++j)
                                             g[j] += out.grad[i * n + j];
                                       }
                                     });
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same(a, b, "sub");
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] - b.data()[i];
  return BasicTensor<T>::make_result(a.shape(), std::move(y), "sub", {a, b}, [](NodeT<T>& out) {
    if (wants(out, 0)) {
      auto& g = grad_of(out, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i];
    }
    if (wants(out, 1)) {
      auto& g = grad_of(out, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= out.grad[i];
    }
  });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same(a, b, "mul");
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] * b.data()[i];
  return BasicTensor<T>::make_result(a.shape(), std::move(y), "mul", {a, b}, [](NodeT<T>& out) {
    const auto& av = out.inputs[0]->value;
    const auto& bv = out.inputs[1]->value;
    if (wants(out, 0)) {
      auto& g = grad_of(out, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i] * bv[i];
    }
    if (wants(out, 1)) {
      auto& g = grad_of(out, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[i] * av[i];
    }
  });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor) {
  return affine(a, factor, T(0));
}

template <typename T>
BasicTensor<T> affine(const BasicTensor<T>& a, T alpha, T beta) {
  std::vector<T> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = alpha * a.data()[i] + beta;
  return BasicTensor<T>::make_result(a.shape(), std::move(y), "affine", {a},
                                     [alpha](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t i = 0; i < g.size(); ++i)
                                         g[i] += alpha * out.grad[i];
                                     });
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& a) {
  return unary(
      a, "sigmoid", [](T x) { return T(1) / (T(1) + std::exp(-x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
BasicTensor<T> tanh(const BasicTensor<T>& a) {
  return unary(
      a, "tanh", [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& a) {
  return unary(
      a, "relu", [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
BasicTensor<T> concat_last_dim(const std::vector<BasicTensor<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_last_dim: no inputs");
  Shape lead = parts[0].shape();
  if (lead.empty()) throw ShapeError("concat_last_dim: scalar input");
  lead.pop_back();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape s = p.shape();
    if (s.empty()) throw ShapeError("concat_last_dim: scalar input");
    const std::size_t w = s.back();
    s.pop_back();
    if (s != lead) {
      throw ShapeError("concat_last_dim: shape mismatch " + shape_string(parts[0].shape()) +
                       " vs " + shape_string(p.shape()));
    }
    widths.push_back(w);
    total += w;
  }
  const std::size_t rows = numel(lead);
  std::vector<T> y(rows * total);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto src = parts[k].data();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(src.data() + r * widths[k], widths[k], y.data() + r * total + off);
    off += widths[k];
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  return BasicTensor<T>::make_result(
      out_shape, std::move(y), "concat_last_dim", parts,
      [widths, rows, total](NodeT<T>& out) {
        std::size_t o = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
          if (wants(out, k)) {
            auto& g = grad_of(out, k);
            for (std::size_t r = 0; r < rows; ++r)
              for (std::size_t j = 0; j < widths[k]; ++j)
                g[r * widths[k] + j] += out.grad[r * total + o + j];
          }
          o += widths[k];
        }
      });
}

template <typename T>
BasicTensor<T> slice_cols(const BasicTensor<T>& a, std::size_t start, std::size_t len) {
  require_matrix(a, "slice_cols");
  const std::size_t m = a.rows(), n = a.cols();
  if (start + len > n) {
    throw ShapeError("slice_cols: columns [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of range for " +
                     shape_string(a.shape()));
  }
  std::vector<T> y(m * len);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(a.data().data() + i * n + start, len, y.data() + i * len);
  return BasicTensor<T>::make_result({m, len}, std::move(y), "slice_cols", {a},
                                     [m, n, start, len](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t i = 0; i < m; ++i)
                                         for (std::size_t j = 0; j < len; ++j)
                                           g[i * n + start + j] += out.grad[i * len + j];
                                     });
}

template <typename T>
BasicTensor<T> embedding_lookup(const BasicTensor<T>& table, std::span<const int> ids) {
  require_matrix(table, "embedding_lookup");
  const std::size_t v = table.rows(), d = table.cols();
  std::vector<T> y(ids.size() * d);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || static_cast<std::size_t>(ids[t]) >= v) {
      throw ShapeError("embedding_lookup: id " + std::to_string(ids[t]) +
                       " outside table of shape " + shape_string(table.shape()));
    }
    std::copy_n(table.data().data() + static_cast<std::size_t>(ids[t]) * d, d,
                y.data() + t * d);
  }
  std::vector<int> idcopy(ids.begin(), ids.end());
  return BasicTensor<T>::make_result({ids.size(), d}, std::move(y), "embedding_lookup", {table},
                                     [idcopy = std::move(idcopy), d](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t t = 0; t < idcopy.size(); ++t) {
                                         T* row = g.data() + static_cast<std::size_t>(idcopy[t]) * d;
                                         for (std::size_t j = 0; j < d; ++j)
                                           row[j] += out.grad[t * d + j];
                                       }
                                     });
}

template <typename T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                          const BasicTensor<T>& beta, T eps) {
  require_matrix(x, "layer_norm");
  const std::size_t m = x.rows(), d = x.cols();
  if (gamma.size() != d || beta.size() != d) {
    throw ShapeError("layer_norm: gamma/beta " + shape_string(gamma.shape()) + "/" +
                     shape_string(beta.shape()) + " do not match " + shape_string(x.shape()));
  }
  std::vector<T> y(m * d), xhat(m * d), inv_std(m);
  const auto xv = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += xv[i * d + j];
    mu /= T(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const T c = xv[i * d + j] - mu;
      var += c * c;
    }
    var /= T(d);
    inv_std[i] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[i * d + j] = (xv[i * d + j] - mu) * inv_std[i];
      y[i * d + j] = xhat[i * d + j] * gamma.data()[j] + beta.data()[j];
    }
  }
  return BasicTensor<T>::make_result(
      {m, d}, std::move(y), "layer_norm", {x, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), m, d](NodeT<T>& out) {
        const auto& gam = out.inputs[1]->value;
        if (wants(out, 0)) {
          auto& gx = grad_of(out, 0);
          std::vector<T> dxhat(d);
          for (std::size_t i = 0; i < m; ++i) {
            T mean_d = 0, mean_dx = 0;
            for (std::size_t j = 0; j < d; ++j) {
              dxhat[j] = out.grad[i * d + j] * gam[j];
              mean_d += dxhat[j];
              mean_dx += dxhat[j] * xhat[i * d + j];
            }
            mean_d /= T(d);
            mean_dx /= T(d);
            for (std::size_t j = 0; j < d; ++j)
              gx[i * d + j] += inv_std[i] * (dxhat[j] - mean_d - xhat[i * d + j] * mean_dx);
          }
        }
        if (wants(out, 1)) {
          auto& gg = grad_of(out, 1);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) gg[j] += out.grad[i * d + j] * xhat[i * d + j];
        }
        if (wants(out, 2)) {
          auto& gb = grad_of(out, 2);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) gb[j] += out.grad[i * d + j];
        }
      });
}

namespace {

template <typename T>
void softmax_rows(std::span<const T> x, std::vector<T>& y, std::size_t m, std::size_t n,
                  bool log_space) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* xi = x.data() + i * n;
    T* yi = y.data() + i * n;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, xi[j]);
    T s = 0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(xi[j] - mx);
    if (log_space) {
      const T lse = mx + std::log(s);
      for (std::size_t j = 0; j < n; ++j) yi[j] = xi[j] - lse;
    } else {
      for (std::size_t j = 0; j < n; ++j) yi[j] = std::exp(xi[j] - mx) / s;
    }
  }
}

template <typename T>
void check_targets(const BasicTensor<T>& logits, std::span<const int> targets,
                   std::span<const std::uint8_t> mask, const char* op) {
  require_matrix(logits, op);
  if (targets.size() != logits.rows() || mask.size() != logits.rows()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(targets.size()) + " targets and " +
                     std::to_string(mask.size()) + " mask entries for logits " +
                     shape_string(logits.shape()));
  }
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (mask[t] && (targets[t] < 0 || static_cast<std::size_t>(targets[t]) >= logits.cols())) {
      throw ShapeError(std::string(op) + ": target " + std::to_string(targets[t]) +
                       " outside vocabulary of " + std::to_string(logits.cols()));
    }
  }
}

template <typename T>
BasicTensor<T> masked_nll(const BasicTensor<T>& logits, std::span<const int> targets,
                          std::span<const std::uint8_t> mask, bool average, const char* op) {
  check_targets(logits, targets, mask, op);
  const std::size_t m = logits.rows(), n = logits.cols();
  std::size_t count = 0;
  for (auto b : mask) count += b ? 1 : 0;
  if (average && count == 0) throw Error(std::string(op) + ": mask selects no positions");
  std::vector<T> logp(m * n);
  softmax_rows<T>(logits.data(), logp, m, n, true);
  T total = 0;
  for (std::size_t t = 0; t < m; ++t)
    if (mask[t]) total -= logp[t * n + static_cast<std::size_t>(targets[t])];
  const T norm = average ? T(1) / T(count) : T(1);
  std::vector<int> tg(targets.begin(), targets.end());
  Mask mk(mask.begin(), mask.end());
  return BasicTensor<T>::make_result(
      {}, {total * norm}, op, {logits},
      [logp = std::move(logp), tg = std::move(tg), mk = std::move(mk), norm, m, n](NodeT<T>& out) {
        auto& g = grad_of(out, 0);
        const T up = out.grad[0] * norm;
        for (std::size_t t = 0; t < m; ++t) {
          if (!mk[t]) continue;
          for (std::size_t j = 0; j < n; ++j) g[t * n + j] += up * std::exp(logp[t * n + j]);
          g[t * n + static_cast<std::size_t>(tg[t])] -= up;
        }
      });
}

}  // namespace

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& x) {
  if (x.rank() == 0) throw ShapeError("softmax: scalar input");
  const std::size_t n = x.cols(), m = x.size() / n;
  std::vector<T> y(x.size());
  softmax_rows<T>(x.data(), y, m, n, false);
  std::vector<T> yc = x.requires_grad() ? y : std::vector<T>{};
  return BasicTensor<T>::make_result(x.shape(), std::move(y), "softmax", {x},
                                     [yc = std::move(yc), m, n](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t i = 0; i < m; ++i) {
                                         T dot = 0;
                                         for (std::size_t j = 0; j < n; ++j)
                                           dot += out.grad[i * n + j] * yc[i * n + j];
                                         for (std::size_t j = 0; j < n; ++j)
                                           g[i * n + j] += yc[i * n + j] * (out.grad[i * n + j] - dot);
                                       }
                                     });
}

template <typename T>
BasicTensor<T> log_softmax(const BasicTensor<T>& x) {
  if (x.rank() == 0) throw ShapeError("log_softmax: scalar input");
  const std::size_t n = x.cols(), m = x.size() / n;
  std::vector<T> y(x.size());
  softmax_rows<T>(x.data(), y, m, n, true);
  std::vector<T> yc = x.requires_grad() ? y : std::vector<T>{};
  return BasicTensor<T>::make_result(x.shape(), std::move(y), "log_softmax", {x},
                                     [yc = std::move(yc), m, n](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t i = 0; i < m; ++i) {
                                         T s = 0;
                                         for (std::size_t j = 0; j < n; ++j) s += out.grad[i * n + j];
                                         for (std::size_t j = 0; j < n; ++j)
                                           g[i * n + j] += out.grad[i * n + j] - std::exp(yc[i * n + j]) * s;
                                       }
                                     });
}

template <typename T>
BasicTensor<T> causal_mask(const BasicTensor<T>& scores) {
  require_matrix(scores, "causal_mask");
  const std::size_t t = scores.rows();
  if (scores.cols() != t) {
    throw ShapeError("causal_mask: expected a square matrix, got " +
                     shape_string(scores.shape()));
  }
  std::vector<T> y(scores.data().begin(), scores.data().end());
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = i + 1; j < t; ++j) y[i * t + j] = -std::numeric_limits<T>::infinity();
  return BasicTensor<T>::make_result(scores.shape(), std::move(y), "causal_mask", {scores},
                                     [t](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t i = 0; i < t; ++i)
                                         for (std::size_t j = 0; j <= i; ++j)
                                           g[i * t + j] += out.grad[i * t + j];
                                     });
}

template <typename T>
BasicTensor<T> cross_entropy(const BasicTensor<T>& logits, std::span<const int> targets,
                             std::span<const std::uint8_t> mask) {
  return masked_nll(logits, targets, mask, true, "cross_entropy");
}

template <typename T>
BasicTensor<T> nll_sum(const BasicTensor<T>& logits, std::span<const int> targets,
                       std::span<const std::uint8_t> mask) {
  return masked_nll(logits, targets, mask, false, "nll_sum");
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& a) {
  T s = 0;
  for (T v : a.data()) s += v;
  return BasicTensor<T>::make_result({}, {s}, "sum", {a}, [](NodeT<T>& out) {
    auto& g = grad_of(out, 0);
    for (auto& v : g) v += out.grad[0];
  });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& a) {
  return scale(sum(a), T(1) / T(a.size()));
}

template <typename T>
BasicTensor<T> sum_rows(const BasicTensor<T>& a) {
  require_matrix(a, "sum_rows");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> y(n, T(0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[j] += a.data()[i * n + j];
  return BasicTensor<T>::make_result({1, n}, std::move(y), "sum_rows", {a},
                                     [m, n](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t i = 0; i < m; ++i)
                                         for (std::size_t j = 0; j < n; ++j)
                                           g[i * n + j] += out.grad[j];
                                     });
}

template <typename T>
BasicTensor<T> mean_rows(const BasicTensor<T>& a) {
  require_matrix(a, "mean_rows");
  if (a.rows() == 0) throw ShapeError("mean_rows: no rows");
  return scale(sum_rows(a), T(1) / T(a.rows()));
}

template <typename T>
BasicTensor<T> select_row(const BasicTensor<T>& a, std::size_t row) {
  require_matrix(a, "select_row");
  const std::size_t n = a.cols();
  if (row >= a.rows()) {
    throw ShapeError("select_row: row " + std::to_string(row) + " out of range for " +
                     shape_string(a.shape()));
  }
  std::vector<T> y(a.data().begin() + static_cast<std::ptrdiff_t>(row * n),
                   a.data().begin() + static_cast<std::ptrdiff_t>((row + 1) * n));
  return BasicTensor<T>::make_result({1, n}, std::move(y), "select_row", {a},
                                     [row, n](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t j = 0; j < n; ++j)
                                         g[row * n + j] += out.grad[j];
                                     });
}

template <typename T>
BasicTensor<T> repeat_rows(const BasicTensor<T>& a, std::size_t rows) {
  if (a.rows() != 1) throw ShapeError("repeat_rows: expected one row, got " + shape_string(a.shape()));
  const std::size_t n = a.cols();
  std::vector<T> y(rows * n);
  for (std::size_t i = 0; i < rows; ++i) std::copy_n(a.data().data(), n, y.data() + i * n);
  return BasicTensor<T>::make_result({rows, n}, std::move(y), "repeat_rows", {a},
                                     [rows, n](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t i = 0; i < rows; ++i)
                                         for (std::size_t j = 0; j < n; ++j)
                                           g[j] += out.grad[i * n + j];
                                     });
}

template <typename T>
BasicTensor<T> gather_rows(const BasicTensor<T>& a, std::span<const int> rows) {
  require_matrix(a, "gather_rows");
  const std::size_t n = a.cols();
  std::vector<std::size_t> idx(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= a.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " out of range for " +
                       shape_string(a.shape()));
    }
    idx[i] = static_cast<std::size_t>(rows[i]);
  }
  std::vector<T> y(idx.size() * n);
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(a.data().data() + idx[i] * n, n, y.data() + i * n);
  return BasicTensor<T>::make_result({idx.size(), n}, std::move(y), "gather_rows", {a},
                                     [idx, n](NodeT<T>& out) {
                                       auto& g = grad_of(out, 0);
                                       for (std::size_t i = 0; i < idx.size(); ++i)
                                         for (std::size_t j = 0; j < n; ++j)
                                           g[idx[i] * n + j] += out.grad[i * n + j];
                                     });
}

#define MSIVD_INSTANTIATE_OPS(T)                                                              \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);               \
  template BasicTensor<T> matmul_nt(const BasicTensor<T>&, const BasicTensor<T>&);            \
  template BasicTensor<T> transpose(const BasicTensor<T>&);                                   \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                  \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                    \
  template BasicTensor<T> affine(const BasicTensor<T>&, T, T);                                \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                     \
  template BasicTensor<T> tanh(const BasicTensor<T>&);                                        \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                        \
  template BasicTensor<T> concat_last_dim(const std::vector<BasicTensor<T>>&);                \
  template BasicTensor<T> slice_cols(const BasicTensor<T>&, std::size_t, std::size_t);        \
  template BasicTensor<T> embedding_lookup(const BasicTensor<T>&, std::span<const int>);      \
  template BasicTensor<T> layer_norm(const BasicTensor<T>&, const BasicTensor<T>&,            \
                                     const BasicTensor<T>&, T);                               \
  template BasicTensor<T> softmax(const BasicTensor<T>&);                                     \
  template BasicTensor<T> log_softmax(const BasicTensor<T>&);                                 \
  template BasicTensor<T> causal_mask(const BasicTensor<T>&);                                 \
  template BasicTensor<T> cross_entropy(const BasicTensor<T>&, std::span<const int>,          \
                                        std::span<const std::uint8_t>);                       \
  template BasicTensor<T> nll_sum(const BasicTensor<T>&, std::span<const int>,                \
                                  std::span<const std::uint8_t>);                             \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                         \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                        \
  template BasicTensor<T> sum_rows(const BasicTensor<T>&);                                    \
  template BasicTensor<T> mean_rows(const BasicTensor<T>&);                                   \
  template BasicTensor<T> select_row(const BasicTensor<T>&, std::size_t);                     \
  template BasicTensor<T> repeat_rows(const BasicTensor<T>&, std::size_t);                    \
  template BasicTensor<T> gather_rows(const BasicTensor<T>&, std::span<const int>);

MSIVD_INSTANTIATE_OPS(float)
MSIVD_INSTANTIATE_OPS(double)

}  // namespace msivd::ad
