#pragma once

#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spmamba/common.hpp"

namespace spm {

// Dense row-major tensor node. Tensors are cheap shared handles to nodes;
// the node owns value and gradient storage.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // sized iff requires_grad
  bool requires_grad = false;
  std::string name;
};

template <typename T>
class Tensor {
 public:
  Tensor() : n_(std::make_shared<Node<T>>()) {}

  static Tensor zeros(Shape shape) {
    Tensor t;
    t.n_->shape = std::move(shape);
    t.n_->value.assign(numel(t.n_->shape), T(0));
    return t;
  }

  static Tensor full(Shape shape, T v) {
    Tensor t = zeros(std::move(shape));
    std::fill(t.n_->value.begin(), t.n_->value.end(), v);
    return t;
  }

  static Tensor from(Shape shape, std::vector<T> data) {
    require(numel(shape) == static_cast<int64_t>(data.size()), "tensor",
            "data length " + std::to_string(data.size()) +
                " does not match shape " + shape_str(shape));
    Tensor t;
    t.n_->shape = std::move(shape);
    t.n_->value = std::move(data);
    return t;
  }

  static Tensor scalar(T v) { return from({1}, {v}); }

  const Shape& shape() const { return n_->shape; }
  int64_t size() const { return static_cast<int64_t>(n_->value.size()); }
  int64_t dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(n_->shape.size()); }

  T* data() { return n_->value.data(); }
  const T* data() const { return n_->value.data(); }
  std::vector<T>& values() { return n_->value; }
  const std::vector<T>& values() const { return n_->value; }

  T item() const {
    require(size() == 1, "item", "tensor is not scalar, shape " + shape_str(shape()));
    return n_->value[0];
  }

  bool requires_grad() const { return n_->requires_grad; }
  Tensor& set_requires_grad(bool b) {
    n_->requires_grad = b;
    if (b && n_->grad.size() != n_->value.size()) n_->grad.assign(n_->value.size(), T(0));
    if (!b) n_->grad.clear();
    return *this;
  }

  std::vector<T>& grad() { return n_->grad; }
  const std::vector<T>& grad() const { return n_->grad; }
  void zero_grad() { std::fill(n_->grad.begin(), n_->grad.end(), T(0)); }

  Tensor& set_name(std::string name) {
    n_->name = std::move(name);
    return *this;
  }
  const std::string& name() const { return n_->name; }

  std::shared_ptr<Node<T>> node() const { return n_; }

  // Deep copy of values (grads are not copied).
  Tensor clone() const {
    Tensor t;
    t.n_->shape = n_->shape;
    t.n_->value = n_->value;
    return t;
  }

  bool finite() const {
    for (T v : n_->value)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

 private:
  std::shared_ptr<Node<T>> n_;
};

// Records primitive applications in execution order (which is already a
// topological order) and replays them in reverse on backward(). A tape is
// confined to the thread that created it.
template <typename T>
class Tape {
 public:
  Tape() : prev_(active_) { active_ = this; }
  ~Tape() { active_ = prev_; }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active() { return active_; }

  void record(std::function<void()> fn) { entries_.push_back(std::move(fn)); }

  size_t size() const { return entries_.size(); }

  void backward(const Tensor<T>& loss) {
    require(loss.size() == 1, "backward", "loss must be scalar, got shape " + shape_str(loss.shape()));
    if (consumed_) throw ValueError("backward: tape already consumed");
    consumed_ = true;
    if (loss.requires_grad()) {
      auto n = loss.node();
      n->grad[0] += T(1);
    }
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
  }

 private:
  std::vector<std::function<void()>> entries_;
  bool consumed_ = false;
  Tape* prev_ = nullptr;
  static thread_local Tape* active_;
};

template <typename T>
thread_local Tape<T>* Tape<T>::active_ = nullptr;

namespace detail {

template <typename T>
bool tracing(std::initializer_list<const Tensor<T>*> ins) {
  if (!Tape<T>::active()) return false;
  for (auto* t : ins)
    if (t->requires_grad()) return true;
  return false;
}

template <typename T>
void mark_output(Tensor<T>& out) {
  out.set_requires_grad(true);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise primitives
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "add",
          "shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  const T* pa = a.data();
  const T* pb = b.data();
  T* po = out.data();
  for (int64_t i = 0; i < a.size(); ++i) po[i] = pa[i] + pb[i];
  if (detail::tracing<T>({&a, &b})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), bn = b.node(), on = out.node()] {
      const size_t n = on->grad.size();
      if (an->requires_grad)
        for (size_t i = 0; i < n; ++i) an->grad[i] += on->grad[i];
      if (bn->requires_grad)
        for (size_t i = 0; i < n; ++i) bn->grad[i] += on->grad[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "sub",
          "shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  if (detail::tracing<T>({&a, &b})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), bn = b.node(), on = out.node()] {
      const size_t n = on->grad.size();
      if (an->requires_grad)
        for (size_t i = 0; i < n; ++i) an->grad[i] += on->grad[i];
      if (bn->requires_grad)
        for (size_t i = 0; i < n; ++i) bn->grad[i] -= on->grad[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mul",
          "shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  if (detail::tracing<T>({&a, &b})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), bn = b.node(), on = out.node()] {
      const size_t n = on->grad.size();
      if (an->requires_grad)
        for (size_t i = 0; i < n; ++i) an->grad[i] += on->grad[i] * bn->value[i];
      if (bn->requires_grad)
        for (size_t i = 0; i < n; ++i) bn->grad[i] += on->grad[i] * an->value[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> scalar_mul(const Tensor<T>& a, T c) {
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * c;
  if (detail::tracing<T>({&a})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), on = out.node(), c] {
      for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * c;
    });
  }
  return out;
}

namespace detail {
template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) {
    const T e = std::exp(-x);
    return T(1) / (T(1) + e);
  }
  const T e = std::exp(x);
  return e / (T(1) + e);
}
}  // namespace detail

template <typename T>
Tensor<T> silu(const Tensor<T>& a) {
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) {
    const T x = a.data()[i];
    out.data()[i] = x * detail::sigmoid(x);
  }
  if (detail::tracing<T>({&a})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), on = out.node()] {
      for (size_t i = 0; i < on->grad.size(); ++i) {
        const T x = an->value[i];
        const T s = detail::sigmoid(x);
        an->grad[i] += on->grad[i] * (s * (T(1) + x * (T(1) - s)));
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> exp_op(const Tensor<T>& a) {
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out.data()[i] = std::exp(a.data()[i]);
  if (detail::tracing<T>({&a})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), on = out.node()] {
      for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * on->value[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> softplus(const Tensor<T>& a) {
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) {
    const T x = a.data()[i];
    out.data()[i] = x > T(20) ? x : std::log1p(std::exp(x));
  }
  if (detail::tracing<T>({&a})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), on = out.node()] {
      for (size_t i = 0; i < on->grad.size(); ++i)
        an->grad[i] += on->grad[i] * detail::sigmoid(an->value[i]);
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.ndim() == 2 && b.ndim() == 2, "matmul",
          "expects 2-d operands, got " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  require(b.dim(0) == k, "matmul",
          "inner dims differ: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  Tensor<T> out = Tensor<T>::zeros({m, n});
  const T* pa = a.data();
  const T* pb = b.data();
  T* po = out.data();
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t kk = 0; kk < k; ++kk) {
      const T av = pa[i * k + kk];
      if (av == T(0)) continue;
      const T* brow = pb + kk * n;
      T* orow = po + i * n;
      for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  if (detail::tracing<T>({&a, &b})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), bn = b.node(), on = out.node(), m, k, n] {
      if (an->requires_grad) {
        // ga = go . b^T
        for (int64_t i = 0; i < m; ++i)
          for (int64_t j = 0; j < n; ++j) {
            const T g = on->grad[i * n + j];
            if (g == T(0)) continue;
            for (int64_t kk = 0; kk < k; ++kk) an->grad[i * k + kk] += g * bn->value[kk * n + j];
          }
      }
      if (bn->requires_grad) {
        // gb = a^T . go
        for (int64_t i = 0; i < m; ++i)
          for (int64_t kk = 0; kk < k; ++kk) {
            const T av = an->value[i * k + kk];
            if (av == T(0)) continue;
            for (int64_t j = 0; j < n; ++j) bn->grad[kk * n + j] += av * on->grad[i * n + j];
          }
      }
    });
  }
  return out;
}

// 2-d convolution on a single sample: x (Cin,H,W), w (Cout,Cin,kh,kw),
// optional bias (Cout). Output (Cout,H',W') with H' = (H+2p-kh)/s + 1.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias,
                 int stride, int pad) {
  require(x.ndim() == 3 && w.ndim() == 4, "conv2d",
          "expects x(Cin,H,W), w(Cout,Cin,kh,kw), got " + shape_str(x.shape()) + " and " +
              shape_str(w.shape()));
  const int64_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const int64_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  require(w.dim(1) == cin, "conv2d",
          "weight in-channels " + std::to_string(w.dim(1)) + " vs input channels " +
              std::to_string(cin));
  require(stride >= 1 && pad >= 0, "conv2d", "stride must be >=1 and pad >=0");
  const int64_t oh = (h + 2 * pad - kh) / stride + 1;
  const int64_t ow = (wd + 2 * pad - kw) / stride + 1;
  require(oh >= 1 && ow >= 1, "conv2d",
          "kernel " + shape_str(w.shape()) + " larger than padded input " + shape_str(x.shape()));
  if (bias)
    require(bias->ndim() == 1 && bias->dim(0) == cout, "conv2d",
            "bias shape " + shape_str(bias->shape()) + " vs out channels " + std::to_string(cout));

  Tensor<T> out = Tensor<T>::zeros({cout, oh, ow});
  const T* px = x.data();
  const T* pw = w.data();
  T* po = out.data();
  for (int64_t co = 0; co < cout; ++co) {
    const T b = bias ? bias->data()[co] : T(0);
    for (int64_t oy = 0; oy < oh; ++oy) {
      for (int64_t ox = 0; ox < ow; ++ox) {
        T acc = b;
        const int64_t iy0 = oy * stride - pad;
        const int64_t ix0 = ox * stride - pad;
        for (int64_t ci = 0; ci < cin; ++ci) {
          const T* xp = px + ci * h * wd;
          const T* wp = pw + ((co * cin + ci) * kh) * kw;
          for (int64_t ky = 0; ky < kh; ++ky) {
            const int64_t iy = iy0 + ky;
            if (iy < 0 || iy >= h) continue;
            for (int64_t kx = 0; kx < kw; ++kx) {
              const int64_t ix = ix0 + kx;
              if (ix < 0 || ix >= wd) continue;
              acc += xp[iy * wd + ix] * wp[ky * kw + kx];
            }
          }
        }
        po[(co * oh + oy) * ow + ox] = acc;
      }
    }
  }
  const Tensor<T> bdummy;
  const bool has_bias = bias != nullptr;
  auto bias_node = has_bias ? bias->node() : nullptr;
  bool trace = detail::tracing<T>({&x, &w}) ||
               (has_bias && Tape<T>::active() && bias->requires_grad());
  if (trace) {
    detail::mark_output(out);
    Tape<T>::active()->record([xn = x.node(), wn = w.node(), bn = bias_node, on = out.node(),
                               cin, h, wd, cout, kh, kw, oh, ow, stride, pad] {
      for (int64_t co = 0; co < cout; ++co) {
        for (int64_t oy = 0; oy < oh; ++oy) {
          for (int64_t ox = 0; ox < ow; ++ox) {
            const T g = on->grad[(co * oh + oy) * ow + ox];
            if (g == T(0)) continue;
            if (bn && bn->requires_grad) bn->grad[co] += g;
            const int64_t iy0 = oy * stride - pad;
            const int64_t ix0 = ox * stride - pad;
            for (int64_t ci = 0; ci < cin; ++ci) {
              for (int64_t ky = 0; ky < kh; ++ky) {
                const int64_t iy = iy0 + ky;
                if (iy < 0 || iy >= h) continue;
                for (int64_t kx = 0; kx < kw; ++kx) {
                  const int64_t ix = ix0 + kx;
                  if (ix < 0 || ix >= wd) continue;
                  const int64_t xi = (ci * h + iy) * wd + ix;
                  const int64_t wi = ((co * cin + ci) * kh + ky) * kw + kx;
                  if (xn->requires_grad) xn->grad[xi] += g * wn->value[wi];
                  if (wn->requires_grad) wn->grad[wi] += g * xn->value[xi];
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias,
                 int stride, int pad) {
  return conv2d(x, w, &bias, stride, pad);
}

// Depthwise causal 1-d convolution over a sequence x (L,D) with kernel
// w (D,k): output[l,d] = sum_j w[d,j] * x[l-(k-1)+j, d], zero before t=0.
template <typename T>
Tensor<T> depthwise_conv1d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias) {
  require(x.ndim() == 2 && w.ndim() == 2, "depthwise-conv1d",
          "expects x(L,D), w(D,k), got " + shape_str(x.shape()) + " and " + shape_str(w.shape()));
  const int64_t L = x.dim(0), D = x.dim(1), k = w.dim(1);
  require(w.dim(0) == D, "depthwise-conv1d",
          "kernel channels " + std::to_string(w.dim(0)) + " vs input channels " + std::to_string(D));
  if (bias)
    require(bias->ndim() == 1 && bias->dim(0) == D, "depthwise-conv1d",
            "bias shape " + shape_str(bias->shape()));
  Tensor<T> out = Tensor<T>::zeros({L, D});
  for (int64_t l = 0; l < L; ++l) {
    for (int64_t d = 0; d < D; ++d) {
      T acc = bias ? bias->data()[d] : T(0);
      for (int64_t j = 0; j < k; ++j) {
        const int64_t t = l - (k - 1) + j;
        if (t < 0) continue;
        acc += w.data()[d * k + j] * x.data()[t * D + d];
      }
      out.data()[l * D + d] = acc;
    }
  }
  auto bias_node = bias ? bias->node() : nullptr;
  bool trace = detail::tracing<T>({&x, &w}) ||
               (bias && Tape<T>::active() && bias->requires_grad());
  if (trace) {
    detail::mark_output(out);
    Tape<T>::active()->record([xn = x.node(), wn = w.node(), bn = bias_node, on = out.node(), L, D, k] {
      for (int64_t l = 0; l < L; ++l) {
        for (int64_t d = 0; d < D; ++d) {
          const T g = on->grad[l * D + d];
          if (g == T(0)) continue;
          if (bn && bn->requires_grad) bn->grad[d] += g;
          for (int64_t j = 0; j < k; ++j) {
            const int64_t t = l - (k - 1) + j;
            if (t < 0) continue;
            if (xn->requires_grad) xn->grad[t * D + d] += g * wn->value[d * k + j];
            if (wn->requires_grad) wn->grad[d * k + j] += g * xn->value[t * D + d];
          }
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization / reductions
// ---------------------------------------------------------------------------

// Row-wise layer norm over the last dim: x (N,D), gamma (D), beta (D).
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  require(x.ndim() == 2, "layer-norm", "expects x(N,D), got " + shape_str(x.shape()));
  const int64_t N = x.dim(0), D = x.dim(1);
  require(gamma.ndim() == 1 && gamma.dim(0) == D && beta.ndim() == 1 && beta.dim(0) == D,
          "layer-norm", "gamma/beta must be (D) with D=" + std::to_string(D));
  Tensor<T> out = Tensor<T>::zeros({N, D});
  std::vector<T> inv_std(static_cast<size_t>(N));
  std::vector<T> mean(static_cast<size_t>(N));
  for (int64_t i = 0; i < N; ++i) {
    const T* row = x.data() + i * D;
    T mu = T(0);
    for (int64_t j = 0; j < D; ++j) mu += row[j];
    mu /= T(D);
    T var = T(0);
    for (int64_t j = 0; j < D; ++j) {
      const T d = row[j] - mu;
      var += d * d;
    }
    var /= T(D);
    const T is = T(1) / std::sqrt(var + eps);
    mean[static_cast<size_t>(i)] = mu;
    inv_std[static_cast<size_t>(i)] = is;
    for (int64_t j = 0; j < D; ++j)
      out.data()[i * D + j] = (row[j] - mu) * is * gamma.data()[j] + beta.data()[j];
  }
  if (detail::tracing<T>({&x, &gamma, &beta})) {
    detail::mark_output(out);
    Tape<T>::active()->record([xn = x.node(), gn = gamma.node(), bn = beta.node(),
                               on = out.node(), mean = std::move(mean),
                               inv_std = std::move(inv_std), N, D] {
      for (int64_t i = 0; i < N; ++i) {
        const T mu = mean[static_cast<size_t>(i)];
        const T is = inv_std[static_cast<size_t>(i)];
        T sum_gdy = T(0), sum_gdy_xhat = T(0);
        for (int64_t j = 0; j < D; ++j) {
          const T xhat = (xn->value[i * D + j] - mu) * is;
          const T gdy = on->grad[i * D + j] * gn->value[j];
          sum_gdy += gdy;
          sum_gdy_xhat += gdy * xhat;
          if (gn->requires_grad) gn->grad[j] += on->grad[i * D + j] * xhat;
          if (bn->requires_grad) bn->grad[j] += on->grad[i * D + j];
        }
        if (xn->requires_grad) {
          for (int64_t j = 0; j < D; ++j) {
            const T xhat = (xn->value[i * D + j] - mu) * is;
            const T gdy = on->grad[i * D + j] * gn->value[j];
            xn->grad[i * D + j] += is * (gdy - sum_gdy / T(D) - xhat * sum_gdy_xhat / T(D));
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& a) {
  T s = T(0);
  for (int64_t i = 0; i < a.size(); ++i) s += a.data()[i];
  Tensor<T> out = Tensor<T>::scalar(s);
  if (detail::tracing<T>({&a})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), on = out.node()] {
      const T g = on->grad[0];
      for (size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& a) {
  require(a.size() > 0, "mean", "empty tensor");
  T s = T(0);
  for (int64_t i = 0; i < a.size(); ++i) s += a.data()[i];
  const T inv = T(1) / T(a.size());
  Tensor<T> out = Tensor<T>::scalar(s * inv);
  if (detail::tracing<T>({&a})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), on = out.node(), inv] {
      const T g = on->grad[0] * inv;
      for (size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> mse(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mse",
          "shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  T s = T(0);
  for (int64_t i = 0; i < a.size(); ++i) {
    const T d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  const T inv = T(1) / T(a.size());
  Tensor<T> out = Tensor<T>::scalar(s * inv);
  if (detail::tracing<T>({&a, &b})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), bn = b.node(), on = out.node(), inv] {
      const T g = on->grad[0] * T(2) * inv;
      for (size_t i = 0; i < an->value.size(); ++i) {
        const T d = an->value[i] - bn->value[i];
        if (an->requires_grad) an->grad[i] += g * d;
        if (bn->requires_grad) bn->grad[i] -= g * d;
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape new_shape) {
  require(numel(new_shape) == a.size(), "reshape",
          "cannot reshape " + shape_str(a.shape()) + " to " + shape_str(new_shape));
  Tensor<T> out = Tensor<T>::from(std::move(new_shape), a.values());
  if (detail::tracing<T>({&a})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), on = out.node()] {
      for (size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += on->grad[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> transpose2d(const Tensor<T>& a) {
  require(a.ndim() == 2, "transpose", "expects 2-d, got " + shape_str(a.shape()));
  const int64_t m = a.dim(0), n = a.dim(1);
  Tensor<T> out = Tensor<T>::zeros({n, m});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) out.data()[j * m + i] = a.data()[i * n + j];
  if (detail::tracing<T>({&a})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), on = out.node(), m, n] {
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) an->grad[i * n + j] += on->grad[j * m + i];
    });
  }
  return out;
}

// out[i,:] = x[idx[i],:]. Indices may repeat (used for nearest upsampling
// as well as scan reordering).
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& x, const std::vector<int64_t>& idx) {
  require(x.ndim() == 2, "gather-by-order", "expects 2-d, got " + shape_str(x.shape()));
  const int64_t L = x.dim(0), D = x.dim(1);
  const int64_t m = static_cast<int64_t>(idx.size());
  for (int64_t i : idx)
    require(i >= 0 && i < L, "gather-by-order", "index " + std::to_string(i) + " out of range");
  Tensor<T> out = Tensor<T>::zeros({m, D});
  for (int64_t i = 0; i < m; ++i)
    std::memcpy(out.data() + i * D, x.data() + idx[static_cast<size_t>(i)] * D,
                sizeof(T) * static_cast<size_t>(D));
  if (detail::tracing<T>({&x})) {
    detail::mark_output(out);
    Tape<T>::active()->record([xn = x.node(), on = out.node(), idx, m, D] {
      for (int64_t i = 0; i < m; ++i) {
        const int64_t r = idx[static_cast<size_t>(i)];
        for (int64_t j = 0; j < D; ++j) xn->grad[r * D + j] += on->grad[i * D + j];
      }
    });
  }
  return out;
}

// out[idx[i],:] = x[i,:]. idx must be a permutation of 0..L-1 so that
// scatter with the inverse order undoes gather exactly.
template <typename T>
Tensor<T> scatter_rows(const Tensor<T>& x, const std::vector<int64_t>& idx) {
  require(x.ndim() == 2, "scatter-by-order", "expects 2-d, got " + shape_str(x.shape()));
  const int64_t L = x.dim(0), D = x.dim(1);
  require(static_cast<int64_t>(idx.size()) == L, "scatter-by-order",
          "order length " + std::to_string(idx.size()) + " vs rows " + std::to_string(L));
  Tensor<T> out = Tensor<T>::zeros({L, D});
  for (int64_t i = 0; i < L; ++i) {
    const int64_t r = idx[static_cast<size_t>(i)];
    require(r >= 0 && r < L, "scatter-by-order", "index " + std::to_string(r) + " out of range");
    std::memcpy(out.data() + r * D, x.data() + i * D, sizeof(T) * static_cast<size_t>(D));
  }
  if (detail::tracing<T>({&x})) {
    detail::mark_output(out);
    Tape<T>::active()->record([xn = x.node(), on = out.node(), idx, L, D] {
      for (int64_t i = 0; i < L; ++i) {
        const int64_t r = idx[static_cast<size_t>(i)];
        for (int64_t j = 0; j < D; ++j) xn->grad[i * D + j] += on->grad[r * D + j];
      }
    });
  }
  return out;
}

// Repeats a vector v (D) into (n,D) rows; the linear-layer bias path.
template <typename T>
Tensor<T> broadcast_rows(const Tensor<T>& v, int64_t n) {
  require(v.ndim() == 1, "broadcast-rows", "expects 1-d, got " + shape_str(v.shape()));
  const int64_t D = v.dim(0);
  Tensor<T> out = Tensor<T>::zeros({n, D});
  for (int64_t i = 0; i < n; ++i)
    std::memcpy(out.data() + i * D, v.data(), sizeof(T) * static_cast<size_t>(D));
  if (detail::tracing<T>({&v})) {
    detail::mark_output(out);
    Tape<T>::active()->record([vn = v.node(), on = out.node(), n, D] {
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < D; ++j) vn->grad[j] += on->grad[i * D + j];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spatial resampling
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> avg_pool2x2(const Tensor<T>& x) {
  require(x.ndim() == 3, "avg-pool2x2", "expects (C,H,W), got " + shape_str(x.shape()));
  const int64_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  require(H % 2 == 0 && W % 2 == 0, "avg-pool2x2", "H and W must be even, got " + shape_str(x.shape()));
  const int64_t oh = H / 2, ow = W / 2;
  Tensor<T> out = Tensor<T>::zeros({C, oh, ow});
  for (int64_t c = 0; c < C; ++c)
    for (int64_t y = 0; y < oh; ++y)
      for (int64_t xw = 0; xw < ow; ++xw) {
        const T* p = x.data() + (c * H + 2 * y) * W + 2 * xw;
        out.data()[(c * oh + y) * ow + xw] = (p[0] + p[1] + p[W] + p[W + 1]) * T(0.25);
      }
  if (detail::tracing<T>({&x})) {
    detail::mark_output(out);
    Tape<T>::active()->record([xn = x.node(), on = out.node(), C, H, W, oh, ow] {
      for (int64_t c = 0; c < C; ++c)
        for (int64_t y = 0; y < oh; ++y)
          for (int64_t xw = 0; xw < ow; ++xw) {
            const T g = on->grad[(c * oh + y) * ow + xw] * T(0.25);
            T* p = xn->grad.data() + (c * H + 2 * y) * W + 2 * xw;
            p[0] += g;
            p[1] += g;
            p[W] += g;
            p[W + 1] += g;
          }
    });
  }
  return out;
}

template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& x) {
  require(x.ndim() == 3, "upsample-nearest2x", "expects (C,H,W), got " + shape_str(x.shape()));
  const int64_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  Tensor<T> out = Tensor<T>::zeros({C, 2 * H, 2 * W});
  for (int64_t c = 0; c < C; ++c)
    for (int64_t y = 0; y < H; ++y)
      for (int64_t xw = 0; xw < W; ++xw) {
        const T v = x.data()[(c * H + y) * W + xw];
        T* p = out.data() + (c * 2 * H + 2 * y) * 2 * W + 2 * xw;
        p[0] = v;
        p[1] = v;
        p[2 * W] = v;
        p[2 * W + 1] = v;
      }
  if (detail::tracing<T>({&x})) {
    detail::mark_output(out);
    Tape<T>::active()->record([xn = x.node(), on = out.node(), C, H, W] {
      for (int64_t c = 0; c < C; ++c)
        for (int64_t y = 0; y < H; ++y)
          for (int64_t xw = 0; xw < W; ++xw) {
            const T* p = on->grad.data() + (c * 2 * H + 2 * y) * 2 * W + 2 * xw;
            xn->grad[(c * H + y) * W + xw] += p[0] + p[1] + p[2 * W] + p[2 * W + 1];
          }
    });
  }
  return out;
}

namespace detail {
// Half-pixel-center source coordinates, clamped at the borders. Returns the
// two source indices and the weight of the second one.
inline void bilinear_axis(int64_t out_i, int64_t out_n, int64_t in_n, int64_t& i0, int64_t& i1,
                          double& w1) {
  const double scale = static_cast<double>(in_n) / static_cast<double>(out_n);
  double src = (static_cast<double>(out_i) + 0.5) * scale - 0.5;
  if (src < 0) src = 0;
  if (src > static_cast<double>(in_n - 1)) src = static_cast<double>(in_n - 1);
  i0 = static_cast<int64_t>(src);
  if (i0 > in_n - 2) i0 = in_n >= 2 ? in_n - 2 : 0;
  i1 = in_n >= 2 ? i0 + 1 : i0;
  w1 = src - static_cast<double>(i0);
}
}  // namespace detail

// Bilinear upsampling of a single-channel map (h,w) -> (H,W).
template <typename T>
Tensor<T> bilinear_upsample(const Tensor<T>& x, int64_t H, int64_t W) {
  require(x.ndim() == 2, "bilinear-upsample", "expects (h,w), got " + shape_str(x.shape()));
  const int64_t h = x.dim(0), w = x.dim(1);
  require(H >= h && W >= w && H % h == 0 && W % w == 0, "bilinear-upsample",
          "target " + std::to_string(H) + "x" + std::to_string(W) +
              " must be an integer multiple of " + shape_str(x.shape()));
  Tensor<T> out = Tensor<T>::zeros({H, W});
  for (int64_t y = 0; y < H; ++y) {
    int64_t y0, y1;
    double wy;
    detail::bilinear_axis(y, H, h, y0, y1, wy);
    for (int64_t xw = 0; xw < W; ++xw) {
      int64_t x0, x1;
      double wx;
      detail::bilinear_axis(xw, W, w, x0, x1, wx);
      const double v = (1 - wy) * ((1 - wx) * x.data()[y0 * w + x0] + wx * x.data()[y0 * w + x1]) +
                       wy * ((1 - wx) * x.data()[y1 * w + x0] + wx * x.data()[y1 * w + x1]);
      out.data()[y * W + xw] = static_cast<T>(v);
    }
  }
  if (detail::tracing<T>({&x})) {
    detail::mark_output(out);
    Tape<T>::active()->record([xn = x.node(), on = out.node(), H, W, h, w] {
      for (int64_t y = 0; y < H; ++y) {
        int64_t y0, y1;
        double wy;
        detail::bilinear_axis(y, H, h, y0, y1, wy);
        for (int64_t xw = 0; xw < W; ++xw) {
          int64_t x0, x1;
          double wx;
          detail::bilinear_axis(xw, W, w, x0, x1, wx);
          const T g = on->grad[y * W + xw];
          xn->grad[y0 * w + x0] += g * static_cast<T>((1 - wy) * (1 - wx));
          xn->grad[y0 * w + x1] += g * static_cast<T>((1 - wy) * wx);
          xn->grad[y1 * w + x0] += g * static_cast<T>(wy * (1 - wx));
          xn->grad[y1 * w + x1] += g * static_cast<T>(wy * wx);
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Similarity
// ---------------------------------------------------------------------------

// Row-wise cosine similarity of a (N,D) and b (N,D) -> (N). A zero row on
// either side yields similarity 0 with zero gradient.
template <typename T>
Tensor<T> cosine_rows(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape() && a.ndim() == 2, "cosine-similarity",
          "expects matching (N,D), got " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const int64_t N = a.dim(0), D = a.dim(1);
  Tensor<T> out = Tensor<T>::zeros({N});
  for (int64_t i = 0; i < N; ++i) {
    const T* pa = a.data() + i * D;
    const T* pb = b.data() + i * D;
    T dot = T(0), na = T(0), nb = T(0);
    for (int64_t j = 0; j < D; ++j) {
      dot += pa[j] * pb[j];
      na += pa[j] * pa[j];
      nb += pb[j] * pb[j];
    }
    out.data()[i] = (na == T(0) || nb == T(0)) ? T(0) : dot / (std::sqrt(na) * std::sqrt(nb));
  }
  if (detail::tracing<T>({&a, &b})) {
    detail::mark_output(out);
    Tape<T>::active()->record([an = a.node(), bn = b.node(), on = out.node(), N, D] {
      for (int64_t i = 0; i < N; ++i) {
        const T g = on->grad[i];
        if (g == T(0)) continue;
        const T* pa = an->value.data() + i * D;
        const T* pb = bn->value.data() + i * D;
        T dot = T(0), na2 = T(0), nb2 = T(0);
        for (int64_t j = 0; j < D; ++j) {
          dot += pa[j] * pb[j];
          na2 += pa[j] * pa[j];
          nb2 += pb[j] * pb[j];
        }
        if (na2 == T(0) || nb2 == T(0)) continue;
        const T na = std::sqrt(na2), nb = std::sqrt(nb2);
        const T c = dot / (na * nb);
        for (int64_t j = 0; j < D; ++j) {
          if (an->requires_grad)
            an->grad[i * D + j] += g * (pb[j] / (na * nb) - c * pa[j] / na2);
          if (bn->requires_grad)
            bn->grad[i * D + j] += g * (pa[j] / (na * nb) - c * pb[j] / nb2);
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite differences (the shared gradient oracle)
// ---------------------------------------------------------------------------

// Central-difference gradient of a scalar function at `point`.
template <typename T>
std::vector<T> finite_diff_grad(const std::function<T(const std::vector<T>&)>& f,
                                std::vector<T> point, T step) {
  require(step > T(0), "finite-diff", "step must be positive");
  std::vector<T> g(point.size());
  for (size_t i = 0; i < point.size(); ++i) {
    const T x0 = point[i];
    point[i] = x0 + step;
    const T fp = f(point);
    point[i] = x0 - step;
    const T fm = f(point);
    point[i] = x0;
    if (!std::isfinite(static_cast<double>(fp)) || !std::isfinite(static_cast<double>(fm)))
      throw ValueError("finite-diff: non-finite function value at probe point");
    g[i] = (fp - fm) / (T(2) * step);
  }
  return g;
}

}  // namespace spm
