#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sedil/tensor.hpp"

namespace sedil {

enum class Padding { kSame, kValid };

// ---------------------------------------------------------------------------
// conv2d, stride 1. Cross-correlation (no kernel flip). "same" zero-padding
// keeps H and W and requires odd kernels.
// x: [B, C_in, H, W]  w: [C_out, C_in, kH, kW]  b: [C_out]
// ---------------------------------------------------------------------------

template <typename T>
struct Conv2dGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

namespace detail {

template <typename T>
void conv2d_check(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                  Padding padding, int& pad_h, int& pad_w, int& out_h, int& out_w) {
  if (x.ndim() != 4 || w.ndim() != 4 || b.ndim() != 1)
    throw ShapeError("conv2d expects x[B,C,H,W], w[Co,Ci,kH,kW], b[Co], got x=" +
                     shape_str(x.shape()) + " w=" + shape_str(w.shape()) +
                     " b=" + shape_str(b.shape()));
  if (x.dim(1) != w.dim(1))
    throw ShapeError("conv2d input channels " + std::to_string(x.dim(1)) +
                     " do not match weight C_in " + std::to_string(w.dim(1)));
  if (b.dim(0) != w.dim(0))
    throw ShapeError("conv2d bias length " + std::to_string(b.dim(0)) +
                     " does not match weight C_out " + std::to_string(w.dim(0)));
  const int kh = w.dim(2), kw = w.dim(3);
  if (padding == Padding::kSame) {
    if (kh % 2 == 0 || kw % 2 == 0)
      throw ShapeError("conv2d same-padding requires odd kernel, got " + shape_str(w.shape()));
    pad_h = (kh - 1) / 2;
    pad_w = (kw - 1) / 2;
    out_h = x.dim(2);
    out_w = x.dim(3);
  } else {
    pad_h = pad_w = 0;
    out_h = x.dim(2) - kh + 1;
    out_w = x.dim(3) - kw + 1;
    if (out_h < 1 || out_w < 1)
      throw ShapeError("conv2d kernel " + shape_str(w.shape()) + " does not fit input " +
                       shape_str(x.shape()) + " with valid padding");
  }
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                         Padding padding = Padding::kSame) {
  int pad_h, pad_w, oh, ow;
  detail::conv2d_check(x, w, b, padding, pad_h, pad_w, oh, ow);
  const int B = x.dim(0), ci_n = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int co_n = w.dim(0), kh_n = w.dim(2), kw_n = w.dim(3);

  Tensor<T> y({B, co_n, oh, ow});
  const T* xp = x.data();
  const T* wp = w.data();
  T* yp = y.data();

  for (int bi = 0; bi < B; ++bi) {
    for (int co = 0; co < co_n; ++co) {
      T* out_plane = yp + (static_cast<long long>(bi) * co_n + co) * oh * ow;
      const T bias_v = b[co];
      for (int i = 0; i < oh * ow; ++i) out_plane[i] = bias_v;
      for (int ci = 0; ci < ci_n; ++ci) {
        const T* in_plane = xp + (static_cast<long long>(bi) * ci_n + ci) * H * W;
        const T* wk = wp + ((static_cast<long long>(co) * ci_n + ci) * kh_n) * kw_n;
        for (int kh = 0; kh < kh_n; ++kh) {
          for (int kw = 0; kw < kw_n; ++kw) {
            const T wv = wk[kh * kw_n + kw];
            for (int h = 0; h < oh; ++h) {
              const int ih = h + kh - pad_h;
              if (ih < 0 || ih >= H) continue;
              // valid output columns for this kernel column
              const int w_lo = std::max(0, pad_w - kw);
              const int w_hi = std::min(ow, W + pad_w - kw);
              const T* in_row = in_plane + ih * W + (w_lo + kw - pad_w);
              T* out_row = out_plane + h * ow + w_lo;
              for (int wi = 0; wi < w_hi - w_lo; ++wi) out_row[wi] += wv * in_row[wi];
            }
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                               const Tensor<T>& w, Padding padding = Padding::kSame) {
  int pad_h, pad_w, oh, ow;
  detail::conv2d_check(x, w, Tensor<T>({w.dim(0)}), padding, pad_h, pad_w, oh, ow);
  if (grad_out.ndim() != 4 || grad_out.dim(0) != x.dim(0) || grad_out.dim(1) != w.dim(0) ||
      grad_out.dim(2) != oh || grad_out.dim(3) != ow)
    throw ShapeError("conv2d_backward grad_out " + shape_str(grad_out.shape()) +
                     " does not match forward output shape");

  const int B = x.dim(0), ci_n = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int co_n = w.dim(0), kh_n = w.dim(2), kw_n = w.dim(3);

  Conv2dGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(w.shape()), Tensor<T>({co_n})};
  const T* xp = x.data();
  const T* wp = w.data();
  const T* gop = grad_out.data();

  for (int bi = 0; bi < B; ++bi) {
    for (int co = 0; co < co_n; ++co) {
      const T* go_plane = gop + (static_cast<long long>(bi) * co_n + co) * oh * ow;
      T gb_acc = 0;
      for (int i = 0; i < oh * ow; ++i) gb_acc += go_plane[i];
      g.bias[co] += gb_acc;
      for (int ci = 0; ci < ci_n; ++ci) {
        const T* in_plane = xp + (static_cast<long long>(bi) * ci_n + ci) * H * W;
        T* gx_plane = g.input.data() + (static_cast<long long>(bi) * ci_n + ci) * H * W;
        const T* wk = wp + ((static_cast<long long>(co) * ci_n + ci) * kh_n) * kw_n;
        T* gwk = g.weights.data() + ((static_cast<long long>(co) * ci_n + ci) * kh_n) * kw_n;
        for (int kh = 0; kh < kh_n; ++kh) {
          for (int kw = 0; kw < kw_n; ++kw) {
            const T wv = wk[kh * kw_n + kw];
            T gw_acc = 0;
            for (int h = 0; h < oh; ++h) {
              const int ih = h + kh - pad_h;
              if (ih < 0 || ih >= H) continue;
              const int w_lo = std::max(0, pad_w - kw);
              const int w_hi = std::min(ow, W + pad_w - kw);
              const T* in_row = in_plane + ih * W + (w_lo + kw - pad_w);
              T* gx_row = gx_plane + ih * W + (w_lo + kw - pad_w);
              const T* go_row = go_plane + h * ow + w_lo;
              for (int wi = 0; wi < w_hi - w_lo; ++wi) {
                gw_acc += go_row[wi] * in_row[wi];
                gx_row[wi] += wv * go_row[wi];
              }
            }
            gwk[kh * kw_n + kw] += gw_acc;
          }
        }
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// maxpool2d. H % pool_h == 0 and W % pool_w == 0 are required. Ties go to the
// first element in row-major window order, which keeps backward deterministic.
// ---------------------------------------------------------------------------

template <typename T>
struct MaxPoolOut {
  Tensor<T> output;
  std::vector<int> argmax;  // per output cell: h*W + w within its input plane
};

template <typename T>
MaxPoolOut<T> maxpool2d_forward(const Tensor<T>& x, int pool_h, int pool_w) {
  if (x.ndim() != 4)
    throw ShapeError("maxpool2d expects x[B,C,H,W], got " + shape_str(x.shape()));
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (pool_h < 1 || pool_w < 1 || H % pool_h != 0 || W % pool_w != 0)
    throw ShapeError("maxpool2d input " + shape_str(x.shape()) + " not divisible by pool " +
                     std::to_string(pool_h) + "x" + std::to_string(pool_w));
  const int oh = H / pool_h, ow = W / pool_w;

  MaxPoolOut<T> r{Tensor<T>({B, C, oh, ow}), {}};
  r.argmax.assign(static_cast<size_t>(B) * C * oh * ow, 0);
  const T* xp = x.data();
  T* yp = r.output.data();

  long long o = 0;
  for (int bc = 0; bc < B * C; ++bc) {
    const T* plane = xp + static_cast<long long>(bc) * H * W;
    for (int h = 0; h < oh; ++h) {
      for (int w = 0; w < ow; ++w, ++o) {
        T best = plane[(h * pool_h) * W + w * pool_w];
        int best_idx = (h * pool_h) * W + w * pool_w;
        for (int ph = 0; ph < pool_h; ++ph) {
          for (int pw = 0; pw < pool_w; ++pw) {
            const int idx = (h * pool_h + ph) * W + w * pool_w + pw;
            if (plane[idx] > best) {
              best = plane[idx];
              best_idx = idx;
            }
          }
        }
        yp[o] = best;
        r.argmax[static_cast<size_t>(o)] = best_idx;
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool2d_backward(const Tensor<T>& grad_out, const std::vector<int>& argmax,
                             const std::vector<int>& input_shape) {
  if (input_shape.size() != 4)
    throw ShapeError("maxpool2d_backward needs a 4D input shape");
  const int B = input_shape[0], C = input_shape[1], H = input_shape[2], W = input_shape[3];
  if (grad_out.ndim() != 4 || grad_out.dim(0) != B || grad_out.dim(1) != C ||
      static_cast<size_t>(grad_out.size()) != argmax.size())
    throw ShapeError("maxpool2d_backward grad_out " + shape_str(grad_out.shape()) +
                     " does not match the forward cache");

  Tensor<T> gx(input_shape);
  const int oh = grad_out.dim(2), ow = grad_out.dim(3);
  const T* gop = grad_out.data();
  long long o = 0;
  for (int bc = 0; bc < B * C; ++bc) {
    T* plane = gx.data() + static_cast<long long>(bc) * H * W;
    for (int i = 0; i < oh * ow; ++i, ++o) plane[argmax[static_cast<size_t>(o)]] += gop[o];
  }
  return gx;
}

// ---------------------------------------------------------------------------
// batchnorm2d over [B, C, H, W], per-channel statistics. Train mode uses
// batch statistics (biased variance) and updates running stats as
// running <- momentum*running + (1-momentum)*batch. Infer mode uses the
// running stats. Statistics accumulate in double in a fixed order.
// ---------------------------------------------------------------------------

template <typename T>
struct BnCache {
  Tensor<T> x_hat;
  std::vector<T> inv_std;  // per channel
};

template <typename T>
struct BnGrads {
  Tensor<T> input;
  Tensor<T> gamma;
  Tensor<T> beta;
};

namespace detail {

template <typename T>
void bn_check(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
              const Tensor<T>& running_mean, const Tensor<T>& running_var) {
  if (x.ndim() != 4) throw ShapeError("batchnorm2d expects x[B,C,H,W], got " + shape_str(x.shape()));
  const int C = x.dim(1);
  for (const Tensor<T>* t : {&gamma, &beta, &running_mean, &running_var})
    if (t->ndim() != 1 || t->dim(0) != C)
      throw ShapeError("batchnorm2d per-channel tensor has shape " + shape_str(t->shape()) +
                       ", expected [" + std::to_string(C) + "]");
}

}  // namespace detail

template <typename T>
Tensor<T> batchnorm2d_forward_train(const Tensor<T>& x, const Tensor<T>& gamma,
                                    const Tensor<T>& beta, Tensor<T>& running_mean,
                                    Tensor<T>& running_var, T momentum, T epsilon,
                                    BnCache<T>& cache) {
  detail::bn_check(x, gamma, beta, running_mean, running_var);
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const long long plane = static_cast<long long>(H) * W;
  const long long m = static_cast<long long>(B) * plane;

  cache.x_hat = Tensor<T>(x.shape());
  cache.inv_std.assign(static_cast<size_t>(C), T(0));
  Tensor<T> y(x.shape());

  for (int c = 0; c < C; ++c) {
    double sum = 0.0;
    for (int b = 0; b < B; ++b) {
      const T* p = x.data() + (static_cast<long long>(b) * C + c) * plane;
      for (long long i = 0; i < plane; ++i) sum += static_cast<double>(p[i]);
    }
    const double mean = sum / static_cast<double>(m);
    double sq = 0.0;
    for (int b = 0; b < B; ++b) {
      const T* p = x.data() + (static_cast<long long>(b) * C + c) * plane;
      for (long long i = 0; i < plane; ++i) {
        const double d = static_cast<double>(p[i]) - mean;
        sq += d * d;
      }
    }
    const double var = sq / static_cast<double>(m);
    const T inv_std = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(epsilon)));
    cache.inv_std[static_cast<size_t>(c)] = inv_std;

    const T mean_t = static_cast<T>(mean);
    const T g = gamma[c], bta = beta[c];
    for (int b = 0; b < B; ++b) {
      const long long off = (static_cast<long long>(b) * C + c) * plane;
      const T* p = x.data() + off;
      T* xh = cache.x_hat.data() + off;
      T* yp = y.data() + off;
      for (long long i = 0; i < plane; ++i) {
        xh[i] = (p[i] - mean_t) * inv_std;
        yp[i] = g * xh[i] + bta;
      }
    }
    running_mean[c] = momentum * running_mean[c] + (T(1) - momentum) * mean_t;
    running_var[c] = momentum * running_var[c] + (T(1) - momentum) * static_cast<T>(var);
  }
  return y;
}

template <typename T>
Tensor<T> batchnorm2d_forward_infer(const Tensor<T>& x, const Tensor<T>& gamma,
                                    const Tensor<T>& beta, const Tensor<T>& running_mean,
                                    const Tensor<T>& running_var, T epsilon) {
  detail::bn_check(x, gamma, beta, running_mean, running_var);
  const int B = x.dim(0), C = x.dim(1);
  const long long plane = static_cast<long long>(x.dim(2)) * x.dim(3);
  Tensor<T> y(x.shape());
  for (int c = 0; c < C; ++c) {
    const T inv_std =
        static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var[c]) +
                                       static_cast<double>(epsilon)));
    const T mean = running_mean[c], g = gamma[c], bta = beta[c];
    for (int b = 0; b < B; ++b) {
      const long long off = (static_cast<long long>(b) * C + c) * plane;
      const T* p = x.data() + off;
      T* yp = y.data() + off;
      for (long long i = 0; i < plane; ++i) yp[i] = g * (p[i] - mean) * inv_std + bta;
    }
  }
  return y;
}

// Backward for the train-mode forward. dx folds in the dependence of the
// batch statistics on every input element:
//   dx = gamma*inv_std * (dy - mean(dy) - x_hat*mean(dy*x_hat))
template <typename T>
BnGrads<T> batchnorm2d_backward(const Tensor<T>& grad_out, const Tensor<T>& gamma,
                                const BnCache<T>& cache) {
  const Tensor<T>& xh = cache.x_hat;
  if (!grad_out.same_shape(xh))
    throw ShapeError("batchnorm2d_backward grad_out " + shape_str(grad_out.shape()) +
                     " does not match cached x_hat " + shape_str(xh.shape()));
  const int B = xh.dim(0), C = xh.dim(1);
  const long long plane = static_cast<long long>(xh.dim(2)) * xh.dim(3);
  const long long m = static_cast<long long>(B) * plane;

  BnGrads<T> g{Tensor<T>(xh.shape()), Tensor<T>({C}), Tensor<T>({C})};
  for (int c = 0; c < C; ++c) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (int b = 0; b < B; ++b) {
      const long long off = (static_cast<long long>(b) * C + c) * plane;
      const T* go = grad_out.data() + off;
      const T* xhp = xh.data() + off;
      for (long long i = 0; i < plane; ++i) {
        sum_dy += static_cast<double>(go[i]);
        sum_dy_xh += static_cast<double>(go[i]) * static_cast<double>(xhp[i]);
      }
    }
    g.beta[c] = static_cast<T>(sum_dy);
    g.gamma[c] = static_cast<T>(sum_dy_xh);

    const T mean_dy = static_cast<T>(sum_dy / static_cast<double>(m));
    const T mean_dy_xh = static_cast<T>(sum_dy_xh / static_cast<double>(m));
    const T scale = gamma[c] * cache.inv_std[static_cast<size_t>(c)];
    for (int b = 0; b < B; ++b) {
      const long long off = (static_cast<long long>(b) * C + c) * plane;
      const T* go = grad_out.data() + off;
      const T* xhp = xh.data() + off;
      T* gx = g.input.data() + off;
      for (long long i = 0; i < plane; ++i)
        gx[i] = scale * (go[i] - mean_dy - xhp[i] * mean_dy_xh);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// dense: y = W x + b.  x: [B, D_in] (or [D_in]), w: [D_out, D_in], b: [D_out]
// ---------------------------------------------------------------------------

template <typename T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  const bool vec_in = x.ndim() == 1;
  if (x.ndim() != 2 && !vec_in)
    throw ShapeError("dense expects x[B,D] or x[D], got " + shape_str(x.shape()));
  const int B = vec_in ? 1 : x.dim(0);
  const int din = vec_in ? x.dim(0) : x.dim(1);
  if (w.ndim() != 2 || w.dim(1) != din || b.ndim() != 1 || b.dim(0) != w.dim(0))
    throw ShapeError("dense shape mismatch: x=" + shape_str(x.shape()) +
                     " w=" + shape_str(w.shape()) + " b=" + shape_str(b.shape()));
  const int dout = w.dim(0);

  Tensor<T> y(vec_in ? std::vector<int>{dout} : std::vector<int>{B, dout});
  for (int bi = 0; bi < B; ++bi) {
    const T* xr = x.data() + static_cast<long long>(bi) * din;
    T* yr = y.data() + static_cast<long long>(bi) * dout;
    for (int o = 0; o < dout; ++o) {
      const T* wr = w.data() + static_cast<long long>(o) * din;
      T acc = b[o];
      for (int i = 0; i < din; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
  return y;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Tensor<T>& w) {
  const bool vec_in = x.ndim() == 1;
  const int B = vec_in ? 1 : x.dim(0);
  const int din = vec_in ? x.dim(0) : x.dim(1);
  const int dout = w.dim(0);
  if (grad_out.size() != static_cast<long long>(B) * dout)
    throw ShapeError("dense_backward grad_out " + shape_str(grad_out.shape()) +
                     " does not match output size");

  DenseGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(w.shape()), Tensor<T>({dout})};
  for (int bi = 0; bi < B; ++bi) {
    const T* xr = x.data() + static_cast<long long>(bi) * din;
    const T* gr = grad_out.data() + static_cast<long long>(bi) * dout;
    T* gxr = g.input.data() + static_cast<long long>(bi) * din;
    for (int o = 0; o < dout; ++o) {
      const T go = gr[o];
      g.bias[o] += go;
      const T* wr = w.data() + static_cast<long long>(o) * din;
      T* gwr = g.weights.data() + static_cast<long long>(o) * din;
      for (int i = 0; i < din; ++i) {
        gwr[i] += go * xr[i];
        gxr[i] += go * wr[i];
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// single-sample convenience forms: [C,H,W] in, [C,H',W'] out
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
Tensor<T> as_batch(const Tensor<T>& x) {
  Tensor<T> b = x;
  b.reshape({1, x.dim(0), x.dim(1), x.dim(2)});
  return b;
}

template <typename T>
Tensor<T> drop_batch(Tensor<T> x) {
  x.reshape({x.dim(1), x.dim(2), x.dim(3)});
  return x;
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d_forward_single(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                                Padding padding = Padding::kSame) {
  if (x.ndim() != 3) throw ShapeError("expected x[C,H,W], got " + shape_str(x.shape()));
  return detail::drop_batch(conv2d_forward(detail::as_batch(x), w, b, padding));
}

template <typename T>
Conv2dGrads<T> conv2d_backward_single(const Tensor<T>& grad_out, const Tensor<T>& x,
                                      const Tensor<T>& w, Padding padding = Padding::kSame) {
  if (x.ndim() != 3 || grad_out.ndim() != 3)
    throw ShapeError("expected 3D tensors, got x=" + shape_str(x.shape()) +
                     " grad_out=" + shape_str(grad_out.shape()));
  Conv2dGrads<T> g =
      conv2d_backward(detail::as_batch(grad_out), detail::as_batch(x), w, padding);
  g.input = detail::drop_batch(std::move(g.input));
  return g;
}

template <typename T>
MaxPoolOut<T> maxpool2d_forward_single(const Tensor<T>& x, int pool_h, int pool_w) {
  if (x.ndim() != 3) throw ShapeError("expected x[C,H,W], got " + shape_str(x.shape()));
  MaxPoolOut<T> r = maxpool2d_forward(detail::as_batch(x), pool_h, pool_w);
  r.output = detail::drop_batch(std::move(r.output));
  return r;
}

// ---------------------------------------------------------------------------
// activations
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (long long i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& x) {
  if (!grad_out.same_shape(x)) throw ShapeError("relu_backward shape mismatch");
  Tensor<T> gx(x.shape());
  for (long long i = 0; i < x.size(); ++i) gx[i] = x[i] > T(0) ? grad_out[i] : T(0);
  return gx;
}

// Numerically stable logistic; output clamped strictly inside (0, 1).
template <typename T>
T sigmoid_scalar(T x) {
  T y;
  if (x >= T(0)) {
    const T e = std::exp(-x);
    y = T(1) / (T(1) + e);
  } else {
    const T e = std::exp(x);
    y = e / (T(1) + e);
  }
  const T lo = std::numeric_limits<T>::min();
  const T hi = T(1) - std::numeric_limits<T>::epsilon();
  return y < lo ? lo : (y > hi ? hi : y);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (long long i = 0; i < x.size(); ++i) y[i] = sigmoid_scalar(x[i]);
  return y;
}

// grad_x = grad_y * y * (1 - y), with y the cached forward output.
template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& grad_out, const Tensor<T>& y) {
  if (!grad_out.same_shape(y)) throw ShapeError("sigmoid_backward shape mismatch");
  Tensor<T> gx(y.shape());
  for (long long i = 0; i < y.size(); ++i) gx[i] = grad_out[i] * y[i] * (T(1) - y[i]);
  return gx;
}

// ---------------------------------------------------------------------------
// initialization
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> glorot_uniform(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (static_cast<double>(fan_in) + fan_out));
  return Tensor<T>::uniform(std::move(shape), static_cast<T>(-limit), static_cast<T>(limit), rng);
}

}  // namespace sedil
