#pragma once

#include <cmath>
#include <string>

#include "sedil/tensor.hpp"

namespace sedil {

// Binary cross-entropy fused with the logistic, computed from logits for
// stability:
//   loss_i = max(z,0) - z*y + log1p(exp(-|z|))
//   dloss/dz_i = (sigmoid(z_i) - y_i) / n
// The mean runs over every element (batch and classes together). Targets must
// be exactly 0 or 1.
template <typename T>
struct BceResult {
  T loss;
  Tensor<T> grad_logits;
};

template <typename T>
BceResult<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& targets) {
  if (!logits.same_shape(targets))
    throw ShapeError("bce_with_logits: logits " + shape_str(logits.shape()) +
                     " vs targets " + shape_str(targets.shape()));
  const long long n = logits.size();
  if (n == 0) throw ShapeError("bce_with_logits: empty input");

  BceResult<T> r{T(0), Tensor<T>(logits.shape())};
  double acc = 0.0;
  const T inv_n = T(1) / static_cast<T>(n);
  for (long long i = 0; i < n; ++i) {
    const T y = targets[i];
    if (y != T(0) && y != T(1))
      throw DataError("bce_with_logits: target at index " + std::to_string(i) +
                      " is " + std::to_string(static_cast<double>(y)) + ", expected 0 or 1");
    const T z = logits[i];
    const double zd = static_cast<double>(z);
    acc += std::max(zd, 0.0) - zd * static_cast<double>(y) + std::log1p(std::exp(-std::abs(zd)));

    T sig;
    if (z >= T(0))
      sig = T(1) / (T(1) + std::exp(-z));
    else {
      const T e = std::exp(z);
      sig = e / (T(1) + e);
    }
    r.grad_logits[i] = (sig - y) * inv_n;
  }
  r.loss = static_cast<T>(acc / static_cast<double>(n));
  return r;
}

}  // namespace sedil
