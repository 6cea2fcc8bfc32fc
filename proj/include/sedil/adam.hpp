#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sedil/tensor.hpp"

namespace sedil {

template <typename T>
struct AdamConfig {
  T lr = static_cast<T>(1e-3);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T epsilon = static_cast<T>(1e-8);
};

// Adam with bias correction. One shared timestep for the whole parameter set,
// slot i always pairs with parameter i, so callers must pass the same
// parameter list in the same order on every step. epsilon sits outside the
// square root:
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + epsilon)
template <typename T>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig<T> cfg = {}) : cfg_(cfg) {}

  const AdamConfig<T>& config() const { return cfg_; }
  long long step_count() const { return t_; }

  void step(std::vector<ParamRef<T>>& params) {
    if (t_ == 0) {
      m_.reserve(params.size());
      v_.reserve(params.size());
      for (const auto& p : params) {
        m_.emplace_back(p.value->shape());
        v_.emplace_back(p.value->shape());
      }
    }
    if (params.size() != m_.size())
      throw TrainError("adam step got " + std::to_string(params.size()) +
                       " parameters, state has " + std::to_string(m_.size()));
    ++t_;
    const T b1t = static_cast<T>(1.0 - std::pow(static_cast<double>(cfg_.beta1), t_));
    const T b2t = static_cast<T>(1.0 - std::pow(static_cast<double>(cfg_.beta2), t_));
    for (size_t k = 0; k < params.size(); ++k) {
      Tensor<T>& theta = *params[k].value;
      const Tensor<T>& grad = *params[k].grad;
      if (!theta.same_shape(m_[k]))
        throw TrainError("adam state shape drift for parameter '" + params[k].name + "'");
      Tensor<T>& m = m_[k];
      Tensor<T>& v = v_[k];
      for (long long i = 0; i < theta.size(); ++i) {
        const T g = grad[i];
        if (!std::isfinite(static_cast<double>(g)))
          throw TrainError("non-finite gradient in parameter '" + params[k].name + "'");
        m[i] = cfg_.beta1 * m[i] + (T(1) - cfg_.beta1) * g;
        v[i] = cfg_.beta2 * v[i] + (T(1) - cfg_.beta2) * g * g;
        const T m_hat = m[i] / b1t;
        const T v_hat = v[i] / b2t;
        theta[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
      }
    }
  }

  void reset() {
    m_.clear();
    v_.clear();
    t_ = 0;
  }

 private:
  AdamConfig<T> cfg_;
  std::vector<Tensor<T>> m_, v_;
  long long t_ = 0;
};

}  // namespace sedil
