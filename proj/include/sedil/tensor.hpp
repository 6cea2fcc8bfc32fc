#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sedil/common.hpp"
#include "sedil/rng.hpp"

namespace sedil {

// Dense N-dimensional row-major array. Scalar type is a template parameter:
// the production pipeline runs float, gradient-check tests instantiate
// double. data().size() == product(shape) always holds.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(checked_size(shape_), T(0));
  }

  Tensor(std::vector<int> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<long long>(data_.size()) != checked_size(shape_))
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_str(shape_));
  }

  static Tensor full(std::vector<int> shape, T value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  static Tensor uniform(std::vector<int> shape, T lo, T hi, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
  }

  static Tensor normal(std::vector<int> shape, T mean, T stddev, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = static_cast<T>(mean + stddev * rng.normal());
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  long long size() const { return static_cast<long long>(data_.size()); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](long long i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](long long i) const { return data_[static_cast<size_t>(i)]; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  // Size-preserving reshape.
  void reshape(std::vector<int> shape) {
    if (checked_size(shape) != size())
      throw ShapeError("reshape " + shape_str(shape_) + " -> " + shape_str(shape) +
                       " changes element count");
    shape_ = std::move(shape);
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (const T& v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  uint64_t hash() const { return fnv1a64(data_.data(), data_.size() * sizeof(T)); }

 private:
  static long long checked_size(const std::vector<int>& shape) {
    long long n = 1;
    for (int d : shape) {
      if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_str(shape));
      n *= d;
    }
    return n;
  }

  std::vector<int> shape_;
  std::vector<T> data_;
};

using Tensorf = Tensor<float>;

// A named parameter with its gradient slot. value.shape == grad.shape is
// established at registration and preserved by every update.
template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Param() = default;
  Param(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)) {
    grad = Tensor<T>(value.shape());
  }
};

// Non-owning view used by optimizers and serialization.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value = nullptr;
  Tensor<T>* grad = nullptr;
};

}  // namespace sedil
