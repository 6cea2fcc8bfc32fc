#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sedil/layers.hpp"
#include "sedil/tensor.hpp"

namespace sedil {

inline constexpr int kConvKernel = 3;
inline constexpr double kBnEpsilon = 1e-5;
inline constexpr double kBnMomentum = 0.99;

enum class Mode { kTrain, kEval };

struct SedCnnConfig {
  int input_mels = 128;
  int input_frames = 128;
  int conv_filters = 64;
  int num_conv_blocks = 3;
  int pool_h = 2;
  int pool_w = 2;
  int num_classes = 1;

  void validate() const {
    if (input_mels < 1 || input_frames < 1 || conv_filters < 1 || num_conv_blocks < 1 ||
        pool_h < 1 || pool_w < 1)
      throw ConfigError("model config has a non-positive dimension");
    if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
    int m = input_mels, f = input_frames;
    for (int i = 0; i < num_conv_blocks; ++i) {
      if (m % pool_h != 0 || f % pool_w != 0)
        throw ConfigError("input " + std::to_string(input_mels) + "x" +
                          std::to_string(input_frames) + " is not divisible by pool " +
                          std::to_string(pool_h) + "x" + std::to_string(pool_w) + " at block " +
                          std::to_string(i + 1));
      m /= pool_h;
      f /= pool_w;
    }
  }

  int mels_after() const {
    int m = input_mels;
    for (int i = 0; i < num_conv_blocks; ++i) m /= pool_h;
    return m;
  }
  int frames_after() const {
    int f = input_frames;
    for (int i = 0; i < num_conv_blocks; ++i) f /= pool_w;
    return f;
  }
  int feature_dim() const { return conv_filters * mels_after() * frames_after(); }

  bool operator==(const SedCnnConfig&) const = default;
};

template <typename T>
struct SedCnnBlockCache {
  Tensor<T> conv_in;
  bool bn_train = false;
  BnCache<T> bn_cache;             // when bn_train
  std::vector<T> bn_infer_inv_std; // when !bn_train, from running stats
  Tensor<T> bn_out;
  std::vector<int> pool_in_shape;
  std::vector<int> pool_argmax;
};

template <typename T>
struct SedCnnCache {
  std::vector<SedCnnBlockCache<T>> blocks;
  Tensor<T> head_in;
};

// Three conv blocks (conv 3x3 same -> batchnorm -> ReLU -> maxpool) and a
// dense head producing one logit per class. Inputs are raw [B, mels, frames]
// feature windows; the model clamps and standardizes them with its stored
// input_norm buffer so a checkpoint is self-contained.
template <typename T>
class SedCnn {
 public:
  SedCnn() = default;

  // Zero-initialized skeleton, for deserialization.
  SedCnn(SedCnnConfig cfg, std::vector<std::string> class_names)
      : cfg_(cfg), class_names_(std::move(class_names)) {
    init_structure();
  }

  SedCnn(SedCnnConfig cfg, std::vector<std::string> class_names, Rng& rng)
      : SedCnn(cfg, std::move(class_names)) {
    const int k = kConvKernel;
    for (int i = 0; i < cfg_.num_conv_blocks; ++i) {
      const int cin = i == 0 ? 1 : cfg_.conv_filters;
      blocks_[static_cast<size_t>(i)].conv_w.value = glorot_uniform<T>(
          {cfg_.conv_filters, cin, k, k}, cin * k * k, cfg_.conv_filters * k * k, rng);
    }
    head_w_.value = glorot_uniform<T>({cfg_.num_classes, cfg_.feature_dim()},
                                      cfg_.feature_dim(), cfg_.num_classes, rng);
  }

  const SedCnnConfig& config() const { return cfg_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  void set_input_norm(T mean, T stddev) {
    if (!(stddev > T(0))) throw ConfigError("input_norm stddev must be positive");
    input_norm_[0] = mean;
    input_norm_[1] = stddev;
  }
  T input_norm_mean() const { return input_norm_[0]; }
  T input_norm_std() const { return input_norm_[1]; }

  // With batchnorm frozen the forward pass uses running statistics in every
  // mode and never updates them (matches freezing gamma and beta together).
  void set_bn_frozen(bool f) { bn_frozen_ = f; }
  bool bn_frozen() const { return bn_frozen_; }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> out;
    for (auto& b : blocks_)
      for (Param<T>* p : {&b.conv_w, &b.conv_b, &b.bn_gamma, &b.bn_beta})
        out.push_back({p->name, &p->value, &p->grad});
    for (Param<T>* p : {&head_w_, &head_b_}) out.push_back({p->name, &p->value, &p->grad});
    return out;
  }

  std::vector<ParamRef<T>> state() {
    std::vector<ParamRef<T>> out = params();
    for (size_t i = 0; i < blocks_.size(); ++i) {
      out.push_back({block_prefix(i) + ".bn.running_mean", &blocks_[i].running_mean, nullptr});
      out.push_back({block_prefix(i) + ".bn.running_var", &blocks_[i].running_var, nullptr});
    }
    out.push_back({"input_norm", &input_norm_, nullptr});
    return out;
  }

  std::vector<std::pair<std::string, const Tensor<T>*>> state_view() const {
    auto& self = const_cast<SedCnn&>(*this);
    std::vector<std::pair<std::string, const Tensor<T>*>> out;
    for (auto& r : self.state()) out.emplace_back(r.name, r.value);
    return out;
  }

  long long parameter_count() const {
    long long n = 0;
    for (const auto& b : blocks_)
      n += b.conv_w.value.size() + b.conv_b.value.size() + b.bn_gamma.value.size() +
           b.bn_beta.value.size();
    return n + head_w_.value.size() + head_b_.value.size();
  }

  uint64_t state_hash() const {
    uint64_t h = kFnvBasis;
    for (const auto& [name, t] : state_view()) {
      h = fnv1a64_str(name, h);
      h = fnv1a64(t->data(), static_cast<size_t>(t->size()) * sizeof(T), h);
    }
    return h;
  }

  void zero_grad() {
    for (auto& r : params()) r.grad->fill(T(0));
  }

  // x: [B, input_mels, input_frames] raw features. Returns logits [B, K].
  Tensor<T> forward(const Tensor<T>& x, Mode mode, SedCnnCache<T>* cache = nullptr) {
    if (x.ndim() != 3 || x.dim(1) != cfg_.input_mels || x.dim(2) != cfg_.input_frames)
      throw ShapeError("model expects x[B," + std::to_string(cfg_.input_mels) + "," +
                       std::to_string(cfg_.input_frames) + "], got " + shape_str(x.shape()));
    const int B = x.dim(0);
    Tensor<T> cur = normalize_input(x);
    if (cache) cache->blocks.assign(blocks_.size(), {});

    for (size_t i = 0; i < blocks_.size(); ++i) {
      auto& blk = blocks_[i];
      SedCnnBlockCache<T>* c = cache ? &cache->blocks[i] : nullptr;
      if (c) c->conv_in = cur;
      Tensor<T> z = conv2d_forward(cur, blk.conv_w.value, blk.conv_b.value, Padding::kSame);

      const bool train_bn = mode == Mode::kTrain && !bn_frozen_;
      Tensor<T> bn;
      if (train_bn) {
        BnCache<T> tmp;
        BnCache<T>& bc = c ? c->bn_cache : tmp;
        bn = batchnorm2d_forward_train(z, blk.bn_gamma.value, blk.bn_beta.value,
                                       blk.running_mean, blk.running_var,
                                       static_cast<T>(kBnMomentum),
                                       static_cast<T>(kBnEpsilon), bc);
      } else {
        bn = batchnorm2d_forward_infer(z, blk.bn_gamma.value, blk.bn_beta.value,
                                       blk.running_mean, blk.running_var,
                                       static_cast<T>(kBnEpsilon));
        if (c) {
          c->bn_infer_inv_std.resize(static_cast<size_t>(cfg_.conv_filters));
          for (int f = 0; f < cfg_.conv_filters; ++f)
            c->bn_infer_inv_std[static_cast<size_t>(f)] = static_cast<T>(
                1.0 / std::sqrt(static_cast<double>(blk.running_var[f]) + kBnEpsilon));
        }
      }
      if (c) {
        c->bn_train = train_bn;
        c->bn_out = bn;
      }

      Tensor<T> a = relu(bn);
      if (c) c->pool_in_shape = a.shape();
      MaxPoolOut<T> p = maxpool2d_forward(a, cfg_.pool_h, cfg_.pool_w);
      if (c) c->pool_argmax = std::move(p.argmax);
      cur = std::move(p.output);
    }

    cur.reshape({B, cfg_.feature_dim()});
    if (cache) cache->head_in = cur;
    return dense_forward(cur, head_w_.value, head_b_.value);
  }

  // Accumulates parameter gradients for the forward call that filled `cache`.
  void backward(const Tensor<T>& grad_logits, const SedCnnCache<T>& cache) {
    if (cache.blocks.size() != blocks_.size() || cache.head_in.ndim() != 2)
      throw TrainError("model backward called without a matching forward cache");
    const int B = cache.head_in.dim(0);

    DenseGrads<T> hg = dense_backward(grad_logits, cache.head_in, head_w_.value);
    detail_acc(head_w_.grad, hg.weights);
    detail_acc(head_b_.grad, hg.bias);
    Tensor<T> g = std::move(hg.input);

    for (int i = static_cast<int>(blocks_.size()) - 1; i >= 0; --i) {
      auto& blk = blocks_[static_cast<size_t>(i)];
      const auto& c = cache.blocks[static_cast<size_t>(i)];
      g.reshape({B, cfg_.conv_filters, c.pool_in_shape[2] / cfg_.pool_h,
                 c.pool_in_shape[3] / cfg_.pool_w});
      Tensor<T> ga = maxpool2d_backward(g, c.pool_argmax, c.pool_in_shape);
      Tensor<T> grelu = relu_backward(ga, c.bn_out);

      Tensor<T> gz;
      if (c.bn_train) {
        BnGrads<T> bg = batchnorm2d_backward(grelu, blk.bn_gamma.value, c.bn_cache);
        detail_acc(blk.bn_gamma.grad, bg.gamma);
        detail_acc(blk.bn_beta.grad, bg.beta);
        gz = std::move(bg.input);
      } else {
        gz = Tensor<T>(grelu.shape());
        const long long plane = static_cast<long long>(grelu.dim(2)) * grelu.dim(3);
        for (int b = 0; b < grelu.dim(0); ++b)
          for (int f = 0; f < cfg_.conv_filters; ++f) {
            const T s = blk.bn_gamma.value[f] * c.bn_infer_inv_std[static_cast<size_t>(f)];
            const long long off = (static_cast<long long>(b) * cfg_.conv_filters + f) * plane;
            for (long long j = 0; j < plane; ++j) gz[off + j] = grelu[off + j] * s;
          }
      }

      Conv2dGrads<T> cg = conv2d_backward(gz, c.conv_in, blk.conv_w.value, Padding::kSame);
      detail_acc(blk.conv_w.grad, cg.weights);
      detail_acc(blk.conv_b.grad, cg.bias);
      g = std::move(cg.input);
    }
  }

  // Eval-mode probabilities; accepts [B, mels, frames] or a single window.
  Tensor<T> predict(const Tensor<T>& x) {
    if (x.ndim() == 2) {
      Tensor<T> b = x;
      b.reshape({1, x.dim(0), x.dim(1)});
      Tensor<T> out = sigmoid(forward(b, Mode::kEval));
      out.reshape({cfg_.num_classes});
      return out;
    }
    return sigmoid(forward(x, Mode::kEval));
  }

  std::vector<Tensor<T>> snapshot() const {
    std::vector<Tensor<T>> out;
    for (const auto& [name, t] : state_view()) out.push_back(*t);
    return out;
  }

  void restore(const std::vector<Tensor<T>>& snap) {
    auto st = state();
    if (snap.size() != st.size()) throw TrainError("state snapshot size mismatch");
    for (size_t i = 0; i < st.size(); ++i) {
      if (!st[i].value->same_shape(snap[i]))
        throw TrainError("state snapshot shape mismatch at '" + st[i].name + "'");
      *st[i].value = snap[i];
    }
  }

 private:
  static std::string block_prefix(size_t i) { return "block" + std::to_string(i + 1); }

  static void detail_acc(Tensor<T>& dst, const Tensor<T>& src) {
    for (long long i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }

  void init_structure() {
    cfg_.validate();
    if (static_cast<int>(class_names_.size()) != cfg_.num_classes)
      throw ConfigError("got " + std::to_string(class_names_.size()) + " class names for " +
                        std::to_string(cfg_.num_classes) + " classes");
    const int F = cfg_.conv_filters, k = kConvKernel;
    blocks_.clear();
    blocks_.resize(static_cast<size_t>(cfg_.num_conv_blocks));
    for (int i = 0; i < cfg_.num_conv_blocks; ++i) {
      auto& b = blocks_[static_cast<size_t>(i)];
      const int cin = i == 0 ? 1 : F;
      const std::string p = block_prefix(static_cast<size_t>(i));
      b.conv_w = Param<T>(p + ".conv.weight", Tensor<T>({F, cin, k, k}));
      b.conv_b = Param<T>(p + ".conv.bias", Tensor<T>({F}));
      b.bn_gamma = Param<T>(p + ".bn.gamma", Tensor<T>::full({F}, T(1)));
      b.bn_beta = Param<T>(p + ".bn.beta", Tensor<T>({F}));
      b.running_mean = Tensor<T>({F});
      b.running_var = Tensor<T>::full({F}, T(1));
    }
    head_w_ = Param<T>("head.weight", Tensor<T>({cfg_.num_classes, cfg_.feature_dim()}));
    head_b_ = Param<T>("head.bias", Tensor<T>({cfg_.num_classes}));
    input_norm_ = Tensor<T>({2});
    input_norm_[0] = T(0);
    input_norm_[1] = T(1);
  }

  Tensor<T> normalize_input(const Tensor<T>& x) const {
    const int B = x.dim(0);
    Tensor<T> y({B, 1, cfg_.input_mels, cfg_.input_frames});
    const T mean = input_norm_[0];
    const T inv = T(1) / input_norm_[1];
    const T c = static_cast<T>(kFeatureClamp);
    for (long long i = 0; i < x.size(); ++i) {
      T v = x[i];
      v = v < -c ? -c : (v > c ? c : v);
      y[i] = (v - mean) * inv;
    }
    return y;
  }

  struct ConvBlock {
    Param<T> conv_w, conv_b, bn_gamma, bn_beta;
    Tensor<T> running_mean, running_var;
  };

  SedCnnConfig cfg_;
  std::vector<std::string> class_names_;
  std::vector<ConvBlock> blocks_;
  Param<T> head_w_, head_b_;
  Tensor<T> input_norm_;
  bool bn_frozen_ = false;
};

template <typename T>
SedCnn<T> build_source(const SedCnnConfig& cfg, const std::vector<std::string>& class_names,
                       Rng& rng) {
  return SedCnn<T>(cfg, class_names, rng);
}

// Expands an N-class model to N+1 classes. Everything except the new head row
// is copied bit-exact; the new row gets a fresh Glorot draw and a zero bias.
template <typename T>
SedCnn<T> migrate_weights(const SedCnn<T>& source, const std::string& new_class, Rng& rng) {
  for (const auto& n : source.class_names())
    if (n == new_class)
      throw ConfigError("class '" + new_class + "' is already present in the source model");

  SedCnnConfig cfg = source.config();
  const int n_old = cfg.num_classes;
  cfg.num_classes = n_old + 1;
  auto names = source.class_names();
  names.push_back(new_class);

  SedCnn<T> target(cfg, names, rng);
  std::unordered_map<std::string, const Tensor<T>*> src;
  for (const auto& [name, t] : source.state_view()) src[name] = t;

  for (auto& r : target.state()) {
    if (r.name == "head.weight") {
      const Tensor<T>& sw = *src.at(r.name);
      const int feat = sw.dim(1);
      for (int row = 0; row < n_old; ++row)
        for (int j = 0; j < feat; ++j)
          (*r.value)[static_cast<long long>(row) * feat + j] =
              sw[static_cast<long long>(row) * feat + j];
    } else if (r.name == "head.bias") {
      const Tensor<T>& sb = *src.at(r.name);
      for (int row = 0; row < n_old; ++row) (*r.value)[row] = sb[row];
      (*r.value)[n_old] = T(0);
    } else {
      auto it = src.find(r.name);
      if (it == src.end() || !it->second->same_shape(*r.value))
        throw ConfigError("migration mismatch for tensor '" + r.name + "'");
      *r.value = *it->second;
    }
  }
  return target;
}

}  // namespace sedil
