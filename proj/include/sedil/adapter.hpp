#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sedil/model.hpp"

namespace sedil {

inline constexpr int kAdapterHidden = 32;

// What the adapter reads from the source model. Logits is the default; the
// probability variant is kept behind this switch.
enum class AdapterInput : uint8_t { kLogits = 0, kProbs = 1 };

template <typename T>
struct AdapterCache {
  Tensor<T> x;      // adapter input after the optional sigmoid
  Tensor<T> h_pre;  // layer1 pre-activation
  Tensor<T> h;      // layer1 post-ReLU
};

// Two dense layers bridging the source head (N logits) to the expanded class
// space (N+1 logits): dense(N -> H) + ReLU, then dense(H -> N+1) linear.
template <typename T>
class NeuralAdapter {
 public:
  NeuralAdapter() = default;

  NeuralAdapter(int in_dim, int hidden, int out_dim, AdapterInput kind = AdapterInput::kLogits)
      : in_(in_dim), hidden_(hidden), out_(out_dim), kind_(kind) {
    if (in_ < 1 || hidden_ < 1 || out_ < 1)
      throw ConfigError("adapter dimensions must be positive");
    w1_ = Param<T>("adapter.layer1.weight", Tensor<T>({hidden_, in_}));
    b1_ = Param<T>("adapter.layer1.bias", Tensor<T>({hidden_}));
    w2_ = Param<T>("adapter.layer2.weight", Tensor<T>({out_, hidden_}));
    b2_ = Param<T>("adapter.layer2.bias", Tensor<T>({out_}));
  }

  NeuralAdapter(int in_dim, int hidden, int out_dim, AdapterInput kind, Rng& rng)
      : NeuralAdapter(in_dim, hidden, out_dim, kind) {
    w1_.value = glorot_uniform<T>({hidden_, in_}, in_, hidden_, rng);
    w2_.value = glorot_uniform<T>({out_, hidden_}, hidden_, out_, rng);
  }

  int in_dim() const { return in_; }
  int hidden_dim() const { return hidden_; }
  int out_dim() const { return out_; }
  AdapterInput input_kind() const { return kind_; }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> out;
    for (Param<T>* p : {&w1_, &b1_, &w2_, &b2_}) out.push_back({p->name, &p->value, &p->grad});
    return out;
  }

  std::vector<std::pair<std::string, const Tensor<T>*>> state_view() const {
    auto& self = const_cast<NeuralAdapter&>(*this);
    std::vector<std::pair<std::string, const Tensor<T>*>> out;
    for (auto& r : self.params()) out.emplace_back(r.name, r.value);
    return out;
  }

  long long parameter_count() const {
    return w1_.value.size() + b1_.value.size() + w2_.value.size() + b2_.value.size();
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

  // source_out: [B, N] source logits. Returns adapter logits [B, N+1].
  Tensor<T> forward(const Tensor<T>& source_out, AdapterCache<T>* cache = nullptr) {
    if (source_out.ndim() != 2 || source_out.dim(1) != in_)
      throw ShapeError("adapter expects [B," + std::to_string(in_) + "], got " +
                       shape_str(source_out.shape()));
    Tensor<T> x = kind_ == AdapterInput::kProbs ? sigmoid(source_out) : source_out;
    Tensor<T> h_pre = dense_forward(x, w1_.value, b1_.value);
    Tensor<T> h = relu(h_pre);
    Tensor<T> out = dense_forward(h, w2_.value, b2_.value);
    if (cache) {
      cache->x = std::move(x);
      cache->h_pre = std::move(h_pre);
      cache->h = std::move(h);
    }
    return out;
  }

  // Accumulates parameter gradients; returns the gradient w.r.t. the raw
  // source output (through the sigmoid if input_kind is kProbs).
  Tensor<T> backward(const Tensor<T>& grad_out, const AdapterCache<T>& cache) {
    DenseGrads<T> g2 = dense_backward(grad_out, cache.h, w2_.value);
    acc(w2_.grad, g2.weights);
    acc(b2_.grad, g2.bias);
    Tensor<T> gh = relu_backward(g2.input, cache.h_pre);
    DenseGrads<T> g1 = dense_backward(gh, cache.x, w1_.value);
    acc(w1_.grad, g1.weights);
    acc(b1_.grad, g1.bias);
    if (kind_ == AdapterInput::kProbs) return sigmoid_backward(g1.input, cache.x);
    return std::move(g1.input);
  }

  std::vector<Tensor<T>> snapshot() const {
    std::vector<Tensor<T>> out;
    for (const auto& [name, t] : state_view()) out.push_back(*t);
    return out;
  }

  void restore(const std::vector<Tensor<T>>& snap) {
    auto ps = params();
    if (snap.size() != ps.size()) throw TrainError("adapter snapshot size mismatch");
    for (size_t i = 0; i < ps.size(); ++i) *ps[i].value = snap[i];
  }

 private:
  static void acc(Tensor<T>& dst, const Tensor<T>& src) {
    for (long long i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }

  int in_ = 0, hidden_ = 0, out_ = 0;
  AdapterInput kind_ = AdapterInput::kLogits;
  Param<T> w1_, b1_, w2_, b2_;
};

// Bridge initialization used by the incremental-learning pipeline: the first
// layer is random, the second starts at zero, so the merged output begins
// exactly at the target branch and the adapter only ever contributes what
// training asks for. A fully random adapter injects noise into the merged
// logits that the joint system first has to unlearn.
template <typename T>
NeuralAdapter<T> make_bridge_adapter(int in_dim, int hidden_dim, int out_dim, AdapterInput kind,
                                     Rng& rng) {
  NeuralAdapter<T> adapter(in_dim, hidden_dim, out_dim, kind, rng);
  for (auto& p : adapter.params())
    if (p.name == "adapter.layer2.weight" || p.name == "adapter.layer2.bias") p.value->fill(0);
  return adapter;
}

template <typename T>
struct CompositeOut {
  Tensor<T> source_logits;   // [B, N]
  Tensor<T> adapter_logits;  // [B, N+1], the A branch before its sigmoid
  Tensor<T> target_logits;   // [B, N+1], the B branch before its sigmoid
  Tensor<T> merged_logits;   // [B, N+1], element-wise sum of the two branches
};

template <typename T>
struct CompositeCache {
  AdapterCache<T> adapter;
  SedCnnCache<T> target;
};

template <typename T>
struct AbcPredictions {
  Tensor<T> a, b, c;  // [B, N+1] probabilities each
};

// Frozen source + trainable adapter + trainable target. The source always
// runs in inference mode and never receives gradient. Output C applies one
// sigmoid to the merged logits; A and B are the branches through their own
// sigmoids.
template <typename T>
class AdapterComposite {
 public:
  AdapterComposite() = default;

  AdapterComposite(SedCnn<T> source, NeuralAdapter<T> adapter, SedCnn<T> target)
      : source_(std::move(source)), adapter_(std::move(adapter)), target_(std::move(target)) {
    const int n = source_.config().num_classes;
    if (adapter_.in_dim() != n)
      throw ConfigError("adapter input dim " + std::to_string(adapter_.in_dim()) +
                        " does not match source class count " + std::to_string(n));
    if (target_.config().num_classes != n + 1)
      throw ConfigError("target has " + std::to_string(target_.config().num_classes) +
                        " classes, expected " + std::to_string(n + 1));
    if (adapter_.out_dim() != n + 1)
      throw ConfigError("adapter output dim " + std::to_string(adapter_.out_dim()) +
                        " does not match target class count " + std::to_string(n + 1));
    SedCnnConfig s = source_.config(), t = target_.config();
    s.num_classes = t.num_classes = 0;
    if (!(s == t)) throw ConfigError("source and target model configs differ");
    for (int i = 0; i < n; ++i)
      if (source_.class_names()[static_cast<size_t>(i)] !=
          target_.class_names()[static_cast<size_t>(i)])
        throw ConfigError("class name mismatch at index " + std::to_string(i));
    source_.set_bn_frozen(true);
  }

  SedCnn<T>& source() { return source_; }
  const SedCnn<T>& source() const { return source_; }
  NeuralAdapter<T>& adapter() { return adapter_; }
  const NeuralAdapter<T>& adapter() const { return adapter_; }
  SedCnn<T>& target() { return target_; }
  const SedCnn<T>& target() const { return target_; }

  const std::string& new_class() const { return target_.class_names().back(); }

  CompositeOut<T> forward(const Tensor<T>& x, Mode mode, CompositeCache<T>* cache = nullptr) {
    CompositeOut<T> out;
    out.source_logits = source_.forward(x, Mode::kEval);
    out.adapter_logits = adapter_.forward(out.source_logits, cache ? &cache->adapter : nullptr);
    out.target_logits = target_.forward(x, mode, cache ? &cache->target : nullptr);
    out.merged_logits = Tensor<T>(out.target_logits.shape());
    for (long long i = 0; i < out.merged_logits.size(); ++i)
      out.merged_logits[i] = out.adapter_logits[i] + out.target_logits[i];
    return out;
  }

  // grad_merged is dLoss/d(merged logits); the sum routes it unchanged into
  // both branches. Source parameters are never touched.
  void backward(const Tensor<T>& grad_merged, const CompositeCache<T>& cache) {
    adapter_.backward(grad_merged, cache.adapter);
    target_.backward(grad_merged, cache.target);
  }

  AbcPredictions<T> predict_abc(const Tensor<T>& x) {
    CompositeOut<T> out = forward(x, Mode::kEval);
    return {sigmoid(out.adapter_logits), sigmoid(out.target_logits),
            sigmoid(out.merged_logits)};
  }

  std::vector<ParamRef<T>> trainable_params() {
    std::vector<ParamRef<T>> out = adapter_.params();
    for (auto& r : target_.params()) out.push_back(r);
    return out;
  }

  void zero_grad() {
    adapter_.zero_grad();
    target_.zero_grad();
  }

  // Snapshot of the trainable half (adapter parameters, full target state
  // including batchnorm buffers). The frozen source is excluded on purpose.
  std::vector<Tensor<T>> snapshot() const {
    std::vector<Tensor<T>> out = adapter_.snapshot();
    for (auto& t : target_.snapshot()) out.push_back(std::move(t));
    return out;
  }

  void restore(const std::vector<Tensor<T>>& snap) {
    const size_t na = adapter_.state_view().size();
    if (snap.size() < na) throw TrainError("composite snapshot size mismatch");
    adapter_.restore({snap.begin(), snap.begin() + static_cast<long>(na)});
    target_.restore({snap.begin() + static_cast<long>(na), snap.end()});
  }

 private:
  SedCnn<T> source_;
  NeuralAdapter<T> adapter_;
  SedCnn<T> target_;
};

template <typename T>
AdapterComposite<T> compose(SedCnn<T> source, NeuralAdapter<T> adapter, SedCnn<T> target) {
  return AdapterComposite<T>(std::move(source), std::move(adapter), std::move(target));
}

}  // namespace sedil
