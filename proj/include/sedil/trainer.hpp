#pragma once

#include <cstdio>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "sedil/adam.hpp"
#include "sedil/adapter.hpp"
#include "sedil/datagen.hpp"
#include "sedil/io.hpp"
#include "sedil/loss.hpp"
#include "sedil/metrics.hpp"
#include "sedil/model.hpp"

namespace sedil {

struct TrainConfig {
  AdamConfig<float> adam;
  int batch_size = 32;
  int max_epochs = 500;
  int patience = 100;
  double threshold = 0.5;  // binarization for the early-stopping F1
  std::vector<std::string> freeze;

  // Test seams. val_metric replaces the validation F1 (given eval-mode
  // predictions, references, and the 1-based epoch); after_epoch observes
  // the net between epochs.
  std::function<double(const Tensorf&, const Tensorf&, int)> val_metric;
  std::function<void(int)> after_epoch;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double train_loss = 0;
  double val_f1 = 0;
  double best_f1 = 0;
  bool stopped = false;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_f1 = 0;
  int epochs_run = 0;
};

// Improvement is strict; staying equal counts toward patience. Training halts
// once epochs_since_improvement reaches patience or the epoch cap.
struct EarlyStopState {
  double best_f1 = -1.0;
  int best_epoch = 0;
  int epochs_since_improvement = 0;
  int patience = 100;
  int max_epochs = 500;

  bool observe(double f1, int epoch) {
    if (f1 > best_f1) {
      best_f1 = f1;
      best_epoch = epoch;
      epochs_since_improvement = 0;
      return true;
    }
    ++epochs_since_improvement;
    return false;
  }

  bool should_stop(int epoch) const {
    return epochs_since_improvement >= patience || epoch >= max_epochs;
  }
};

// Uniform view over the two trainable nets. Both train against BCE on their
// primary output (logits for a plain model, merged logits for a composite).
template <typename Net>
struct NetOps;

template <>
struct NetOps<SedCnn<float>> {
  static std::vector<ParamRef<float>> trainable(SedCnn<float>& m) { return m.params(); }
  static void zero_grad(SedCnn<float>& m) { m.zero_grad(); }

  static float step(SedCnn<float>& m, const Tensorf& x, const Tensorf& y) {
    SedCnnCache<float> cache;
    Tensorf logits = m.forward(x, Mode::kTrain, &cache);
    BceResult<float> r = bce_with_logits(logits, y);
    m.backward(r.grad_logits, cache);
    return r.loss;
  }

  static Tensorf predict(SedCnn<float>& m, const Tensorf& x) {
    return sigmoid(m.forward(x, Mode::kEval));
  }

  static void apply_bn_freeze(SedCnn<float>& m, const std::unordered_set<std::string>& freeze) {
    size_t bn = 0, frozen = 0;
    for (auto& p : m.params())
      if (p.name.find(".bn.") != std::string::npos) {
        ++bn;
        frozen += freeze.count(p.name);
      }
    if (frozen != 0 && frozen != bn)
      throw ConfigError("freeze list must cover all batchnorm parameters or none");
    m.set_bn_frozen(frozen == bn && bn > 0);
  }

  static std::vector<Tensorf> snapshot(const SedCnn<float>& m) { return m.snapshot(); }
  static void restore(SedCnn<float>& m, const std::vector<Tensorf>& s) { m.restore(s); }
  static int num_outputs(const SedCnn<float>& m) { return m.config().num_classes; }
};

template <>
struct NetOps<AdapterComposite<float>> {
  static std::vector<ParamRef<float>> trainable(AdapterComposite<float>& c) {
    return c.trainable_params();
  }
  static void zero_grad(AdapterComposite<float>& c) { c.zero_grad(); }

  static float step(AdapterComposite<float>& c, const Tensorf& x, const Tensorf& y) {
    CompositeCache<float> cache;
    CompositeOut<float> out = c.forward(x, Mode::kTrain, &cache);
    BceResult<float> r = bce_with_logits(out.merged_logits, y);
    c.backward(r.grad_logits, cache);
    return r.loss;
  }

  static Tensorf predict(AdapterComposite<float>& c, const Tensorf& x) {
    return sigmoid(c.forward(x, Mode::kEval).merged_logits);
  }

  static void apply_bn_freeze(AdapterComposite<float>&, const std::unordered_set<std::string>&) {}

  static std::vector<Tensorf> snapshot(const AdapterComposite<float>& c) { return c.snapshot(); }
  static void restore(AdapterComposite<float>& c, const std::vector<Tensorf>& s) {
    c.restore(s);
  }
  static int num_outputs(const AdapterComposite<float>& c) {
    return c.target().config().num_classes;
  }
};

template <typename Net>
TrainResult train(Net& net, const std::vector<Example>& train_set,
                  const std::vector<Example>& val_set, const TrainConfig& cfg, Rng& rng) {
  using Ops = NetOps<Net>;
  if (train_set.empty()) throw TrainError("empty training set");
  if (val_set.empty()) throw TrainError("empty validation set");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.patience < 1) throw ConfigError("patience must be >= 1");
  if (cfg.max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  const int K = Ops::num_outputs(net);
  if (train_set[0].y.dim(0) != K || val_set[0].y.dim(0) != K)
    throw ShapeError("label width does not match the model's " + std::to_string(K) +
                     " outputs");

  std::unordered_set<std::string> freeze(cfg.freeze.begin(), cfg.freeze.end());
  auto all_params = Ops::trainable(net);
  for (const auto& f : cfg.freeze) {
    bool known = false;
    for (const auto& p : all_params) known = known || p.name == f;
    if (!known) throw ConfigError("freeze list names unknown parameter '" + f + "'");
  }
  std::vector<ParamRef<float>> live;
  for (auto& p : all_params)
    if (!freeze.count(p.name)) live.push_back(p);
  Ops::apply_bn_freeze(net, freeze);

  AdamOptimizer<float> adam(cfg.adam);
  EarlyStopState stop;
  stop.patience = cfg.patience;
  stop.max_epochs = cfg.max_epochs;

  Tensorf val_refs = stack_labels(val_set);
  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult res;
  std::vector<Tensorf> best;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0;
    for (size_t lo = 0; lo < order.size(); lo += static_cast<size_t>(cfg.batch_size)) {
      const size_t hi = std::min(order.size(), lo + static_cast<size_t>(cfg.batch_size));
      const int b = static_cast<int>(hi - lo);
      const int mels = train_set[0].x.dim(0), frames = train_set[0].x.dim(1);
      Tensorf x({b, mels, frames});
      Tensorf y({b, K});
      for (size_t i = lo; i < hi; ++i) {
        const Example& ex = train_set[order[i]];
        for (long long j = 0; j < ex.x.size(); ++j)
          x[static_cast<long long>(i - lo) * mels * frames + j] = ex.x[j];
        for (int k = 0; k < K; ++k) y[static_cast<long long>(i - lo) * K + k] = ex.y[k];
      }
      Ops::zero_grad(net);
      loss_sum += static_cast<double>(Ops::step(net, x, y)) * b;
      if (!live.empty()) adam.step(live);
    }
    const double train_loss = loss_sum / static_cast<double>(train_set.size());

    Tensorf val_preds({static_cast<int>(val_set.size()), K});
    for (size_t lo = 0; lo < val_set.size(); lo += 64) {
      const size_t hi = std::min(val_set.size(), lo + 64);
      Tensorf probs = Ops::predict(net, stack_inputs(val_set, lo, hi));
      for (long long j = 0; j < probs.size(); ++j)
        val_preds[static_cast<long long>(lo) * K + j] = probs[j];
    }
    const double val_f1 = cfg.val_metric
                              ? cfg.val_metric(val_preds, val_refs, epoch)
                              : f1_segment(val_preds, val_refs, cfg.threshold).micro_f1;

    if (stop.observe(val_f1, epoch)) best = Ops::snapshot(net);
    res.log.push_back({epoch, train_loss, val_f1, stop.best_f1, false});
    res.epochs_run = epoch;
    if (cfg.after_epoch) cfg.after_epoch(epoch);
    if (stop.should_stop(epoch)) break;
  }

  if (!best.empty()) Ops::restore(net, best);
  if (!res.log.empty()) res.log.back().stopped = true;
  res.best_epoch = stop.best_epoch;
  res.best_f1 = stop.best_f1 < 0 ? 0 : stop.best_f1;
  return res;
}

// ---------------------------------------------------------------------------
// pipeline wrappers
// ---------------------------------------------------------------------------

// Source training owns the feature-norm decision: statistics of the clamped
// train split are stored in the model and inherited by every model migrated
// from it, so source and target always share one input space.
inline TrainResult train_source(SedCnn<float>& model, const Dataset& train_split,
                                const Dataset& val_split, const TrainConfig& cfg,
                                const DatagenParams& p, Rng& rng) {
  const int mels = model.config().input_mels, frames = model.config().input_frames;
  auto tr = make_examples(train_split, model.class_names(), mels, frames, p);
  auto va = make_examples(val_split, model.class_names(), mels, frames, p);
  const FeatureNorm norm = compute_feature_norm(tr);
  model.set_input_norm(norm.mean, norm.stddev);
  return train(model, tr, va, cfg, rng);
}

inline TrainResult train_simple_tl(SedCnn<float>& migrated, const Dataset& train_split,
                                   const Dataset& val_split, const TrainConfig& cfg,
                                   const DatagenParams& p, Rng& rng) {
  const int mels = migrated.config().input_mels, frames = migrated.config().input_frames;
  auto tr = make_examples(train_split, migrated.class_names(), mels, frames, p);
  auto va = make_examples(val_split, migrated.class_names(), mels, frames, p);
  return train(migrated, tr, va, cfg, rng);
}

inline TrainResult train_adapter_tl(AdapterComposite<float>& comp, const Dataset& train_split,
                                    const Dataset& val_split, const TrainConfig& cfg,
                                    const DatagenParams& p, Rng& rng) {
  const auto& tc = comp.target().config();
  auto tr =
      make_examples(train_split, comp.target().class_names(), tc.input_mels, tc.input_frames, p);
  auto va =
      make_examples(val_split, comp.target().class_names(), tc.input_mels, tc.input_frames, p);
  const uint64_t source_before = comp.source().state_hash();
  TrainResult res = train(comp, tr, va, cfg, rng);
  if (comp.source().state_hash() != source_before)
    throw TrainError("frozen source model changed during adapter training");
  return res;
}

inline void write_train_log(const TrainResult& res, const std::string& path) {
  std::string out = "epoch,train_loss,val_f1,best_f1,stopped_flag\n";
  char line[128];
  for (const EpochLog& e : res.log) {
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f,%.6f,%d\n", e.epoch, e.train_loss, e.val_f1,
                  e.best_f1, e.stopped ? 1 : 0);
    out += line;
  }
  bin::write_file(path, out);
}

}  // namespace sedil
