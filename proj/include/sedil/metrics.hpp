#pragma once

#include <string>
#include <vector>

#include "sedil/adapter.hpp"
#include "sedil/datagen.hpp"
#include "sedil/model.hpp"

namespace sedil {

struct ConfusionCounts {
  long long tp = 0, fp = 0, fn = 0;
};

struct ClassScore {
  int class_idx = 0;
  ConfusionCounts counts;
  double precision = 0, recall = 0, f1 = 0;
};

struct F1Result {
  std::vector<ClassScore> per_class;
  double micro_f1 = 0;
  double macro_f1 = 0;
};

// Segment-based scores. predictions [S, K] are probabilities, references
// [S, K] are 0/1. Binarization is strict: positive iff p > threshold.
// micro F1 = 2*TP / (2*TP + FP + FN) with counts summed over the subset;
// 0/0 cases are defined as 0. An empty subset means all K classes.
inline F1Result f1_segment(const Tensorf& predictions, const Tensorf& references,
                           double threshold, std::vector<int> class_subset = {}) {
  if (!predictions.same_shape(references) || predictions.ndim() != 2)
    throw ShapeError("f1_segment: predictions " + shape_str(predictions.shape()) +
                     " vs references " + shape_str(references.shape()));
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("threshold must lie in (0,1)");
  const int S = predictions.dim(0), K = predictions.dim(1);
  if (class_subset.empty())
    for (int k = 0; k < K; ++k) class_subset.push_back(k);
  for (int k : class_subset)
    if (k < 0 || k >= K)
      throw ShapeError("class subset index " + std::to_string(k) + " out of range for K=" +
                       std::to_string(K));

  F1Result r;
  long long tp_all = 0, fp_all = 0, fn_all = 0;
  double macro_sum = 0;
  for (int k : class_subset) {
    ClassScore cs;
    cs.class_idx = k;
    for (int s = 0; s < S; ++s) {
      const bool pred = predictions[static_cast<long long>(s) * K + k] > threshold;
      const bool ref = references[static_cast<long long>(s) * K + k] > 0.5f;
      cs.counts.tp += pred && ref;
      cs.counts.fp += pred && !ref;
      cs.counts.fn += !pred && ref;
    }
    const long long denom_p = cs.counts.tp + cs.counts.fp;
    const long long denom_r = cs.counts.tp + cs.counts.fn;
    cs.precision = denom_p ? static_cast<double>(cs.counts.tp) / denom_p : 0.0;
    cs.recall = denom_r ? static_cast<double>(cs.counts.tp) / denom_r : 0.0;
    const long long denom_f = 2 * cs.counts.tp + cs.counts.fp + cs.counts.fn;
    cs.f1 = denom_f ? 2.0 * static_cast<double>(cs.counts.tp) / denom_f : 0.0;
    macro_sum += cs.f1;
    tp_all += cs.counts.tp;
    fp_all += cs.counts.fp;
    fn_all += cs.counts.fn;
    r.per_class.push_back(cs);
  }
  const long long denom = 2 * tp_all + fp_all + fn_all;
  r.micro_f1 = denom ? 2.0 * static_cast<double>(tp_all) / denom : 0.0;
  r.macro_f1 = r.per_class.empty() ? 0.0 : macro_sum / static_cast<double>(r.per_class.size());
  return r;
}

// ---------------------------------------------------------------------------
// dataset-level evaluation
// ---------------------------------------------------------------------------

struct EvalData {
  Tensorf preds;  // [total_segments, K] probabilities
  Tensorf refs;   // [total_segments, K] 0/1
};

inline Tensorf stack_inputs(const std::vector<Example>& exs, size_t lo, size_t hi) {
  const int mels = exs[lo].x.dim(0), frames = exs[lo].x.dim(1);
  Tensorf batch({static_cast<int>(hi - lo), mels, frames});
  for (size_t i = lo; i < hi; ++i)
    for (long long j = 0; j < exs[i].x.size(); ++j)
      batch[static_cast<long long>(i - lo) * mels * frames + j] = exs[i].x[j];
  return batch;
}

inline Tensorf stack_labels(const std::vector<Example>& exs) {
  const int K = exs[0].y.dim(0);
  Tensorf refs({static_cast<int>(exs.size()), K});
  for (size_t i = 0; i < exs.size(); ++i)
    for (int k = 0; k < K; ++k) refs[static_cast<long long>(i) * K + k] = exs[i].y[k];
  return refs;
}

// Eval-mode predictions of a plain model over a dataset, labels projected
// onto the model's class list.
inline EvalData evaluate_model(SedCnn<float>& model, const Dataset& data,
                               const DatagenParams& p, int batch = 64) {
  const auto exs = make_examples(data, model.class_names(), model.config().input_mels,
                                 model.config().input_frames, p);
  if (exs.empty()) throw DataError("evaluation dataset produced no windows");
  EvalData ev;
  ev.refs = stack_labels(exs);
  ev.preds = Tensorf({static_cast<int>(exs.size()), model.config().num_classes});
  for (size_t lo = 0; lo < exs.size(); lo += static_cast<size_t>(batch)) {
    const size_t hi = std::min(exs.size(), lo + static_cast<size_t>(batch));
    Tensorf probs = sigmoid(model.forward(stack_inputs(exs, lo, hi), Mode::kEval));
    for (long long j = 0; j < probs.size(); ++j)
      ev.preds[static_cast<long long>(lo) * model.config().num_classes + j] = probs[j];
  }
  return ev;
}

struct AbcEvalData {
  Tensorf preds_a, preds_b, preds_c;  // [total_segments, N+1]
  Tensorf refs;
};

inline AbcEvalData evaluate_composite_abc(AdapterComposite<float>& comp, const Dataset& data,
                                          const DatagenParams& p, int batch = 64) {
  SedCnn<float>& target = comp.target();
  const auto exs = make_examples(data, target.class_names(), target.config().input_mels,
                                 target.config().input_frames, p);
  if (exs.empty()) throw DataError("evaluation dataset produced no windows");
  const int K = target.config().num_classes;
  AbcEvalData ev;
  ev.refs = stack_labels(exs);
  ev.preds_a = Tensorf({static_cast<int>(exs.size()), K});
  ev.preds_b = Tensorf({static_cast<int>(exs.size()), K});
  ev.preds_c = Tensorf({static_cast<int>(exs.size()), K});
  for (size_t lo = 0; lo < exs.size(); lo += static_cast<size_t>(batch)) {
    const size_t hi = std::min(exs.size(), lo + static_cast<size_t>(batch));
    AbcPredictions<float> abc = comp.predict_abc(stack_inputs(exs, lo, hi));
    for (long long j = 0; j < abc.a.size(); ++j) {
      const long long at = static_cast<long long>(lo) * K + j;
      ev.preds_a[at] = abc.a[j];
      ev.preds_b[at] = abc.b[j];
      ev.preds_c[at] = abc.c[j];
    }
  }
  return ev;
}

struct AblationScores {
  double f1_a = 0, f1_b = 0, f1_c = 0;
};

// Each of A, B, C as a standalone predictor over all N+1 classes.
inline AblationScores run_ablation(AdapterComposite<float>& comp, const Dataset& test,
                                   const DatagenParams& p, double threshold = 0.5) {
  AbcEvalData ev = evaluate_composite_abc(comp, test, p);
  return {f1_segment(ev.preds_a, ev.refs, threshold).micro_f1,
          f1_segment(ev.preds_b, ev.refs, threshold).micro_f1,
          f1_segment(ev.preds_c, ev.refs, threshold).micro_f1};
}

}  // namespace sedil
