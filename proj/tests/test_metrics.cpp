#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sedil/metrics.hpp"

using namespace sedil;

namespace {

Tensorf from_rows(const std::vector<std::vector<float>>& rows) {
  const int S = static_cast<int>(rows.size());
  const int K = static_cast<int>(rows[0].size());
  Tensorf t({S, K});
  for (int s = 0; s < S; ++s)
    for (int k = 0; k < K; ++k) t[static_cast<long long>(s) * K + k] = rows[static_cast<size_t>(s)][static_cast<size_t>(k)];
  return t;
}

}  // namespace

TEST_CASE("f1 counts a textbook confusion table") {
  // four segments, one class: TP, TP, FP, FN -> P=2/3, R=2/3, F1=2/3
  Tensorf preds = from_rows({{0.9f}, {0.8f}, {0.7f}, {0.2f}});
  Tensorf refs = from_rows({{1}, {1}, {0}, {1}});
  F1Result r = f1_segment(preds, refs, 0.5);
  REQUIRE(r.per_class.size() == 1);
  REQUIRE(r.per_class[0].counts.tp == 2);
  REQUIRE(r.per_class[0].counts.fp == 1);
  REQUIRE(r.per_class[0].counts.fn == 1);
  REQUIRE(std::fabs(r.per_class[0].precision - 2.0 / 3.0) <= 1e-12);
  REQUIRE(std::fabs(r.per_class[0].recall - 2.0 / 3.0) <= 1e-12);
  REQUIRE(std::fabs(r.micro_f1 - 2.0 / 3.0) <= 1e-12);
  REQUIRE(r.macro_f1 == r.micro_f1);
}

TEST_CASE("f1 edge cases") {
  // perfect
  Tensorf p1 = from_rows({{0.9f, 0.1f}, {0.2f, 0.8f}});
  Tensorf r1 = from_rows({{1, 0}, {0, 1}});
  REQUIRE(f1_segment(p1, r1, 0.5).micro_f1 == 1.0);

  // nothing predicted, nothing referenced: all denominators zero -> 0
  Tensorf p2 = from_rows({{0.1f}, {0.2f}});
  Tensorf r2 = from_rows({{0}, {0}});
  REQUIRE(f1_segment(p2, r2, 0.5).micro_f1 == 0.0);
  REQUIRE(f1_segment(p2, r2, 0.5).macro_f1 == 0.0);

  // everything wrong
  Tensorf p3 = from_rows({{0.9f}, {0.1f}});
  Tensorf r3 = from_rows({{0}, {1}});
  REQUIRE(f1_segment(p3, r3, 0.5).micro_f1 == 0.0);
}

TEST_CASE("binarization is strictly greater-than") {
  Tensorf refs = from_rows({{1}});
  REQUIRE(f1_segment(from_rows({{0.5f}}), refs, 0.5).per_class[0].counts.tp == 0);
  REQUIRE(f1_segment(from_rows({{0.500001f}}), refs, 0.5).per_class[0].counts.tp == 1);
}

TEST_CASE("f1 validates its inputs") {
  Tensorf p = from_rows({{0.5f, 0.5f}});
  Tensorf r = from_rows({{1, 0}});
  REQUIRE_THROWS_AS(f1_segment(p, from_rows({{1}}), 0.5), ShapeError);
  REQUIRE_THROWS_AS(f1_segment(p, r, 0.0), ConfigError);
  REQUIRE_THROWS_AS(f1_segment(p, r, 1.0), ConfigError);
  REQUIRE_THROWS_AS(f1_segment(p, r, 0.5, {2}), ShapeError);
  REQUIRE_THROWS_AS(f1_segment(p, r, 0.5, {-1}), ShapeError);
}

TEST_CASE("f1 matches the brute-force oracle on random instances") {
  Rng rng(606);
  for (int it = 0; it < 150; ++it) {
    const int S = 1 + static_cast<int>(rng.below(30));
    const int K = 1 + static_cast<int>(rng.below(6));
    Tensorf preds({S, K});
    Tensorf refs({S, K});
    std::vector<std::vector<bool>> pb(static_cast<size_t>(S),
                                      std::vector<bool>(static_cast<size_t>(K)));
    std::vector<std::vector<bool>> rb = pb;
    for (int s = 0; s < S; ++s)
      for (int k = 0; k < K; ++k) {
        const float pr = static_cast<float>(rng.uniform(0, 1));
        const float rf = rng.below(3) == 0 ? 1.0f : 0.0f;
        preds[static_cast<long long>(s) * K + k] = pr;
        refs[static_cast<long long>(s) * K + k] = rf;
        pb[static_cast<size_t>(s)][static_cast<size_t>(k)] = pr > 0.5f;
        rb[static_cast<size_t>(s)][static_cast<size_t>(k)] = rf > 0.5f;
      }

    std::vector<int> subset;
    if (rng.below(2) == 0) {
      for (int k = 0; k < K; ++k)
        if (rng.below(2) == 0) subset.push_back(k);
    }
    std::vector<int> effective = subset;
    if (effective.empty())
      for (int k = 0; k < K; ++k) effective.push_back(k);

    F1Result got = f1_segment(preds, refs, 0.5, subset);
    oracle::BruteF1 want = oracle::brute_f1(pb, rb, effective);

    REQUIRE(got.micro_f1 == want.micro);
    REQUIRE(got.per_class.size() == want.per_class_f1.size());
    double macro = 0;
    for (size_t i = 0; i < want.per_class_f1.size(); ++i) {
      REQUIRE(got.per_class[i].f1 == want.per_class_f1[i]);
      macro += want.per_class_f1[i];
    }
    if (!want.per_class_f1.empty()) macro /= static_cast<double>(want.per_class_f1.size());
    REQUIRE(got.macro_f1 == macro);
  }
}

TEST_CASE("f1 is invariant to segment order") {
  Rng rng(607);
  const int S = 12, K = 3;
  Tensorf preds = Tensorf::uniform({S, K}, 0, 1, rng);
  Tensorf refs({S, K});
  for (long long i = 0; i < refs.size(); ++i) refs[i] = rng.below(2) ? 1.0f : 0.0f;

  std::vector<size_t> perm(S);
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.shuffle(perm);
  Tensorf preds2({S, K}), refs2({S, K});
  for (int s = 0; s < S; ++s)
    for (int k = 0; k < K; ++k) {
      preds2[static_cast<long long>(s) * K + k] =
          preds[static_cast<long long>(perm[static_cast<size_t>(s)]) * K + k];
      refs2[static_cast<long long>(s) * K + k] =
          refs[static_cast<long long>(perm[static_cast<size_t>(s)]) * K + k];
    }

  F1Result a = f1_segment(preds, refs, 0.5);
  F1Result b = f1_segment(preds2, refs2, 0.5);
  REQUIRE(a.micro_f1 == b.micro_f1);
  REQUIRE(a.macro_f1 == b.macro_f1);
}

TEST_CASE("raising the threshold never adds positives") {
  Rng rng(608);
  Tensorf preds = Tensorf::uniform({20, 2}, 0, 1, rng);
  Tensorf refs({20, 2});
  for (long long i = 0; i < refs.size(); ++i) refs[i] = rng.below(2) ? 1.0f : 0.0f;

  long long prev = -1;
  for (double th : {0.2, 0.4, 0.6, 0.8}) {
    F1Result r = f1_segment(preds, refs, th);
    long long positives = 0;
    for (const auto& c : r.per_class) positives += c.counts.tp + c.counts.fp;
    if (prev >= 0) REQUIRE(positives <= prev);
    prev = positives;
  }
}

TEST_CASE("class subsets score exactly the chosen columns") {
  Tensorf preds = from_rows({{0.9f, 0.1f, 0.9f}, {0.9f, 0.9f, 0.1f}});
  Tensorf refs = from_rows({{1, 1, 0}, {0, 1, 1}});
  F1Result all = f1_segment(preds, refs, 0.5);
  F1Result col1 = f1_segment(preds, refs, 0.5, {1});
  REQUIRE(col1.per_class.size() == 1);
  REQUIRE(col1.per_class[0].class_idx == 1);
  REQUIRE(col1.per_class[0].f1 == all.per_class[1].f1);
  REQUIRE(col1.micro_f1 == col1.per_class[0].f1);

  F1Result two = f1_segment(preds, refs, 0.5, {0, 2});
  long long tp = all.per_class[0].counts.tp + all.per_class[2].counts.tp;
  long long fp = all.per_class[0].counts.fp + all.per_class[2].counts.fp;
  long long fn = all.per_class[0].counts.fn + all.per_class[2].counts.fn;
  REQUIRE(two.micro_f1 == 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn));
}

TEST_CASE("stacking helpers pack examples contiguously") {
  std::vector<Example> exs;
  for (int i = 0; i < 3; ++i) {
    Example e{Tensorf({2, 2}), Tensorf({2})};
    for (long long j = 0; j < 4; ++j) e.x[j] = static_cast<float>(i * 10 + j);
    e.y[0] = static_cast<float>(i % 2);
    e.y[1] = 1.0f;
    exs.push_back(std::move(e));
  }
  Tensorf x = stack_inputs(exs, 1, 3);
  REQUIRE(x.shape() == std::vector<int>{2, 2, 2});
  REQUIRE(x[0] == 10.0f);
  REQUIRE(x[4] == 20.0f);

  Tensorf y = stack_labels(exs);
  REQUIRE(y.shape() == std::vector<int>{3, 2});
  REQUIRE(y[0] == 0.0f);
  REQUIRE(y[2] == 1.0f);
  REQUIRE(y[4] == 0.0f);
}

TEST_CASE("model evaluation emits probabilities aligned with references") {
  std::vector<EventClass> classes = {{0, "alpha"}, {1, "beta"}};
  DatagenParams p;
  p.duration_s = 4.0;
  Dataset d = generate_split(701, classes, Regime::kClean, 3, 16, 16, p);

  SedCnnConfig cfg;
  cfg.input_mels = 16;
  cfg.input_frames = 16;
  cfg.conv_filters = 2;
  cfg.num_conv_blocks = 2;
  cfg.num_classes = 2;
  Rng rng(702);
  SedCnn<float> m(cfg, {"alpha", "beta"}, rng);

  EvalData ev = evaluate_model(m, d, p);
  REQUIRE(ev.preds.shape() == std::vector<int>{12, 2});
  REQUIRE(ev.refs.shape() == std::vector<int>{12, 2});
  for (long long i = 0; i < ev.preds.size(); ++i) {
    REQUIRE(ev.preds[i] > 0.0f);
    REQUIRE(ev.preds[i] < 1.0f);
  }
  const auto exs = make_examples(d, m.class_names(), 16, 16, p);
  Tensorf refs = stack_labels(exs);
  for (long long i = 0; i < refs.size(); ++i) REQUIRE(ev.refs[i] == refs[i]);

  EvalData again = evaluate_model(m, d, p, 5);  // odd batch size, same answer
  for (long long i = 0; i < ev.preds.size(); ++i) REQUIRE(ev.preds[i] == again.preds[i]);
}

TEST_CASE("ablation of a zeroed adapter collapses C onto B") {
  std::vector<EventClass> classes = {{0, "alpha"}, {1, "beta"}, {2, "gamma"}};
  DatagenParams p;
  p.duration_s = 4.0;
  Dataset d = generate_split(703, classes, Regime::kClean, 3, 16, 16, p);

  SedCnnConfig cfg;
  cfg.input_mels = 16;
  cfg.input_frames = 16;
  cfg.conv_filters = 2;
  cfg.num_conv_blocks = 2;
  cfg.num_classes = 2;
  Rng rng(704);
  SedCnn<float> source(cfg, {"alpha", "beta"}, rng);
  Rng mig(705);
  SedCnn<float> target = migrate_weights(source, "gamma", mig);
  Rng arng(706);
  NeuralAdapter<float> adapter(2, 4, 3, AdapterInput::kLogits, arng);
  AdapterComposite<float> comp = compose(std::move(source), std::move(adapter),
                                         std::move(target));
  for (auto& pr : comp.adapter().params()) pr.value->fill(0.0f);

  AbcEvalData ev = evaluate_composite_abc(comp, d, p);
  for (long long i = 0; i < ev.preds_b.size(); ++i) REQUIRE(ev.preds_c[i] == ev.preds_b[i]);

  AblationScores scores = run_ablation(comp, d, p);
  REQUIRE(scores.f1_c == scores.f1_b);
  F1Result direct = f1_segment(ev.preds_a, ev.refs, 0.5);
  REQUIRE(scores.f1_a == direct.micro_f1);
}
