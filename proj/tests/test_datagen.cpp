#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "sedil/datagen.hpp"

using namespace sedil;

namespace {

const std::vector<EventClass> kTwoClasses = {{0, "alpha"}, {1, "beta"}};

DatagenParams quick_params() {
  DatagenParams p;
  p.duration_s = 6.0;
  return p;
}

bool events_overlap(const Event& a, const Event& b) {
  return a.onset_s < b.offset_s && b.onset_s < a.offset_s;
}

}  // namespace

TEST_CASE("datagen parameters are validated") {
  DatagenParams p;
  p.duration_s = 5.5;
  REQUIRE_THROWS_AS(p.validate(), ConfigError);  // not a whole number of segments

  p = DatagenParams{};
  p.min_event_s = 3.0;
  p.max_event_s = 2.0;
  REQUIRE_THROWS_AS(p.validate(), ConfigError);

  p = DatagenParams{};
  p.snr_db = -1.0;
  REQUIRE_THROWS_AS(p.validate(), ConfigError);

  p = DatagenParams{};
  p.clean_min_occ = 3;
  p.clean_max_occ = 2;
  REQUIRE_THROWS_AS(p.validate(), ConfigError);

  REQUIRE(DatagenParams{}.num_segments() == 10);
  REQUIRE(std::fabs(DatagenParams{}.noise_sigma() - std::pow(10.0, -0.5)) <= 1e-12);
}

TEST_CASE("class prototypes depend only on the global id") {
  DatagenParams p;
  ClassPrototype a1 = class_prototype(2, p);
  ClassPrototype a2 = class_prototype(2, p);
  REQUIRE(a1.band_lo == 2 * p.band_width);
  REQUIRE(a1.band_profile == a2.band_profile);
  REQUIRE(a1.mod_rate_hz == a2.mod_rate_hz);
  REQUIRE(a1.phase == a2.phase);

  ClassPrototype b = class_prototype(3, p);
  REQUIRE(b.band_lo == 3 * p.band_width);
  REQUIRE(a1.band_profile != b.band_profile);

  for (double w : a1.band_profile) {
    REQUIRE(w >= 0.5);
    REQUIRE(w <= 1.0);
  }
  REQUIRE(a1.mod_rate_hz >= 1.0);
  REQUIRE(a1.mod_rate_hz <= 4.0);
  for (double t : {0.0, 0.13, 0.5, 1.7}) {
    const double env = prototype_envelope(a1, t);
    REQUIRE(env >= 0.1);
    REQUIRE(env <= 1.0);
  }
}

TEST_CASE("clean soundscapes place one or two non-overlapping events per class") {
  DatagenParams p = quick_params();
  Dataset d = generate_split(991, kTwoClasses, Regime::kClean, 40, 16, 20, p);
  for (const Soundscape& ss : d.items) {
    int per_class[2] = {0, 0};
    for (const Event& e : ss.events) {
      REQUIRE(e.class_idx >= 0);
      REQUIRE(e.class_idx < 2);
      ++per_class[e.class_idx];
      const double dur = static_cast<double>(e.offset_s) - e.onset_s;
      REQUIRE(dur >= p.min_event_s - 1e-6);
      REQUIRE(dur <= p.max_event_s + 1e-6);
      REQUIRE(e.onset_s >= 0.0f);
      REQUIRE(static_cast<double>(e.offset_s) <= p.duration_s + 1e-6);
    }
    for (int k = 0; k < 2; ++k) {
      REQUIRE(per_class[k] >= p.clean_min_occ);
      REQUIRE(per_class[k] <= p.clean_max_occ);
    }
    for (size_t i = 0; i < ss.events.size(); ++i)
      for (size_t j = i + 1; j < ss.events.size(); ++j)
        if (ss.events[i].class_idx == ss.events[j].class_idx)
          REQUIRE_FALSE(events_overlap(ss.events[i], ss.events[j]));
  }
}

TEST_CASE("clean generation fails loudly when events cannot fit") {
  DatagenParams p;
  p.duration_s = 10.0;
  p.min_event_s = 4.0;
  p.max_event_s = 6.0;
  p.clean_max_occ = 2;
  SplitCounts counts{2, 1, 1};
  REQUIRE_THROWS_AS(generate_dataset(kTwoClasses, Regime::kClean, counts, 5, 16, 20, p),
                    DataError);
}

TEST_CASE("noisy soundscapes draw zero to nine events with repeats allowed") {
  DatagenParams p = quick_params();
  Dataset d = generate_split(992, kTwoClasses, Regime::kNoisy, 400, 16, 20, p);

  int empties = 0;
  bool saw_repeat = false;
  int max_seen = 0;
  for (const Soundscape& ss : d.items) {
    const int n = static_cast<int>(ss.events.size());
    REQUIRE(n <= p.noisy_max_events);
    max_seen = std::max(max_seen, n);
    if (n == 0) ++empties;
    int per_class[2] = {0, 0};
    for (const Event& e : ss.events) ++per_class[e.class_idx];
    saw_repeat = saw_repeat || per_class[0] > 2 || per_class[1] > 2;
  }
  // P(empty) = 1/10; over 400 draws a fraction outside [0.04, 0.18] would be
  // a > 4 sigma event
  const double frac = empty_fraction(d);
  REQUIRE(frac == static_cast<double>(empties) / 400.0);
  REQUIRE(frac >= 0.04);
  REQUIRE(frac <= 0.18);
  REQUIRE(max_seen == 9);
  REQUIRE(saw_repeat);
}

TEST_CASE("generation is deterministic in the seed") {
  DatagenParams p = quick_params();
  Dataset a = generate_split(993, kTwoClasses, Regime::kClean, 5, 16, 20, p);
  Dataset b = generate_split(993, kTwoClasses, Regime::kClean, 5, 16, 20, p);
  Dataset c = generate_split(994, kTwoClasses, Regime::kClean, 5, 16, 20, p);

  REQUIRE(a.items.size() == b.items.size());
  bool any_diff = false;
  for (size_t i = 0; i < a.items.size(); ++i) {
    REQUIRE(a.items[i].features.hash() == b.items[i].features.hash());
    REQUIRE(a.items[i].events.size() == b.items[i].events.size());
    any_diff = any_diff || a.items[i].features.hash() != c.items[i].features.hash();
  }
  REQUIRE(any_diff);
}

TEST_CASE("features are exactly noise plus rendered events") {
  DatagenParams p = quick_params();
  Dataset d = generate_split(995, kTwoClasses, Regime::kClean, 6, 16, 20, p);
  const int total = static_cast<int>(std::lround(p.duration_s)) * 20;
  for (const Soundscape& ss : d.items) {
    Tensorf ev = render_events(ss.events, d.classes, 16, 20, p);
    Tensorf noise = render_noise(Rng::mix(ss.seed, 2), 16, total, p.noise_sigma());
    REQUIRE(ss.features.same_shape(ev));
    for (long long i = 0; i < ev.size(); ++i) REQUIRE(ss.features[i] == noise[i] + ev[i]);
  }
}

TEST_CASE("events land in their class band only") {
  DatagenParams p = quick_params();
  std::vector<Event> events = {{1, 1.0f, 2.0f}};
  Tensorf canvas = render_events(events, kTwoClasses, 16, 20, p);
  // class id 1 with band_width 4 occupies mel rows 4..7
  const int total = canvas.dim(1);
  for (int m = 0; m < 16; ++m)
    for (int f = 0; f < total; ++f) {
      const float v = canvas[static_cast<long long>(m) * total + f];
      const bool in_band = m >= 4 && m < 8;
      const bool in_time = f >= 20 && f < 40;
      if (!in_band || !in_time)
        REQUIRE(v == 0.0f);
      else
        REQUIRE(v > 0.0f);
    }
}

TEST_CASE("rendering rejects a class band outside the mel range") {
  DatagenParams p = quick_params();
  std::vector<EventClass> classes = {{3, "high"}};
  std::vector<Event> events = {{0, 1.0f, 2.0f}};
  REQUIRE_THROWS_AS(render_events(events, classes, 12, 20, p), ConfigError);
  SplitCounts counts{1, 1, 1};
  REQUIRE_THROWS_AS(generate_dataset(classes, Regime::kClean, counts, 5, 12, 20, p),
                    ConfigError);
}

TEST_CASE("noise statistics follow the snr setting") {
  const double sigma = DatagenParams{}.noise_sigma();
  Tensorf noise = render_noise(77, 64, 1000, sigma);
  double mean = 0, var = 0;
  for (long long i = 0; i < noise.size(); ++i) mean += noise[i];
  mean /= static_cast<double>(noise.size());
  for (long long i = 0; i < noise.size(); ++i) {
    const double d = noise[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(noise.size());
  REQUIRE(std::fabs(mean) <= 0.01);
  REQUIRE(std::fabs(std::sqrt(var) - sigma) <= 0.01);
}

TEST_CASE("segment labels follow half-open overlap") {
  DatagenParams p;  // 10 segments of 1 s
  Soundscape ss;

  ss.events = {{0, 3.0f, 4.0f}};
  Tensorf l1 = segment_labels(ss, 2, p);
  for (int s = 0; s < 10; ++s) {
    REQUIRE(l1[s * 2 + 0] == (s == 3 ? 1.0f : 0.0f));
    REQUIRE(l1[s * 2 + 1] == 0.0f);
  }

  ss.events = {{1, 2.3f, 4.7f}};
  Tensorf l2 = segment_labels(ss, 2, p);
  for (int s = 0; s < 10; ++s)
    REQUIRE(l2[s * 2 + 1] == (s >= 2 && s <= 4 ? 1.0f : 0.0f));

  ss.events = {};
  Tensorf l3 = segment_labels(ss, 2, p);
  for (long long i = 0; i < l3.size(); ++i) REQUIRE(l3[i] == 0.0f);

  ss.events = {{5, 1.0f, 2.0f}};
  REQUIRE_THROWS_AS(segment_labels(ss, 2, p), DataError);
}

TEST_CASE("windows are raw slices that reassemble the soundscape") {
  DatagenParams p = quick_params();
  Dataset d = generate_split(996, kTwoClasses, Regime::kClean, 2, 16, 20, p);
  const Soundscape& ss = d.items[0];
  Tensorf labels = segment_labels(ss, 2, p);
  std::vector<Example> exs = window_examples(ss, labels, 16, 20);
  REQUIRE(exs.size() == 6);

  const int total = ss.features.dim(1);
  for (int w = 0; w < 6; ++w) {
    REQUIRE(exs[static_cast<size_t>(w)].x.shape() == std::vector<int>{16, 20});
    for (int m = 0; m < 16; ++m)
      for (int f = 0; f < 20; ++f)
        REQUIRE(exs[static_cast<size_t>(w)].x[m * 20 + f] ==
                ss.features[static_cast<long long>(m) * total + w * 20 + f]);
    for (int k = 0; k < 2; ++k)
      REQUIRE(exs[static_cast<size_t>(w)].y[k] == labels[w * 2 + k]);
  }

  REQUIRE_THROWS_AS(window_examples(ss, labels, 17, 20), DataError);
}

TEST_CASE("label projection selects and reorders dataset columns") {
  DatagenParams p = quick_params();
  Dataset d = generate_split(997, kTwoClasses, Regime::kClean, 3, 16, 20, p);

  REQUIRE(label_projection(d, {"beta", "alpha"}) == std::vector<int>{1, 0});
  REQUIRE_THROWS_WITH(label_projection(d, {"zeta"}),
                      Catch::Matchers::ContainsSubstring("zeta"));

  auto full = make_examples(d, {"alpha", "beta"}, 16, 20, p);
  auto only_beta = make_examples(d, {"beta"}, 16, 20, p);
  REQUIRE(full.size() == only_beta.size());
  for (size_t i = 0; i < full.size(); ++i) {
    REQUIRE(only_beta[i].y.dim(0) == 1);
    REQUIRE(only_beta[i].y[0] == full[i].y[1]);
    // distractor events stay in the features
    for (long long j = 0; j < full[i].x.size(); ++j)
      REQUIRE(only_beta[i].x[j] == full[i].x[j]);
  }
}

TEST_CASE("feature normalization matches a hand computation with clamping") {
  std::vector<Example> exs;
  Example e1{Tensorf({1, 2}), Tensorf({1})};
  e1.x[0] = 1.0f;
  e1.x[1] = 3.0f;
  Example e2{Tensorf({1, 2}), Tensorf({1})};
  e2.x[0] = 100.0f;  // clamps to 6
  e2.x[1] = -2.0f;
  exs.push_back(e1);
  exs.push_back(e2);

  const FeatureNorm n = compute_feature_norm(exs);
  const double vals[4] = {1.0, 3.0, 6.0, -2.0};
  double mean = 0;
  for (double v : vals) mean += v / 4.0;
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean) / 4.0;
  REQUIRE(std::fabs(static_cast<double>(n.mean) - mean) <= 1e-6);
  REQUIRE(std::fabs(static_cast<double>(n.stddev) - std::sqrt(var)) <= 1e-6);

  REQUIRE_THROWS_AS(compute_feature_norm({}), DataError);
}

TEST_CASE("datasets round-trip through their binary format") {
  DatagenParams p = quick_params();
  Dataset d = generate_split(998, kTwoClasses, Regime::kNoisy, 4, 16, 20, p);
  const std::string path = "/tmp/sedil_test_dataset.bin";
  dataset_save(d, path);

  Dataset back = dataset_load(path);
  REQUIRE(back.regime == d.regime);
  REQUIRE(back.classes.size() == d.classes.size());
  for (size_t i = 0; i < d.classes.size(); ++i) {
    REQUIRE(back.classes[i].id == d.classes[i].id);
    REQUIRE(back.classes[i].name == d.classes[i].name);
  }
  REQUIRE(back.items.size() == d.items.size());
  for (size_t i = 0; i < d.items.size(); ++i) {
    REQUIRE(back.items[i].events.size() == d.items[i].events.size());
    for (size_t j = 0; j < d.items[i].events.size(); ++j) {
      REQUIRE(back.items[i].events[j].class_idx == d.items[i].events[j].class_idx);
      REQUIRE(back.items[i].events[j].onset_s == d.items[i].events[j].onset_s);
      REQUIRE(back.items[i].events[j].offset_s == d.items[i].events[j].offset_s);
    }
    REQUIRE(back.items[i].features.hash() == d.items[i].features.hash());
  }

  const std::string path2 = "/tmp/sedil_test_dataset2.bin";
  dataset_save(back, path2);
  REQUIRE(bin::read_file(path) == bin::read_file(path2));
  std::remove(path2.c_str());

  const std::string good = bin::read_file(path);
  {
    std::string bad = good;
    bad[0] = 'Q';
    bin::write_file(path, bad);
    REQUIRE_THROWS_WITH(dataset_load(path), Catch::Matchers::ContainsSubstring("magic"));
  }
  {
    std::string bad = good;
    bad[4] = 7;
    bin::write_file(path, bad);
    REQUIRE_THROWS_WITH(dataset_load(path), Catch::Matchers::ContainsSubstring("version"));
  }
  {
    std::string bad = good;
    bad[8] = 5;  // regime byte
    bin::write_file(path, bad);
    REQUIRE_THROWS_WITH(dataset_load(path), Catch::Matchers::ContainsSubstring("regime"));
  }
  {
    bin::write_file(path, good.substr(0, good.size() - 10));
    REQUIRE_THROWS_AS(dataset_load(path), DataError);
  }
  {
    bin::write_file(path, good + "x");
    REQUIRE_THROWS_WITH(dataset_load(path), Catch::Matchers::ContainsSubstring("trailing"));
  }
  std::remove(path.c_str());
}

TEST_CASE("event tables export as csv") {
  Dataset d;
  d.regime = Regime::kClean;
  d.classes = {{0, "alpha"}, {1, "beta"}};
  Soundscape s0;
  s0.events = {{0, 0.5f, 1.25f}, {1, 2.0f, 3.5f}};
  Soundscape s1;
  s1.events = {{1, 0.125f, 0.625f}};
  d.items = {s0, s1};

  const std::string path = "/tmp/sedil_test_events.csv";
  export_events_csv(d, path);
  REQUIRE(bin::read_file(path) ==
          "file_id,class_name,onset_s,offset_s\n"
          "0,alpha,0.500,1.250\n"
          "0,beta,2.000,3.500\n"
          "1,beta,0.125,0.625\n");
  std::remove(path.c_str());
}

TEST_CASE("dataset splits are disjoint streams of one generator") {
  DatagenParams p = quick_params();
  SplitCounts counts{3, 2, 2};
  DatasetSplits s = generate_dataset(kTwoClasses, Regime::kClean, counts, 999, 16, 20, p);

  REQUIRE(s.train.items.size() == 3);
  REQUIRE(s.val.items.size() == 2);
  REQUIRE(s.test.items.size() == 2);

  DatasetSplits again = generate_dataset(kTwoClasses, Regime::kClean, counts, 999, 16, 20, p);
  REQUIRE(s.train.items[0].features.hash() == again.train.items[0].features.hash());
  REQUIRE(s.train.items[0].features.hash() != s.val.items[0].features.hash());
  REQUIRE(s.val.items[0].features.hash() != s.test.items[0].features.hash());
}
