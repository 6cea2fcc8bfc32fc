#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "sedil/io.hpp"
#include "sedil/rng.hpp"
#include "sedil/tensor.hpp"

namespace sedil {

enum class Regime : uint8_t { kClean = 0, kNoisy = 1 };

inline std::string regime_name(Regime r) { return r == Regime::kClean ? "clean" : "noisy"; }

inline Regime parse_regime(const std::string& s) {
  if (s == "clean") return Regime::kClean;
  if (s == "noisy") return Regime::kNoisy;
  throw ConfigError("unknown regime '" + s + "', expected clean or noisy");
}

struct EventClass {
  int id = 0;  // global class id, fixes the prototype across datasets
  std::string name;
};

struct Event {
  int class_idx = 0;  // index into the dataset's class table
  float onset_s = 0;
  float offset_s = 0;
};

struct Soundscape {
  uint64_t seed = 0;  // per-soundscape stream seed; not serialized
  std::vector<Event> events;
  Tensorf features;  // [mels, duration_s * frames_per_second]
};

struct Dataset {
  Regime regime = Regime::kClean;
  std::vector<EventClass> classes;
  std::vector<Soundscape> items;
};

struct DatasetSplits {
  Dataset train, val, test;
};

struct SplitCounts {
  int train = 0, val = 0, test = 0;
};

struct DatagenParams {
  double duration_s = 10.0;
  double segment_s = 1.0;
  double min_event_s = 0.5;
  double max_event_s = 2.0;
  double snr_db = 10.0;  // prototype peak over noise sigma; floor is 0 dB
  int band_width = 4;    // mel bins per class prototype
  int clean_min_occ = 1;
  int clean_max_occ = 2;
  int noisy_max_events = 9;

  void validate() const {
    if (duration_s <= 0 || segment_s <= 0 ||
        std::lround(duration_s / segment_s) * segment_s != duration_s)
      throw ConfigError("duration must be a whole number of segments");
    if (min_event_s <= 0 || min_event_s > max_event_s || max_event_s > duration_s)
      throw ConfigError("event duration range [" + std::to_string(min_event_s) + ", " +
                        std::to_string(max_event_s) + "] is invalid for a " +
                        std::to_string(duration_s) + "s soundscape");
    if (snr_db < 0.0)
      throw ConfigError("snr_db " + std::to_string(snr_db) + " is below the 0 dB floor");
    if (band_width < 1) throw ConfigError("band_width must be >= 1");
    if (clean_min_occ < 1 || clean_min_occ > clean_max_occ)
      throw ConfigError("clean occurrence bounds must satisfy 1 <= min <= max");
    if (noisy_max_events < 0) throw ConfigError("noisy_max_events must be >= 0");
  }

  int num_segments() const { return static_cast<int>(std::lround(duration_s / segment_s)); }
  double noise_sigma() const { return std::pow(10.0, -snr_db / 20.0); }
};

// ---------------------------------------------------------------------------
// class prototypes
// ---------------------------------------------------------------------------

// A prototype is a pure function of the global class id: a dedicated mel band
// with fixed per-bin weights plus a sinusoidal temporal envelope. Using the id
// (never the dataset seed) keeps class identity stable across datasets, which
// is what makes transfer between D_S and D_T meaningful.
struct ClassPrototype {
  int band_lo = 0;
  std::vector<double> band_profile;  // band_width weights in [0.5, 1]
  double mod_rate_hz = 0;
  double phase = 0;
};

inline ClassPrototype class_prototype(int global_id, const DatagenParams& p) {
  Rng rng(Rng::mix(0x5ed11c1a55ull, static_cast<uint64_t>(global_id)));
  ClassPrototype proto;
  proto.band_lo = global_id * p.band_width;
  proto.band_profile.resize(static_cast<size_t>(p.band_width));
  for (auto& w : proto.band_profile) w = rng.uniform(0.5, 1.0);
  proto.mod_rate_hz = rng.uniform(1.0, 4.0);
  proto.phase = rng.uniform(0.0, 6.283185307179586);
  return proto;
}

// Envelope in [0.1, 1.0]; strictly positive so an active event is present in
// every frame it covers.
inline double prototype_envelope(const ClassPrototype& proto, double t_rel_s) {
  return 0.55 + 0.45 * std::sin(6.283185307179586 * proto.mod_rate_hz * t_rel_s + proto.phase);
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

// Renders only the event contributions onto a zero canvas. Generation adds
// this to the noise canvas with one addition per cell, so
// features == noise + events holds bit-exactly.
inline Tensorf render_events(const std::vector<Event>& events,
                             const std::vector<EventClass>& classes, int mels,
                             int frames_per_s, const DatagenParams& p) {
  const int total = static_cast<int>(std::lround(p.duration_s)) * frames_per_s;
  Tensorf canvas({mels, total});
  for (const Event& e : events) {
    const EventClass& cls = classes.at(static_cast<size_t>(e.class_idx));
    const ClassPrototype proto = class_prototype(cls.id, p);
    if (proto.band_lo + p.band_width > mels)
      throw ConfigError("class '" + cls.name + "' (id " + std::to_string(cls.id) +
                        ") needs mel band up to " +
                        std::to_string(proto.band_lo + p.band_width) + " but input has " +
                        std::to_string(mels) + " mels");
    const int f_lo = std::max(0L, std::lround(static_cast<double>(e.onset_s) * frames_per_s));
    const int f_hi = std::min(static_cast<long>(total),
                              std::lround(static_cast<double>(e.offset_s) * frames_per_s));
    for (int f = static_cast<int>(f_lo); f < f_hi; ++f) {
      const double t_rel = static_cast<double>(f - f_lo) / frames_per_s;
      const double env = prototype_envelope(proto, t_rel);
      for (int b = 0; b < p.band_width; ++b) {
        const long long at = static_cast<long long>(proto.band_lo + b) * total + f;
        canvas[at] += static_cast<float>(proto.band_profile[static_cast<size_t>(b)] * env);
      }
    }
  }
  return canvas;
}

inline Tensorf render_noise(uint64_t noise_seed, int mels, int total_frames, double sigma) {
  Rng rng(noise_seed);
  Tensorf canvas({mels, total_frames});
  for (long long i = 0; i < canvas.size(); ++i)
    canvas[i] = static_cast<float>(sigma * rng.normal());
  return canvas;
}

// ---------------------------------------------------------------------------
// generation
// ---------------------------------------------------------------------------

namespace detail {

inline bool overlaps(float a_on, float a_off, float b_on, float b_off) {
  return a_on < b_off && b_on < a_off;
}

inline std::vector<Event> draw_events(Rng& rng, const std::vector<EventClass>& classes,
                                      Regime regime, const DatagenParams& p) {
  const int K = static_cast<int>(classes.size());
  std::vector<Event> events;
  if (regime == Regime::kClean) {
    for (int ci = 0; ci < K; ++ci) {
      const int occ =
          p.clean_min_occ +
          static_cast<int>(rng.below(static_cast<uint64_t>(p.clean_max_occ - p.clean_min_occ + 1)));
      std::vector<std::pair<float, float>> placed;
      for (int o = 0; o < occ; ++o) {
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
          const double d = rng.uniform(p.min_event_s, p.max_event_s);
          const double on = rng.uniform(0.0, p.duration_s - d);
          const auto onset = static_cast<float>(on);
          const auto offset = static_cast<float>(on + d);
          ok = true;
          for (const auto& [po, pf] : placed)
            if (overlaps(onset, offset, po, pf)) {
              ok = false;
              break;
            }
          if (ok) {
            placed.emplace_back(onset, offset);
            events.push_back({ci, onset, offset});
          }
        }
        if (!ok)
          throw DataError("could not place occurrence " + std::to_string(o + 1) + " of class '" +
                          classes[static_cast<size_t>(ci)].name +
                          "' without same-class overlap after 100 attempts");
      }
    }
  } else {
    const int total = static_cast<int>(rng.below(static_cast<uint64_t>(p.noisy_max_events + 1)));
    for (int e = 0; e < total; ++e) {
      const int ci = static_cast<int>(rng.below(static_cast<uint64_t>(K)));
      const double d = rng.uniform(p.min_event_s, p.max_event_s);
      const double on = rng.uniform(0.0, p.duration_s - d);
      events.push_back({ci, static_cast<float>(on), static_cast<float>(on + d)});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.onset_s != b.onset_s) return a.onset_s < b.onset_s;
    if (a.class_idx != b.class_idx) return a.class_idx < b.class_idx;
    return a.offset_s < b.offset_s;
  });
  return events;
}

}  // namespace detail

inline Soundscape generate_soundscape(uint64_t seed, const std::vector<EventClass>& classes,
                                      Regime regime, int mels, int frames_per_s,
                                      const DatagenParams& p) {
  Soundscape ss;
  ss.seed = seed;
  Rng rng_events(Rng::mix(seed, 1));
  ss.events = detail::draw_events(rng_events, classes, regime, p);
  Tensorf ev = render_events(ss.events, classes, mels, frames_per_s, p);
  Tensorf noise = render_noise(Rng::mix(seed, 2), mels,
                               static_cast<int>(std::lround(p.duration_s)) * frames_per_s,
                               p.noise_sigma());
  ss.features = Tensorf(ev.shape());
  for (long long i = 0; i < ev.size(); ++i) ss.features[i] = noise[i] + ev[i];
  return ss;
}

inline Dataset generate_split(uint64_t split_seed, const std::vector<EventClass>& classes,
                              Regime regime, int count, int mels, int frames_per_s,
                              const DatagenParams& p) {
  Dataset d;
  d.regime = regime;
  d.classes = classes;
  d.items.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    d.items.push_back(generate_soundscape(Rng::mix(split_seed, static_cast<uint64_t>(i)),
                                          classes, regime, mels, frames_per_s, p));
  return d;
}

inline DatasetSplits generate_dataset(const std::vector<EventClass>& classes, Regime regime,
                                      SplitCounts counts, uint64_t seed, int mels,
                                      int frames_per_s, const DatagenParams& p) {
  p.validate();
  if (classes.empty()) throw ConfigError("need at least one event class");
  if (counts.train < 1 || counts.val < 1 || counts.test < 1)
    throw ConfigError("every split needs at least 1 soundscape, got " +
                      std::to_string(counts.train) + "/" + std::to_string(counts.val) + "/" +
                      std::to_string(counts.test));
  if (regime == Regime::kClean &&
      p.clean_max_occ * p.max_event_s > p.duration_s)
    throw DataError("duration budget exceeded: " + std::to_string(p.clean_max_occ) +
                    " occurrences of up to " + std::to_string(p.max_event_s) +
                    "s cannot be placed without overlap in " + std::to_string(p.duration_s) +
                    "s");
  for (const auto& c : classes)
    if ((c.id + 1) * p.band_width > mels)
      throw ConfigError("class '" + c.name + "' (id " + std::to_string(c.id) +
                        ") does not fit: need " + std::to_string((c.id + 1) * p.band_width) +
                        " mels, have " + std::to_string(mels));

  DatasetSplits s;
  s.train = generate_split(Rng::mix(seed, 101), classes, regime, counts.train, mels,
                           frames_per_s, p);
  s.val = generate_split(Rng::mix(seed, 102), classes, regime, counts.val, mels, frames_per_s, p);
  s.test =
      generate_split(Rng::mix(seed, 103), classes, regime, counts.test, mels, frames_per_s, p);
  return s;
}

// ---------------------------------------------------------------------------
// labels and windows
// ---------------------------------------------------------------------------

// [num_segments, K] multi-label matrix; segment s is positive for class k iff
// some event of class k overlaps [s, s+1) with positive length.
inline Tensorf segment_labels(const Soundscape& ss, int num_classes, const DatagenParams& p) {
  const int S = p.num_segments();
  Tensorf labels({S, num_classes});
  for (const Event& e : ss.events) {
    if (e.class_idx < 0 || e.class_idx >= num_classes)
      throw DataError("event class index " + std::to_string(e.class_idx) + " out of range");
    for (int s = 0; s < S; ++s) {
      const auto lo = static_cast<float>(s) * static_cast<float>(p.segment_s);
      const auto hi = lo + static_cast<float>(p.segment_s);
      if (e.onset_s < hi && e.offset_s > lo)
        labels[static_cast<long long>(s) * num_classes + e.class_idx] = 1.0f;
    }
  }
  return labels;
}

struct Example {
  Tensorf x;  // [mels, frames_per_s], a raw feature slice
  Tensorf y;  // [K] multi-label row
};

// Non-overlapping one-second windows paired with their segment label rows.
// Windows are raw slices: concatenating them reproduces the features exactly.
inline std::vector<Example> window_examples(const Soundscape& ss, const Tensorf& labels,
                                            int mels, int frames_per_s) {
  const int S = labels.dim(0);
  const int K = labels.dim(1);
  if (ss.features.ndim() != 2 || ss.features.dim(0) != mels ||
      ss.features.dim(1) != S * frames_per_s)
    throw DataError("soundscape features " + shape_str(ss.features.shape()) +
                    " do not match " + std::to_string(S) + " windows of " + std::to_string(mels) +
                    "x" + std::to_string(frames_per_s));
  std::vector<Example> out;
  out.reserve(static_cast<size_t>(S));
  const int total = ss.features.dim(1);
  for (int w = 0; w < S; ++w) {
    Example ex{Tensorf({mels, frames_per_s}), Tensorf({K})};
    for (int m = 0; m < mels; ++m)
      for (int f = 0; f < frames_per_s; ++f)
        ex.x[static_cast<long long>(m) * frames_per_s + f] =
            ss.features[static_cast<long long>(m) * total + w * frames_per_s + f];
    for (int k = 0; k < K; ++k) ex.y[k] = labels[static_cast<long long>(w) * K + k];
    out.push_back(std::move(ex));
  }
  return out;
}

// Maps the requested class names onto dataset class-table columns.
inline std::vector<int> label_projection(const Dataset& d,
                                         const std::vector<std::string>& class_names) {
  std::vector<int> proj;
  proj.reserve(class_names.size());
  for (const auto& want : class_names) {
    int found = -1;
    for (size_t i = 0; i < d.classes.size(); ++i)
      if (d.classes[i].name == want) {
        found = static_cast<int>(i);
        break;
      }
    if (found < 0) throw DataError("class '" + want + "' not present in dataset");
    proj.push_back(found);
  }
  return proj;
}

// All windows of a dataset with labels restricted to the named classes, in
// soundscape order. Events of classes outside the subset stay in the features
// and act as distractors.
inline std::vector<Example> make_examples(const Dataset& d,
                                          const std::vector<std::string>& class_names, int mels,
                                          int frames_per_s, const DatagenParams& p) {
  const std::vector<int> proj = label_projection(d, class_names);
  const int K = static_cast<int>(proj.size());
  std::vector<Example> out;
  out.reserve(d.items.size() * static_cast<size_t>(p.num_segments()));
  for (const Soundscape& ss : d.items) {
    Tensorf full = segment_labels(ss, static_cast<int>(d.classes.size()), p);
    Tensorf sub({full.dim(0), K});
    for (int s = 0; s < full.dim(0); ++s)
      for (int k = 0; k < K; ++k)
        sub[static_cast<long long>(s) * K + k] =
            full[static_cast<long long>(s) * full.dim(1) + proj[static_cast<size_t>(k)]];
    for (auto& ex : window_examples(ss, sub, mels, frames_per_s)) out.push_back(std::move(ex));
  }
  return out;
}

inline double empty_fraction(const Dataset& d) {
  if (d.items.empty()) return 0.0;
  size_t empty = 0;
  for (const auto& ss : d.items)
    if (ss.events.empty()) ++empty;
  return static_cast<double>(empty) / static_cast<double>(d.items.size());
}

// ---------------------------------------------------------------------------
// feature normalization
// ---------------------------------------------------------------------------

struct FeatureNorm {
  float mean = 0.0f;
  float stddev = 1.0f;
};

// Statistics of the clamped train-split features; applied by the model to
// every split so train/val/test share one input space.
inline FeatureNorm compute_feature_norm(const std::vector<Example>& train_examples) {
  if (train_examples.empty()) throw DataError("cannot compute feature norm of an empty set");
  double sum = 0.0, sq = 0.0;
  long long n = 0;
  const auto c = static_cast<float>(kFeatureClamp);
  for (const Example& ex : train_examples) {
    for (long long i = 0; i < ex.x.size(); ++i) {
      float v = ex.x[i];
      v = v < -c ? -c : (v > c ? c : v);
      sum += v;
      sq += static_cast<double>(v) * v;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(sq / static_cast<double>(n) - mean * mean, 1e-12);
  return {static_cast<float>(mean), static_cast<float>(std::sqrt(var))};
}

// ---------------------------------------------------------------------------
// dataset serialization
// ---------------------------------------------------------------------------

inline constexpr char kDatasetMagic[5] = "SEDD";
inline constexpr uint32_t kDatasetVersion = 1;

inline void dataset_save(const Dataset& d, const std::string& path) {
  bin::Writer w;
  w.buf.append(kDatasetMagic);
  w.u32(kDatasetVersion);
  w.u8(static_cast<uint8_t>(d.regime));
  w.u32(static_cast<uint32_t>(d.classes.size()));
  for (const auto& c : d.classes) {
    w.u32(static_cast<uint32_t>(c.id));
    w.str(c.name);
  }
  w.u32(static_cast<uint32_t>(d.items.size()));
  for (const auto& ss : d.items) {
    w.u32(static_cast<uint32_t>(ss.events.size()));
    for (const auto& e : ss.events) {
      w.u32(static_cast<uint32_t>(e.class_idx));
      w.f32(e.onset_s);
      w.f32(e.offset_s);
    }
    w.tensor("features", ss.features);
  }
  bin::write_file(path, w.buf);
}

inline Dataset dataset_load(const std::string& path) {
  const std::string buf = bin::read_file(path);
  bin::Reader r(buf);
  r.need(4, "dataset magic");
  const std::string magic = buf.substr(r.pos, 4);
  r.pos += 4;
  if (magic != kDatasetMagic)
    throw DataError("dataset magic mismatch: got '" + magic + "', expected '" + kDatasetMagic +
                    "'");
  const uint32_t version = r.u32("dataset version");
  if (version != kDatasetVersion)
    throw DataError("unsupported dataset version " + std::to_string(version) + ", expected " +
                    std::to_string(kDatasetVersion));

  Dataset d;
  const uint8_t regime = r.u8("regime");
  if (regime > 1) throw DataError("unknown regime byte " + std::to_string(regime));
  d.regime = static_cast<Regime>(regime);
  const uint32_t nclasses = r.u32("class count");
  for (uint32_t i = 0; i < nclasses; ++i) {
    EventClass c;
    c.id = static_cast<int>(r.u32("class id"));
    c.name = r.str("class name");
    d.classes.push_back(std::move(c));
  }
  const uint32_t nitems = r.u32("soundscape count");
  for (uint32_t i = 0; i < nitems; ++i) {
    const std::string ctx = "soundscape " + std::to_string(i);
    Soundscape ss;
    const uint32_t nev = r.u32(ctx + " event count");
    for (uint32_t e = 0; e < nev; ++e) {
      Event ev;
      ev.class_idx = static_cast<int>(r.u32(ctx + " event class"));
      if (ev.class_idx >= static_cast<int>(nclasses))
        throw DataError(ctx + " references class index " + std::to_string(ev.class_idx) +
                        " outside the class table");
      ev.onset_s = r.f32(ctx + " event onset");
      ev.offset_s = r.f32(ctx + " event offset");
      ss.events.push_back(ev);
    }
    auto [name, t] = r.tensor(ctx);
    if (name != "features") throw DataError(ctx + " has unexpected tensor '" + name + "'");
    ss.features = std::move(t);
    d.items.push_back(std::move(ss));
  }
  if (!r.eof()) throw DataError("trailing bytes after soundscape table in '" + path + "'");
  return d;
}

inline void export_events_csv(const Dataset& d, const std::string& path) {
  std::string out = "file_id,class_name,onset_s,offset_s\n";
  char line[160];
  for (size_t i = 0; i < d.items.size(); ++i)
    for (const auto& e : d.items[i].events) {
      std::snprintf(line, sizeof line, "%zu,%s,%.3f,%.3f\n", i,
                    d.classes[static_cast<size_t>(e.class_idx)].name.c_str(),
                    static_cast<double>(e.onset_s), static_cast<double>(e.offset_s));
      out += line;
    }
  bin::write_file(path, out);
}

}  // namespace sedil
