#pragma once

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "sedil/adapter.hpp"
#include "sedil/checkpoint.hpp"
#include "sedil/datagen.hpp"
#include "sedil/metrics.hpp"
#include "sedil/model.hpp"
#include "sedil/trainer.hpp"

namespace sedil {

// One full run: master seed, the global class list (position = global class
// id, which fixes each prototype), regime, and every tunable. Defaults are
// desk scale so a leave-one-out matrix finishes in minutes on one core; the
// SedCnnConfig type itself defaults to the full-size 128x128x64 geometry.
struct RunConfig {
  uint64_t seed = 7;
  std::vector<std::string> classes = {"keyboard", "door_slam", "phone_ringing", "door_knock"};
  Regime regime = Regime::kClean;
  SplitCounts counts{200, 50, 50};
  SedCnnConfig model;
  int adapter_hidden = kAdapterHidden;
  AdapterInput adapter_input = AdapterInput::kLogits;
  TrainConfig train;
  DatagenParams datagen;
  std::string out_dir = "runs";
  int workers = 1;

  RunConfig() {
    model.input_mels = 24;
    model.input_frames = 24;
    model.conv_filters = 6;
  }

  void validate() const {
    if (classes.size() < 2) throw ConfigError("need at least 2 classes for a leave-one-out run");
    for (size_t i = 0; i < classes.size(); ++i)
      for (size_t j = i + 1; j < classes.size(); ++j)
        if (classes[i] == classes[j]) throw ConfigError("duplicate class '" + classes[i] + "'");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    datagen.validate();
    SedCnnConfig m = model;
    m.num_classes = static_cast<int>(classes.size());
    m.validate();
  }

  std::vector<EventClass> event_classes() const {
    std::vector<EventClass> out;
    for (size_t i = 0; i < classes.size(); ++i)
      out.push_back({static_cast<int>(i), classes[i]});
    return out;
  }
};

struct ScenarioReport {
  std::string scenario;   // source set, e.g. "C1C2C3"
  std::string new_class;  // held-out class name
  double ms_ds = 0;
  double simple_ds = 0, simple_new = 0, simple_all = 0;
  double adapter_ds = 0, adapter_new = 0, adapter_all = 0;
  double f1_a = 0, f1_b = 0, f1_c = 0;
};

struct MatrixResult {
  std::vector<ScenarioReport> scenarios;
  ScenarioReport overall;  // arithmetic mean of the scenario rows
};

namespace detail {

inline std::string scenario_name(int num_classes, int held_out) {
  std::string s;
  for (int i = 0; i < num_classes; ++i)
    if (i != held_out) s += "C" + std::to_string(i + 1);
  return s;
}

inline uint64_t scenario_seed(uint64_t master, int held_out, uint64_t purpose) {
  return Rng::mix(Rng::mix(master, static_cast<uint64_t>(held_out) + 1), purpose);
}

}  // namespace detail

struct ScenarioArtifacts {
  ScenarioReport report;
  TrainResult source_log, simple_log, adapter_log;
};

// One leave-one-out scenario: train the source on the N remaining classes
// over D_S, then run both incremental methods on a fresh D_T carrying all
// N+1 classes, and score everything on the held-out test splits.
inline ScenarioArtifacts run_scenario(const RunConfig& cfg, int held_out) {
  cfg.validate();
  const int K = static_cast<int>(cfg.classes.size());
  if (held_out < 0 || held_out >= K)
    throw ConfigError("held-out index " + std::to_string(held_out) + " out of range");
  const std::string& new_name = cfg.classes[static_cast<size_t>(held_out)];

  std::vector<EventClass> all_classes = cfg.event_classes();
  std::vector<EventClass> src_classes;
  std::vector<std::string> src_names;
  for (const auto& c : all_classes)
    if (c.id != held_out) {
      src_classes.push_back(c);
      src_names.push_back(c.name);
    }

  const auto seed = [&](uint64_t purpose) {
    return detail::scenario_seed(cfg.seed, held_out, purpose);
  };

  const int mels = cfg.model.input_mels, frames = cfg.model.input_frames;
  DatasetSplits ds = generate_dataset(src_classes, cfg.regime, cfg.counts, seed(1), mels,
                                      frames, cfg.datagen);
  DatasetSplits dt = generate_dataset(all_classes, cfg.regime, cfg.counts, seed(2), mels,
                                      frames, cfg.datagen);

  ScenarioArtifacts art;
  art.report.scenario = detail::scenario_name(K, held_out);
  art.report.new_class = new_name;
  const double thr = cfg.train.threshold;

  // source model on D_S
  SedCnnConfig mc = cfg.model;
  mc.num_classes = K - 1;
  Rng init_rng(seed(3));
  SedCnn<float> source = build_source<float>(mc, src_names, init_rng);
  Rng src_train_rng(seed(4));
  art.source_log = train_source(source, ds.train, ds.val, cfg.train, cfg.datagen, src_train_rng);
  EvalData ms_ev = evaluate_model(source, ds.test, cfg.datagen);
  art.report.ms_ds = f1_segment(ms_ev.preds, ms_ev.refs, thr).micro_f1;

  std::vector<int> ds_subset, all_subset;
  for (int i = 0; i < K - 1; ++i) ds_subset.push_back(i);
  const std::vector<int> new_subset = {K - 1};

  // simple transfer learning on D_T
  {
    Rng mig_rng(seed(5));
    SedCnn<float> simple = migrate_weights(source, new_name, mig_rng);
    Rng train_rng(seed(6));
    art.simple_log = train_simple_tl(simple, dt.train, dt.val, cfg.train, cfg.datagen, train_rng);
    EvalData ev = evaluate_model(simple, dt.test, cfg.datagen);
    art.report.simple_ds = f1_segment(ev.preds, ev.refs, thr, ds_subset).micro_f1;
    art.report.simple_new = f1_segment(ev.preds, ev.refs, thr, new_subset).micro_f1;
    art.report.simple_all = f1_segment(ev.preds, ev.refs, thr).micro_f1;
  }

  // adapter transfer learning on D_T
  {
    Rng mig_rng(seed(7));
    SedCnn<float> target = migrate_weights(source, new_name, mig_rng);
    Rng adapter_rng(seed(8));
    NeuralAdapter<float> adapter =
        make_bridge_adapter<float>(K - 1, cfg.adapter_hidden, K, cfg.adapter_input, adapter_rng);
    AdapterComposite<float> comp = compose(source, std::move(adapter), std::move(target));
    Rng train_rng(seed(9));
    art.adapter_log = train_adapter_tl(comp, dt.train, dt.val, cfg.train, cfg.datagen, train_rng);

    AbcEvalData ev = evaluate_composite_abc(comp, dt.test, cfg.datagen);
    art.report.adapter_ds = f1_segment(ev.preds_c, ev.refs, thr, ds_subset).micro_f1;
    art.report.adapter_new = f1_segment(ev.preds_c, ev.refs, thr, new_subset).micro_f1;
    art.report.adapter_all = f1_segment(ev.preds_c, ev.refs, thr).micro_f1;
    art.report.f1_a = f1_segment(ev.preds_a, ev.refs, thr).micro_f1;
    art.report.f1_b = f1_segment(ev.preds_b, ev.refs, thr).micro_f1;
    art.report.f1_c = f1_segment(ev.preds_c, ev.refs, thr).micro_f1;
  }
  return art;
}

// ---------------------------------------------------------------------------
// report emission
// ---------------------------------------------------------------------------

inline const char* kReportHeader =
    "scenario, ms_ds, simple_ds, simple_new, simple_all, adapter_ds, adapter_new, adapter_all, "
    "f1_A, f1_B, f1_C";

inline std::string report_row_csv(const ScenarioReport& r) {
  char line[256];
  std::snprintf(line, sizeof line,
                "%s, %.4f, %.4f, %.4f, %.4f, %.4f, %.4f, %.4f, %.4f, %.4f, %.4f",
                r.scenario.c_str(), r.ms_ds, r.simple_ds, r.simple_new, r.simple_all,
                r.adapter_ds, r.adapter_new, r.adapter_all, r.f1_a, r.f1_b, r.f1_c);
  return line;
}

enum class ReportFormat { kCsv, kMarkdown };

inline void emit_report(const std::vector<ScenarioReport>& reports, ReportFormat format,
                        const std::string& path) {
  std::string out;
  if (format == ReportFormat::kCsv) {
    out = std::string(kReportHeader) + "\n";
    for (const auto& r : reports) out += report_row_csv(r) + "\n";
  } else {
    out += "| Scenario | M_S D_S | Simple D_S | Simple New | Simple All | Adapter D_S | "
           "Adapter New | Adapter All | A | B | C |\n";
    out += "|---|---|---|---|---|---|---|---|---|---|---|\n";
    char line[256];
    for (const auto& r : reports) {
      std::snprintf(line, sizeof line,
                    "| %s | %.4f | %.4f | %.4f | %.4f | %.4f | %.4f | %.4f | %.4f | %.4f | "
                    "%.4f |\n",
                    r.scenario.c_str(), r.ms_ds, r.simple_ds, r.simple_new, r.simple_all,
                    r.adapter_ds, r.adapter_new, r.adapter_all, r.f1_a, r.f1_b, r.f1_c);
      out += line;
    }
  }
  bin::write_file(path, out);
}

inline std::vector<ScenarioReport> parse_report_csv(const std::string& path) {
  const std::string buf = bin::read_file(path);
  std::vector<std::string> lines;
  std::string cur;
  for (char c : buf) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  if (lines.empty() || lines[0] != kReportHeader)
    throw DataError("'" + path + "' does not start with the report header");

  std::vector<ScenarioReport> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ScenarioReport r;
    char name[64];
    const int got = std::sscanf(
        lines[i].c_str(), "%63[^,], %lf, %lf, %lf, %lf, %lf, %lf, %lf, %lf, %lf, %lf", name,
        &r.ms_ds, &r.simple_ds, &r.simple_new, &r.simple_all, &r.adapter_ds, &r.adapter_new,
        &r.adapter_all, &r.f1_a, &r.f1_b, &r.f1_c);
    if (got != 11)
      throw DataError("'" + path + "' row " + std::to_string(i) + " is malformed");
    r.scenario = name;
    out.push_back(r);
  }
  return out;
}

inline ScenarioReport mean_report(const std::vector<ScenarioReport>& rows) {
  ScenarioReport m;
  m.scenario = "Overall";
  if (rows.empty()) return m;
  const auto n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    m.ms_ds += r.ms_ds / n;
    m.simple_ds += r.simple_ds / n;
    m.simple_new += r.simple_new / n;
    m.simple_all += r.simple_all / n;
    m.adapter_ds += r.adapter_ds / n;
    m.adapter_new += r.adapter_new / n;
    m.adapter_all += r.adapter_all / n;
    m.f1_a += r.f1_a / n;
    m.f1_b += r.f1_b / n;
    m.f1_c += r.f1_c / n;
  }
  return m;
}

// Full leave-one-out matrix, scenarios ordered by descending held-out index
// (the C1C2C3 row first). Per-scenario reports and logs land on disk as each
// scenario completes; the aggregate files are written at the end.
inline MatrixResult run_matrix(const RunConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  fs::create_directories(out / "logs");
  fs::create_directories(out / "reports");

  const int K = static_cast<int>(cfg.classes.size());
  std::vector<int> order;  // held-out ids, descending
  for (int h = K - 1; h >= 0; --h) order.push_back(h);

  std::vector<ScenarioReport> rows(order.size());
  std::vector<std::exception_ptr> errors(order.size());

  const auto work = [&](size_t slot) {
    const int h = order[slot];
    const std::string name = detail::scenario_name(K, h);
    try {
      ScenarioArtifacts art = run_scenario(cfg, h);
      rows[slot] = art.report;
      write_train_log(art.source_log, (out / "logs" / (name + "_source.csv")).string());
      write_train_log(art.simple_log, (out / "logs" / (name + "_simple.csv")).string());
      write_train_log(art.adapter_log, (out / "logs" / (name + "_adapter.csv")).string());
      emit_report({art.report}, ReportFormat::kCsv,
                  (out / "reports" / ("scenario_" + name + ".csv")).string());
    } catch (const std::exception&) {
      try {
        std::throw_with_nested(Error("scenario " + name + " failed"));
      } catch (...) {
        errors[slot] = std::current_exception();
      }
    }
  };

  if (cfg.workers <= 1) {
    for (size_t i = 0; i < order.size(); ++i) work(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    const size_t n = std::min(static_cast<size_t>(cfg.workers), order.size());
    for (size_t t = 0; t < n; ++t)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < order.size(); i = next.fetch_add(1)) work(i);
      });
    for (auto& th : pool) th.join();
  }

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  MatrixResult res;
  res.scenarios = rows;
  res.overall = mean_report(rows);

  std::vector<ScenarioReport> with_overall = rows;
  with_overall.push_back(res.overall);
  emit_report(with_overall, ReportFormat::kCsv, (out / "reports" / "matrix.csv").string());
  emit_report(with_overall, ReportFormat::kMarkdown, (out / "reports" / "matrix.md").string());
  return res;
}

}  // namespace sedil
