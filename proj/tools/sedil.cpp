// Command-line front end. All heavy lifting lives in the library; this file
// only parses flags, wires files together, and maps errors to exit codes:
// 0 success, 2 usage, 3 data, 4 training.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sedil/sedil.hpp"

namespace fs = std::filesystem;
using namespace sedil;
using nlohmann::json;

namespace {

Regime parse_regime(const std::string& s) {
  if (s == "clean") return Regime::kClean;
  if (s == "noisy") return Regime::kNoisy;
  throw ConfigError("regime must be 'clean' or 'noisy', got '" + s + "'");
}

AdapterInput parse_adapter_input(const std::string& s) {
  if (s == "logits") return AdapterInput::kLogits;
  if (s == "probs") return AdapterInput::kProbs;
  throw ConfigError("adapter input must be 'logits' or 'probs', got '" + s + "'");
}

// Window width is recovered from the stored features; commands only need the
// soundscape duration that was used at generation time.
int frames_per_window(const Dataset& d, const DatagenParams& p) {
  if (d.items.empty()) throw DataError("dataset holds no soundscapes");
  const int total = d.items[0].features.dim(1);
  const int segs = p.num_segments();
  if (total % segs != 0)
    throw DataError("soundscape has " + std::to_string(total) + " frames, not divisible into " +
                    std::to_string(segs) + " segments; pass the --duration used at generation");
  return total / segs;
}

std::string default_log_path(const std::string& out) {
  fs::path p(out);
  p.replace_extension();
  p += "_log.csv";
  return p.string();
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void print_split_summary(const char* name, const Dataset& d) {
  std::map<int, long long> per_class;
  long long total = 0;
  for (const auto& ss : d.items)
    for (const auto& e : ss.events) {
      ++per_class[e.class_idx];
      ++total;
    }
  std::string detail;
  for (size_t i = 0; i < d.classes.size(); ++i) {
    if (i) detail += ", ";
    detail += d.classes[i].name + " " + std::to_string(per_class[static_cast<int>(i)]);
  }
  std::printf("%s: %zu soundscapes, %lld events (%s)", name, d.items.size(), total,
              detail.c_str());
  if (d.regime == Regime::kNoisy) std::printf(", empty fraction %.3f", empty_fraction(d));
  std::printf("\n");
}

std::vector<int> class_subset(const std::string& which, int num_classes) {
  std::vector<int> subset;
  if (which == "ds") {
    if (num_classes < 2)
      throw ConfigError("'ds' subset is empty for a model with " +
                        std::to_string(num_classes) + " class");
    for (int k = 0; k + 1 < num_classes; ++k) subset.push_back(k);
  } else if (which == "new") {
    subset.push_back(num_classes - 1);
  } else if (which != "all") {
    throw ConfigError("classes must be one of all|ds|new, got '" + which + "'");
  }
  return subset;
}

std::string f1_table(const F1Result& r, const std::vector<std::string>& names) {
  long long tp = 0, fp = 0, fn = 0;
  double p_sum = 0, r_sum = 0;
  char line[256];
  std::string out = "class, tp, fp, fn, precision, recall, f1\n";
  for (const ClassScore& cs : r.per_class) {
    std::snprintf(line, sizeof line, "%s, %lld, %lld, %lld, %.4f, %.4f, %.4f\n",
                  names[static_cast<size_t>(cs.class_idx)].c_str(), cs.counts.tp, cs.counts.fp,
                  cs.counts.fn, cs.precision, cs.recall, cs.f1);
    out += line;
    tp += cs.counts.tp;
    fp += cs.counts.fp;
    fn += cs.counts.fn;
    p_sum += cs.precision;
    r_sum += cs.recall;
  }
  const double micro_p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double micro_r = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  const double n = r.per_class.empty() ? 1.0 : static_cast<double>(r.per_class.size());
  std::snprintf(line, sizeof line, "micro, %lld, %lld, %lld, %.4f, %.4f, %.4f\n", tp, fp, fn,
                micro_p, micro_r, r.micro_f1);
  out += line;
  std::snprintf(line, sizeof line, "macro, %lld, %lld, %lld, %.4f, %.4f, %.4f\n", tp, fp, fn,
                p_sum / n, r_sum / n, r.macro_f1);
  out += line;
  return out;
}

// ---------------------------------------------------------------------------
// subcommand option blocks
// ---------------------------------------------------------------------------

struct TrainFlags {
  uint64_t seed = 7;
  int max_epochs = 500;
  int patience = 100;
  int batch = 32;
  double lr = 1e-3;
  double duration = 10.0;
  std::string log;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master RNG seed");
    cmd->add_option("--max-epochs", max_epochs, "epoch cap");
    cmd->add_option("--patience", patience, "early-stop patience in epochs");
    cmd->add_option("--batch", batch, "mini-batch size");
    cmd->add_option("--lr", lr, "Adam learning rate");
    cmd->add_option("--duration", duration, "soundscape duration used at generation (s)");
    cmd->add_option("--log", log, "training log path (default: next to checkpoint)");
  }

  TrainConfig train_config() const {
    TrainConfig tc;
    tc.adam.lr = static_cast<float>(lr);
    tc.batch_size = batch;
    tc.max_epochs = max_epochs;
    tc.patience = patience;
    return tc;
  }

  DatagenParams datagen() const {
    DatagenParams p;
    p.duration_s = duration;
    return p;
  }
};

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

void setup_gen_data(CLI::App& app) {
  auto* cmd = app.add_subcommand("gen-data", "synthesize a train/val/test dataset");
  struct O {
    std::vector<std::string> classes;
    std::string regime = "clean";
    std::vector<int> counts = {200, 50, 50};
    uint64_t seed = 7;
    std::string out;
    int mels = 24;
    int frames_per_s = 24;
    double duration = 10.0;
    double snr = 10.0;
    int band_width = 4;
  };
  auto opt = std::make_shared<O>();
  cmd->add_option("--classes", opt->classes, "comma-separated class names")
      ->required()
      ->delimiter(',');
  cmd->add_option("--regime", opt->regime, "clean or noisy")
      ->check(CLI::IsMember({"clean", "noisy"}));
  cmd->add_option("--counts", opt->counts, "train,val,test soundscape counts")->delimiter(',');
  cmd->add_option("--seed", opt->seed, "master RNG seed");
  cmd->add_option("--out", opt->out, "output directory")->required();
  cmd->add_option("--mels", opt->mels, "mel bins");
  cmd->add_option("--frames-per-s", opt->frames_per_s, "feature frames per second");
  cmd->add_option("--duration", opt->duration, "soundscape duration (s)");
  cmd->add_option("--snr", opt->snr, "event-to-noise ratio (dB)");
  cmd->add_option("--band-width", opt->band_width, "mel bins per class prototype");

  cmd->callback([opt] {
    if (opt->counts.size() != 3)
      throw ConfigError("counts must be exactly train,val,test");
    std::vector<EventClass> classes;
    for (size_t i = 0; i < opt->classes.size(); ++i)
      classes.push_back({static_cast<int>(i), opt->classes[i]});
    DatagenParams p;
    p.duration_s = opt->duration;
    p.snr_db = opt->snr;
    p.band_width = opt->band_width;
    DatasetSplits splits =
        generate_dataset(classes, parse_regime(opt->regime),
                         {opt->counts[0], opt->counts[1], opt->counts[2]}, opt->seed, opt->mels,
                         opt->frames_per_s, p);
    fs::create_directories(opt->out);
    const fs::path out(opt->out);
    const std::pair<const char*, const Dataset*> named[] = {
        {"train", &splits.train}, {"val", &splits.val}, {"test", &splits.test}};
    for (const auto& [name, d] : named) {
      dataset_save(*d, (out / (std::string(name) + ".sedd")).string());
      export_events_csv(*d, (out / (std::string(name) + "_events.csv")).string());
      print_split_summary(name, *d);
    }
    std::printf("wrote %s/{train,val,test}.sedd\n", opt->out.c_str());
  });
}

// ---------------------------------------------------------------------------
// train-source
// ---------------------------------------------------------------------------

void setup_train_source(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-source", "train a source model on a class subset");
  struct O {
    std::string data;
    std::vector<std::string> classes;
    std::string out;
    int filters = 6;
    int blocks = 3;
    TrainFlags tf;
  };
  auto opt = std::make_shared<O>();
  cmd->add_option("--data", opt->data, "dataset directory from gen-data")->required();
  cmd->add_option("--classes", opt->classes, "classes to train on (label subset)")
      ->required()
      ->delimiter(',');
  cmd->add_option("--out", opt->out, "checkpoint path (.sedm)")->required();
  cmd->add_option("--filters", opt->filters, "conv filters per block");
  cmd->add_option("--blocks", opt->blocks, "conv blocks");
  opt->tf.add_to(cmd);

  cmd->callback([opt] {
    const fs::path data(opt->data);
    Dataset train = dataset_load((data / "train.sedd").string());
    Dataset val = dataset_load((data / "val.sedd").string());
    const DatagenParams p = opt->tf.datagen();

    SedCnnConfig cfg;
    cfg.input_mels = train.items.empty() ? 0 : train.items[0].features.dim(0);
    cfg.input_frames = frames_per_window(train, p);
    cfg.conv_filters = opt->filters;
    cfg.num_conv_blocks = opt->blocks;
    cfg.num_classes = static_cast<int>(opt->classes.size());
    cfg.validate();

    Rng init(Rng::mix(opt->tf.seed, 1));
    SedCnn<float> model(cfg, opt->classes, init);
    Rng trng(Rng::mix(opt->tf.seed, 2));
    TrainResult res = train_source(model, train, val, opt->tf.train_config(), p, trng);

    ensure_parent_dir(opt->out);
    checkpoint_save(model, opt->out);
    const std::string log = opt->tf.log.empty() ? default_log_path(opt->out) : opt->tf.log;
    ensure_parent_dir(log);
    write_train_log(res, log);
    std::printf("best val F1 %.4f at epoch %d (%d epochs run)\nmodel: %s\nlog: %s\n",
                res.best_f1, res.best_epoch, res.epochs_run, opt->out.c_str(), log.c_str());
  });
}

// ---------------------------------------------------------------------------
// train-incremental
// ---------------------------------------------------------------------------

void setup_train_incremental(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-incremental", "add one class to a source model");
  struct O {
    std::string source;
    std::string method;
    std::string new_class;
    std::string data;
    std::string out;
    int adapter_hidden = kAdapterHidden;
    std::string adapter_input = "logits";
    TrainFlags tf;
  };
  auto opt = std::make_shared<O>();
  cmd->add_option("--source", opt->source, "source model checkpoint")->required();
  cmd->add_option("--method", opt->method, "simple or adapter")
      ->required()
      ->check(CLI::IsMember({"simple", "adapter"}));
  cmd->add_option("--new-class", opt->new_class, "name of the class to add")->required();
  cmd->add_option("--data", opt->data, "dataset directory carrying all N+1 classes")->required();
  cmd->add_option("--out", opt->out, "output checkpoint path")->required();
  cmd->add_option("--adapter-hidden", opt->adapter_hidden, "adapter hidden width");
  cmd->add_option("--adapter-input", opt->adapter_input, "adapter input: logits or probs")
      ->check(CLI::IsMember({"logits", "probs"}));
  opt->tf.add_to(cmd);

  cmd->callback([opt] {
    SedCnn<float> source = checkpoint_load_model(opt->source);
    const fs::path data(opt->data);
    Dataset train = dataset_load((data / "train.sedd").string());
    Dataset val = dataset_load((data / "val.sedd").string());
    const DatagenParams p = opt->tf.datagen();
    const TrainConfig tc = opt->tf.train_config();

    Rng mig(Rng::mix(opt->tf.seed, 1));
    SedCnn<float> target = migrate_weights(source, opt->new_class, mig);
    Rng trng(Rng::mix(opt->tf.seed, 2));

    TrainResult res;
    ensure_parent_dir(opt->out);
    if (opt->method == "simple") {
      res = train_simple_tl(target, train, val, tc, p, trng);
      checkpoint_save(target, opt->out);
    } else {
      const int n = source.config().num_classes;
      Rng arng(Rng::mix(opt->tf.seed, 3));
      NeuralAdapter<float> adapter = make_bridge_adapter<float>(
          n, opt->adapter_hidden, n + 1, parse_adapter_input(opt->adapter_input), arng);
      AdapterComposite<float> comp =
          compose(std::move(source), std::move(adapter), std::move(target));
      res = train_adapter_tl(comp, train, val, tc, p, trng);
      checkpoint_save(comp, opt->out);
    }
    const std::string log = opt->tf.log.empty() ? default_log_path(opt->out) : opt->tf.log;
    ensure_parent_dir(log);
    write_train_log(res, log);
    std::printf("best val F1 %.4f at epoch %d (%d epochs run)\nmodel: %s\nlog: %s\n",
                res.best_f1, res.best_epoch, res.epochs_run, opt->out.c_str(), log.c_str());
  });
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

void setup_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand("evaluate", "segment F1 of a checkpoint on a dataset file");
  struct O {
    std::string model;
    std::string data;
    std::string classes = "all";
    std::string report;
    double threshold = 0.5;
    double duration = 10.0;
  };
  auto opt = std::make_shared<O>();
  cmd->add_option("--model", opt->model, "model or composite checkpoint")->required();
  cmd->add_option("--data", opt->data, "dataset file (.sedd)")->required();
  cmd->add_option("--classes", opt->classes, "all, ds (all but newest) or new (newest only)")
      ->check(CLI::IsMember({"all", "ds", "new"}));
  cmd->add_option("--report", opt->report, "also write the table to this path");
  cmd->add_option("--threshold", opt->threshold, "binarization threshold");
  cmd->add_option("--duration", opt->duration, "soundscape duration used at generation (s)");

  cmd->callback([opt] {
    Dataset data = dataset_load(opt->data);
    DatagenParams p;
    p.duration_s = opt->duration;

    Tensorf preds, refs;
    std::vector<std::string> names;
    if (checkpoint_kind(opt->model) == CheckpointKind::kModel) {
      SedCnn<float> model = checkpoint_load_model(opt->model);
      EvalData ev = evaluate_model(model, data, p);
      preds = std::move(ev.preds);
      refs = std::move(ev.refs);
      names = model.class_names();
    } else {
      AdapterComposite<float> comp = checkpoint_load_composite(opt->model);
      AbcEvalData ev = evaluate_composite_abc(comp, data, p);
      preds = std::move(ev.preds_c);
      refs = std::move(ev.refs);
      names = comp.target().class_names();
    }

    const F1Result r = f1_segment(preds, refs, opt->threshold,
                                  class_subset(opt->classes, static_cast<int>(names.size())));
    const std::string table = f1_table(r, names);
    std::fputs(table.c_str(), stdout);
    if (!opt->report.empty()) {
      ensure_parent_dir(opt->report);
      bin::write_file(opt->report, table);
    }
  });
}

// ---------------------------------------------------------------------------
// ablation
// ---------------------------------------------------------------------------

void setup_ablation(CLI::App& app) {
  auto* cmd = app.add_subcommand("ablation", "score branches A, B and C of a composite");
  struct O {
    std::string composite;
    std::string data;
    std::string report;
    double threshold = 0.5;
    double duration = 10.0;
  };
  auto opt = std::make_shared<O>();
  cmd->add_option("--composite", opt->composite, "adapter composite checkpoint")->required();
  cmd->add_option("--data", opt->data, "dataset file (.sedd)")->required();
  cmd->add_option("--report", opt->report, "also write the row to this path");
  cmd->add_option("--threshold", opt->threshold, "binarization threshold");
  cmd->add_option("--duration", opt->duration, "soundscape duration used at generation (s)");

  cmd->callback([opt] {
    AdapterComposite<float> comp = checkpoint_load_composite(opt->composite);
    Dataset data = dataset_load(opt->data);
    DatagenParams p;
    p.duration_s = opt->duration;
    const AblationScores s = run_ablation(comp, data, p, opt->threshold);
    char row[128];
    std::snprintf(row, sizeof row, "f1_A, f1_B, f1_C\n%.4f, %.4f, %.4f\n", s.f1_a, s.f1_b,
                  s.f1_c);
    std::fputs(row, stdout);
    if (!opt->report.empty()) {
      ensure_parent_dir(opt->report);
      bin::write_file(opt->report, row);
    }
  });
}

// ---------------------------------------------------------------------------
// run-matrix
// ---------------------------------------------------------------------------

void apply_config_file(RunConfig& cfg, const std::string& path) {
  const json j = json::parse(bin::read_file(path));
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "seed") cfg.seed = v.get<uint64_t>();
    else if (key == "classes") cfg.classes = v.get<std::vector<std::string>>();
    else if (key == "regime") cfg.regime = parse_regime(v.get<std::string>());
    else if (key == "counts") {
      const auto c = v.get<std::vector<int>>();
      if (c.size() != 3) throw ConfigError("config counts must be [train, val, test]");
      cfg.counts = {c[0], c[1], c[2]};
    } else if (key == "mels") cfg.model.input_mels = v.get<int>();
    else if (key == "frames_per_s") cfg.model.input_frames = v.get<int>();
    else if (key == "filters") cfg.model.conv_filters = v.get<int>();
    else if (key == "blocks") cfg.model.num_conv_blocks = v.get<int>();
    else if (key == "adapter_hidden") cfg.adapter_hidden = v.get<int>();
    else if (key == "adapter_input") cfg.adapter_input = parse_adapter_input(v.get<std::string>());
    else if (key == "max_epochs") cfg.train.max_epochs = v.get<int>();
    else if (key == "patience") cfg.train.patience = v.get<int>();
    else if (key == "batch_size") cfg.train.batch_size = v.get<int>();
    else if (key == "lr") cfg.train.adam.lr = v.get<float>();
    else if (key == "threshold") cfg.train.threshold = v.get<double>();
    else if (key == "duration_s") cfg.datagen.duration_s = v.get<double>();
    else if (key == "snr_db") cfg.datagen.snr_db = v.get<double>();
    else if (key == "band_width") cfg.datagen.band_width = v.get<int>();
    else if (key == "out_dir") cfg.out_dir = v.get<std::string>();
    else if (key == "workers") cfg.workers = v.get<int>();
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

void setup_run_matrix(CLI::App& app) {
  auto* cmd = app.add_subcommand("run-matrix", "full leave-one-out experiment matrix");
  struct O {
    std::string config;
    RunConfig cfg;
    std::string regime = "clean";
    std::vector<int> counts;
    std::string adapter_input = "logits";
    double lr = 1e-3;
    std::map<std::string, CLI::Option*> set;
  };
  auto opt = std::make_shared<O>();
  opt->set["config"] = cmd->add_option("--config", opt->config, "JSON config file");
  opt->set["out"] = cmd->add_option("--out", opt->cfg.out_dir, "output directory");
  opt->set["seed"] = cmd->add_option("--seed", opt->cfg.seed, "master RNG seed");
  opt->set["classes"] =
      cmd->add_option("--classes", opt->cfg.classes, "comma-separated class names")
          ->delimiter(',');
  opt->set["regime"] = cmd->add_option("--regime", opt->regime, "clean or noisy")
                           ->check(CLI::IsMember({"clean", "noisy"}));
  opt->set["counts"] =
      cmd->add_option("--counts", opt->counts, "train,val,test soundscape counts")
          ->delimiter(',');
  opt->set["workers"] = cmd->add_option("--workers", opt->cfg.workers, "parallel scenarios");
  opt->set["mels"] = cmd->add_option("--mels", opt->cfg.model.input_mels, "mel bins");
  opt->set["frames"] = cmd->add_option("--frames-per-s", opt->cfg.model.input_frames,
                                       "feature frames per second");
  opt->set["filters"] =
      cmd->add_option("--filters", opt->cfg.model.conv_filters, "conv filters per block");
  opt->set["blocks"] =
      cmd->add_option("--blocks", opt->cfg.model.num_conv_blocks, "conv blocks");
  opt->set["adapter-hidden"] =
      cmd->add_option("--adapter-hidden", opt->cfg.adapter_hidden, "adapter hidden width");
  opt->set["adapter-input"] =
      cmd->add_option("--adapter-input", opt->adapter_input, "adapter input: logits or probs")
          ->check(CLI::IsMember({"logits", "probs"}));
  opt->set["max-epochs"] =
      cmd->add_option("--max-epochs", opt->cfg.train.max_epochs, "epoch cap");
  opt->set["patience"] =
      cmd->add_option("--patience", opt->cfg.train.patience, "early-stop patience");
  opt->set["batch"] = cmd->add_option("--batch", opt->cfg.train.batch_size, "mini-batch size");
  opt->set["lr"] = cmd->add_option("--lr", opt->lr, "Adam learning rate");
  opt->set["duration"] =
      cmd->add_option("--duration", opt->cfg.datagen.duration_s, "soundscape duration (s)");
  opt->set["snr"] = cmd->add_option("--snr", opt->cfg.datagen.snr_db, "event SNR (dB)");

  cmd->callback([opt] {
    // Flag values land in cfg during parsing; a config file must not clobber
    // them, so flagged fields are re-applied after the file is read.
    RunConfig flagged = opt->cfg;
    if (!opt->config.empty()) {
      opt->cfg = RunConfig();
      apply_config_file(opt->cfg, opt->config);
      const auto passed = [&](const char* k) { return opt->set.at(k)->count() > 0; };
      if (passed("out")) opt->cfg.out_dir = flagged.out_dir;
      if (passed("seed")) opt->cfg.seed = flagged.seed;
      if (passed("classes")) opt->cfg.classes = flagged.classes;
      if (passed("workers")) opt->cfg.workers = flagged.workers;
      if (passed("mels")) opt->cfg.model.input_mels = flagged.model.input_mels;
      if (passed("frames")) opt->cfg.model.input_frames = flagged.model.input_frames;
      if (passed("filters")) opt->cfg.model.conv_filters = flagged.model.conv_filters;
      if (passed("blocks")) opt->cfg.model.num_conv_blocks = flagged.model.num_conv_blocks;
      if (passed("adapter-hidden")) opt->cfg.adapter_hidden = flagged.adapter_hidden;
      if (passed("max-epochs")) opt->cfg.train.max_epochs = flagged.train.max_epochs;
      if (passed("patience")) opt->cfg.train.patience = flagged.train.patience;
      if (passed("batch")) opt->cfg.train.batch_size = flagged.train.batch_size;
      if (passed("duration")) opt->cfg.datagen.duration_s = flagged.datagen.duration_s;
      if (passed("snr")) opt->cfg.datagen.snr_db = flagged.datagen.snr_db;
    }
    if (opt->set.at("regime")->count() > 0 || opt->config.empty())
      opt->cfg.regime = parse_regime(opt->regime);
    if (opt->set.at("adapter-input")->count() > 0 || opt->config.empty())
      opt->cfg.adapter_input = parse_adapter_input(opt->adapter_input);
    if (opt->set.at("lr")->count() > 0 || opt->config.empty())
      opt->cfg.train.adam.lr = static_cast<float>(opt->lr);
    if (opt->set.at("counts")->count() > 0) {
      if (opt->counts.size() != 3) throw ConfigError("counts must be exactly train,val,test");
      opt->cfg.counts = {opt->counts[0], opt->counts[1], opt->counts[2]};
    }

    opt->cfg.validate();
    const MatrixResult res = run_matrix(opt->cfg);
    const fs::path reports = fs::path(opt->cfg.out_dir) / "reports";
    std::fputs(bin::read_file((reports / "matrix.md").string()).c_str(), stdout);
    std::printf("reports: %s\n", reports.string().c_str());
    (void)res;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sound event detection with incremental class learning"};
  app.require_subcommand(1);
  setup_gen_data(app);
  setup_train_source(app);
  setup_train_incremental(app);
  setup_evaluate(app);
  setup_ablation(app);
  setup_run_matrix(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const TrainError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
