#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "sedil/experiment.hpp"

using namespace sedil;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_run(const std::string& out_dir) {
  RunConfig cfg;
  cfg.seed = 1234;
  cfg.classes = {"alpha", "beta"};
  cfg.counts = {6, 3, 3};
  cfg.model.input_mels = 16;
  cfg.model.input_frames = 16;
  cfg.model.conv_filters = 2;
  cfg.model.num_conv_blocks = 2;
  cfg.datagen.duration_s = 4.0;
  cfg.train.max_epochs = 2;
  cfg.train.patience = 5;
  cfg.train.batch_size = 16;
  cfg.out_dir = out_dir;
  return cfg;
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

TEST_CASE("scenario names drop the held-out class") {
  REQUIRE(detail::scenario_name(4, 3) == "C1C2C3");
  REQUIRE(detail::scenario_name(4, 0) == "C2C3C4");
  REQUIRE(detail::scenario_name(2, 1) == "C1");
}

TEST_CASE("run config validation") {
  RunConfig cfg = tiny_run("/tmp/sedil_unused");
  cfg.classes = {"solo"};
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);

  cfg = tiny_run("/tmp/sedil_unused");
  cfg.classes = {"a", "a"};
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);

  cfg = tiny_run("/tmp/sedil_unused");
  cfg.workers = 0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);

  cfg = tiny_run("/tmp/sedil_unused");
  cfg.model.input_mels = 15;  // not divisible by the pools
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);

  REQUIRE_NOTHROW(tiny_run("/tmp/sedil_unused").validate());
}

TEST_CASE("a single scenario produces a complete report") {
  RunConfig cfg = tiny_run("/tmp/sedil_unused");
  ScenarioArtifacts art = run_scenario(cfg, 1);

  REQUIRE(art.report.scenario == "C1");
  REQUIRE(art.report.new_class == "beta");
  for (double v : {art.report.ms_ds, art.report.simple_ds, art.report.simple_new,
                   art.report.simple_all, art.report.adapter_ds, art.report.adapter_new,
                   art.report.adapter_all, art.report.f1_a, art.report.f1_b, art.report.f1_c})
    REQUIRE(in_unit(v));
  REQUIRE(art.report.adapter_all == art.report.f1_c);

  REQUIRE(art.source_log.epochs_run == 2);
  REQUIRE(art.simple_log.epochs_run == 2);
  REQUIRE(art.adapter_log.epochs_run == 2);
  REQUIRE(art.source_log.log.back().stopped);

  REQUIRE_THROWS_AS(run_scenario(cfg, 2), ConfigError);
  REQUIRE_THROWS_AS(run_scenario(cfg, -1), ConfigError);
}

TEST_CASE("scenarios are deterministic given the config") {
  RunConfig cfg = tiny_run("/tmp/sedil_unused");
  ScenarioArtifacts a = run_scenario(cfg, 0);
  ScenarioArtifacts b = run_scenario(cfg, 0);
  REQUIRE(a.report.ms_ds == b.report.ms_ds);
  REQUIRE(a.report.adapter_all == b.report.adapter_all);
  REQUIRE(a.source_log.log.size() == b.source_log.log.size());
  for (size_t i = 0; i < a.source_log.log.size(); ++i) {
    REQUIRE(a.source_log.log[i].train_loss == b.source_log.log[i].train_loss);
    REQUIRE(a.source_log.log[i].val_f1 == b.source_log.log[i].val_f1);
  }
}

TEST_CASE("report rows format at four decimals and parse back") {
  ScenarioReport r;
  r.scenario = "C1C2";
  r.ms_ds = 0.123456;
  r.simple_ds = 1.0;
  r.simple_new = 0.5;
  r.simple_all = 0.25;
  r.adapter_ds = 0.0625;
  r.adapter_new = 0.03125;
  r.adapter_all = 0.015625;
  r.f1_a = 0.1;
  r.f1_b = 0.2;
  r.f1_c = 0.3;
  REQUIRE(report_row_csv(r) ==
          "C1C2, 0.1235, 1.0000, 0.5000, 0.2500, 0.0625, 0.0312, 0.0156, 0.1000, 0.2000, "
          "0.3000");

  const std::string path = "/tmp/sedil_test_report.csv";
  emit_report({r, r}, ReportFormat::kCsv, path);
  auto rows = parse_report_csv(path);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].scenario == "C1C2");
  REQUIRE(rows[0].ms_ds == 0.1235);
  REQUIRE(rows[1].f1_c == 0.3);
  fs::remove(path);
}

TEST_CASE("report parser rejects malformed files") {
  const std::string path = "/tmp/sedil_test_badreport.csv";
  bin::write_file(path, "not,the,header\n");
  REQUIRE_THROWS_AS(parse_report_csv(path), DataError);

  bin::write_file(path, std::string(kReportHeader) + "\nC1, 0.5\n");
  REQUIRE_THROWS_AS(parse_report_csv(path), DataError);
  fs::remove(path);
}

TEST_CASE("mean report is the arithmetic mean of its rows") {
  ScenarioReport a, b;
  a.ms_ds = 0.25;
  b.ms_ds = 0.75;
  a.f1_c = 1.0;
  b.f1_c = 0.0;
  ScenarioReport m = mean_report({a, b});
  REQUIRE(m.scenario == "Overall");
  REQUIRE(m.ms_ds == 0.5);
  REQUIRE(m.f1_c == 0.5);
  REQUIRE(mean_report({}).ms_ds == 0.0);
}

TEST_CASE("the leave-one-out matrix writes every artifact") {
  const std::string dir = "/tmp/sedil_test_matrix_a";
  fs::remove_all(dir);
  RunConfig cfg = tiny_run(dir);
  MatrixResult res = run_matrix(cfg);

  REQUIRE(res.scenarios.size() == 2);
  REQUIRE(res.scenarios[0].scenario == "C1");  // highest held-out id first
  REQUIRE(res.scenarios[1].scenario == "C2");
  REQUIRE(res.scenarios[0].new_class == "beta");
  REQUIRE(res.scenarios[1].new_class == "alpha");
  REQUIRE(std::fabs(res.overall.ms_ds -
                    0.5 * (res.scenarios[0].ms_ds + res.scenarios[1].ms_ds)) <= 1e-12);

  for (const std::string name : {"C1", "C2"}) {
    for (const std::string kind : {"source", "simple", "adapter"})
      REQUIRE(fs::exists(fs::path(dir) / "logs" / (name + "_" + kind + ".csv")));
    REQUIRE(fs::exists(fs::path(dir) / "reports" / ("scenario_" + name + ".csv")));
  }
  REQUIRE(fs::exists(fs::path(dir) / "reports" / "matrix.csv"));
  REQUIRE(fs::exists(fs::path(dir) / "reports" / "matrix.md"));

  auto rows = parse_report_csv((fs::path(dir) / "reports" / "matrix.csv").string());
  REQUIRE(rows.size() == 3);
  REQUIRE(rows[2].scenario == "Overall");
  // the stored overall row is the rounded mean of unrounded scenario rows
  REQUIRE(std::fabs(rows[2].ms_ds - 0.5 * (rows[0].ms_ds + rows[1].ms_ds)) <= 2e-4);

  const std::string md =
      bin::read_file((fs::path(dir) / "reports" / "matrix.md").string());
  REQUIRE(md.rfind("| Scenario |", 0) == 0);
  int lines = 0;
  for (char c : md) lines += c == '\n';
  REQUIRE(lines == 2 + 3);  // header, divider, two scenarios, overall

  fs::remove_all(dir);
}

TEST_CASE("matrix runs are byte-identical across repeats") {
  const std::string dir_a = "/tmp/sedil_test_matrix_b1";
  const std::string dir_b = "/tmp/sedil_test_matrix_b2";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  run_matrix(tiny_run(dir_a));
  run_matrix(tiny_run(dir_b));

  for (const std::string rel :
       {"reports/matrix.csv", "reports/matrix.md", "reports/scenario_C1.csv",
        "logs/C1_source.csv", "logs/C1_simple.csv", "logs/C1_adapter.csv", "logs/C2_source.csv"}) {
    const std::string a = bin::read_file((fs::path(dir_a) / rel).string());
    const std::string b = bin::read_file((fs::path(dir_b) / rel).string());
    INFO(rel);
    REQUIRE(a == b);
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("a two-worker matrix matches the sequential result") {
  const std::string dir_a = "/tmp/sedil_test_matrix_c1";
  const std::string dir_b = "/tmp/sedil_test_matrix_c2";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  RunConfig seq = tiny_run(dir_a);
  RunConfig par = tiny_run(dir_b);
  par.workers = 2;
  run_matrix(seq);
  run_matrix(par);

  REQUIRE(bin::read_file((fs::path(dir_a) / "reports" / "matrix.csv").string()) ==
          bin::read_file((fs::path(dir_b) / "reports" / "matrix.csv").string()));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}
