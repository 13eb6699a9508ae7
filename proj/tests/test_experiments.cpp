#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "vlcsec/config.hpp"
#include "vlcsec/experiments.hpp"

namespace vlcsec {
namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("vlcsec_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  std::ostringstream out;
  out << file.rdbuf();
  return out.str();
}

Scene tiny_scene() {
  Scene scene;
  scene.panel.count_x = 3;
  scene.panel.count_y = 3;
  scene.validate();
  return scene;
}

GaConfig tiny_ga() {
  GaConfig ga;
  ga.population_size = 8;
  ga.generations = 4;
  ga.elite_count = 1;
  return ga;
}

TEST(ScenarioChecks, SweepAndTrialGuards) {
  ScenarioConfig scenario;
  EXPECT_NO_THROW(scenario.validate());
  ScenarioConfig bad = scenario;
  bad.trials = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = scenario;
  bad.power_sweep_w.clear();
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = scenario;
  bad.power_sweep_w = {1.0, 1.0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = scenario;
  bad.power_sweep_w = {3.0, 1.0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = scenario;
  bad.power_sweep_w = {-1.0, 2.0};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Enhancement, SignedRelativeChange) {
  EXPECT_EQ(enhancement_percent(100.0, 200.0), 100.0);
  EXPECT_EQ(enhancement_percent(50.0, 50.0), 0.0);
  EXPECT_NEAR(enhancement_percent(-296.171, 45.5398), 115.37618470410676, 1e-12 * 115.4);
  EXPECT_EQ(enhancement_percent(-100.0, -150.0), -50.0);
  EXPECT_THROW(enhancement_percent(0.0, 10.0), DomainError);
}

TEST(RunExperiment, TrialShapeAndPlacementPolicy) {
  Scene scene = tiny_scene();
  SystemParams params;
  GaConfig ga = tiny_ga();
  ScenarioConfig scenario;
  scenario.placement = Placement::EveInnerBobOuter;
  scenario.trials = 5;
  scenario.power_sweep_w = {1.0, 3.0};
  scenario.master_seed = 42;

  const ExperimentResult result = run_experiment(scene, params, ga, scenario, 1);
  ASSERT_EQ(result.records.size(), 5u);
  ASSERT_EQ(result.summary.rows.size(), 2u);
  for (std::size_t t = 0; t < result.records.size(); ++t) {
    const TrialRecord& record = result.records[t];
    EXPECT_EQ(record.trial_index, static_cast<int>(t));
    EXPECT_LT(horizontal_distance_to_emitter(record.eve_position, scene.led), 1.0);
    EXPECT_GE(horizontal_distance_to_emitter(record.bob_position, scene.led), 1.0);
    ASSERT_EQ(record.entries.size(), 2u);
    EXPECT_EQ(record.entries[0].power_w, 1.0);
    EXPECT_EQ(record.entries[1].power_w, 3.0);
    for (const PowerEntry& e : record.entries) {
      EXPECT_EQ(e.cs_los, e.rb_los - e.re_los);
      EXPECT_EQ(e.cs_opt, e.rb_opt - e.re_opt);
      EXPECT_EQ(e.allocation_bits.size(), 9u);
      EXPECT_GT(e.rb_los, 0.0);
      EXPECT_GT(e.re_los, 0.0);
    }
  }
}

TEST(RunExperiment, ThreadCountNeverChangesTheRecords) {
  Scene scene = tiny_scene();
  SystemParams params;
  GaConfig ga = tiny_ga();
  ScenarioConfig scenario;
  scenario.trials = 4;
  scenario.power_sweep_w = {3.0};
  scenario.master_seed = 0xD17E;

  const ExperimentResult serial = run_experiment(scene, params, ga, scenario, 1);
  const ExperimentResult threaded = run_experiment(scene, params, ga, scenario, 3);
  ASSERT_EQ(serial.records.size(), threaded.records.size());
  for (std::size_t t = 0; t < serial.records.size(); ++t) {
    const TrialRecord& a = serial.records[t];
    const TrialRecord& b = threaded.records[t];
    EXPECT_EQ(a.bob_position, b.bob_position);
    EXPECT_EQ(a.eve_position, b.eve_position);
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t pi = 0; pi < a.entries.size(); ++pi) {
      EXPECT_EQ(a.entries[pi].rb_los, b.entries[pi].rb_los);
      EXPECT_EQ(a.entries[pi].cs_opt, b.entries[pi].cs_opt);
      EXPECT_EQ(a.entries[pi].allocation_bits, b.entries[pi].allocation_bits);
    }
  }
  for (std::size_t pi = 0; pi < serial.summary.rows.size(); ++pi) {
    EXPECT_EQ(serial.summary.rows[pi].cs_opt, threaded.summary.rows[pi].cs_opt);
  }
}

TEST(RunExperiment, TrialSeedingIsReproducibleFromTheMasterSeed) {
  Scene scene = tiny_scene();
  SystemParams params;
  GaConfig ga = tiny_ga();
  ScenarioConfig scenario;
  scenario.trials = 3;
  scenario.power_sweep_w = {3.0};
  scenario.master_seed = 77;

  const ExperimentResult result = run_experiment(scene, params, ga, scenario, 1);
  for (const TrialRecord& record : result.records) {
    Rng rng(derive_seed(scenario.master_seed, static_cast<std::uint64_t>(record.trial_index)));
    const Vec3 bob =
        sample_position(rng, scene.room, scene.led, scene.receiver_height_m, std::nullopt);
    const Vec3 eve =
        sample_position(rng, scene.room, scene.led, scene.receiver_height_m, std::nullopt);
    EXPECT_EQ(record.bob_position, bob);
    EXPECT_EQ(record.eve_position, eve);
  }
}

TEST(RunExperiment, SummaryRowsAreTheTrialMeans) {
  Scene scene = tiny_scene();
  SystemParams params;
  GaConfig ga = tiny_ga();
  ScenarioConfig scenario;
  scenario.trials = 6;
  scenario.power_sweep_w = {1.0, 3.0};
  scenario.master_seed = 11;

  const ExperimentResult result = run_experiment(scene, params, ga, scenario, 1);
  for (std::size_t pi = 0; pi < result.summary.rows.size(); ++pi) {
    const SummaryRow& row = result.summary.rows[pi];
    double sum_cs_los = 0.0;
    double sum_cs_opt = 0.0;
    for (const TrialRecord& record : result.records) {
      sum_cs_los += record.entries[pi].cs_los;
      sum_cs_opt += record.entries[pi].cs_opt;
    }
    EXPECT_NEAR(row.cs_los, sum_cs_los / 6.0, 1e-9 * std::abs(sum_cs_los / 6.0) + 1e-6);
    EXPECT_NEAR(row.cs_opt, sum_cs_opt / 6.0, 1e-9 * std::abs(sum_cs_opt / 6.0) + 1e-6);
    ASSERT_TRUE(row.enhancement_percent.has_value());
    EXPECT_NEAR(*row.enhancement_percent, enhancement_percent(row.cs_los, row.cs_opt),
                1e-9 * std::abs(*row.enhancement_percent) + 1e-9);
  }
}

TEST(RunExperiment, ExhaustiveModeIsFencedToSmallPanels) {
  Scene big;
  SystemParams params;
  GaConfig ga = tiny_ga();
  ScenarioConfig scenario;
  scenario.trials = 1;
  scenario.optimizer_mode = OptimizerMode::Es;
  try {
    run_experiment(big, params, ga, scenario, 1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("use ga"), std::string::npos);
  }
}

TEST(RunExperiment, ExhaustiveModeMatchesOrBeatsTheGeneticSearch) {
  Scene scene;
  scene.panel.count_x = 3;
  scene.panel.count_y = 2;
  scene.validate();
  SystemParams params;
  GaConfig ga = tiny_ga();
  ScenarioConfig scenario;
  scenario.trials = 2;
  scenario.power_sweep_w = {3.0};
  scenario.master_seed = 5;

  ScenarioConfig es_scenario = scenario;
  es_scenario.optimizer_mode = OptimizerMode::Es;
  const ExperimentResult ga_result = run_experiment(scene, params, ga, scenario, 1);
  const ExperimentResult es_result = run_experiment(scene, params, ga, es_scenario, 1);
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_EQ(ga_result.records[t].bob_position, es_result.records[t].bob_position);
    EXPECT_GE(es_result.records[t].entries[0].cs_opt + 1.0,
              ga_result.records[t].entries[0].cs_opt);
  }
}

TEST(ExportResults, HeadersRowCountsAndByteStability) {
  Scene scene = tiny_scene();
  SystemParams params;
  GaConfig ga = tiny_ga();
  ScenarioConfig scenario;
  scenario.trials = 3;
  scenario.power_sweep_w = {1.0, 3.0};
  scenario.master_seed = 9;

  const ExperimentResult result = run_experiment(scene, params, ga, scenario, 1);
  TempDir dir_a;
  TempDir dir_b;
  const ExportPaths a = export_results(result, "{\"tool\":\"vlcsec\"}", dir_a.path);
  const ExportPaths b = export_results(result, "{\"tool\":\"vlcsec\"}", dir_b.path);

  const std::string trials_a = read_file(a.trials_csv);
  EXPECT_EQ(trials_a, read_file(b.trials_csv));
  EXPECT_EQ(read_file(a.summary_csv), read_file(b.summary_csv));
  EXPECT_EQ(read_file(a.manifest_json), "{\"tool\":\"vlcsec\"}\n");

  std::istringstream lines(trials_a);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, kTrialCsvHeader);
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 6);

  std::istringstream summary_lines(read_file(a.summary_csv));
  std::getline(summary_lines, line);
  EXPECT_EQ(line, kSummaryCsvHeader);
  rows = 0;
  while (std::getline(summary_lines, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(ExportResults, EmptyResultStillWritesValidFiles) {
  ExperimentResult empty;
  TempDir dir;
  const ExportPaths paths = export_results(empty, "{}", dir.path);
  EXPECT_EQ(read_file(paths.trials_csv), std::string(kTrialCsvHeader) + "\n");
  EXPECT_EQ(read_file(paths.summary_csv), std::string(kSummaryCsvHeader) + "\n");
  EXPECT_EQ(read_file(paths.manifest_json), "{}\n");
}

TEST(ExportResults, ManifestRoundTripReproducesTheRunByteForByte) {
  Config config;
  config.scene.panel.count_x = 3;
  config.scene.panel.count_y = 3;
  config.ga = tiny_ga();
  config.scenario.trials = 3;
  config.scenario.power_sweep_w = {1.0, 3.0};
  config.scenario.master_seed = 314;
  config.scene.validate();

  const ExperimentResult first = run_experiment(config.scene, config.system, config.ga,
                                                config.scenario, 1);
  const std::string manifest =
      make_run_manifest(config, "experiment", "2026-08-16T00:00:00Z");
  TempDir dir_a;
  const ExportPaths a = export_results(first, manifest, dir_a.path);

  const std::string manifest_text = read_file(a.manifest_json);
  const Config reparsed = parse_config_json(nlohmann::json::parse(manifest_text), "manifest");
  const ExperimentResult second = run_experiment(reparsed.scene, reparsed.system, reparsed.ga,
                                                 reparsed.scenario, 2);
  TempDir dir_b;
  const ExportPaths b = export_results(second, manifest, dir_b.path);
  EXPECT_EQ(read_file(a.trials_csv), read_file(b.trials_csv));
  EXPECT_EQ(read_file(a.summary_csv), read_file(b.summary_csv));
}

TEST(ExportResults, NumbersUseShortestRoundTripForm) {
  EXPECT_EQ(detail::format_double(3.0), "3");
  EXPECT_EQ(detail::format_double(0.5), "0.5");
  EXPECT_EQ(detail::format_double(-296.171), "-296.171");
  EXPECT_EQ(detail::format_mbps(1771120496.366757), "1771.120496366757");
  const double value = 0.1 + 0.2;
  EXPECT_EQ(std::stod(detail::format_double(value)), value);
}

}  // namespace
}  // namespace vlcsec
