#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "vlcsec/config.hpp"

namespace vlcsec {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigDefaults, EmptyObjectYieldsTheDefaultConfiguration) {
  const Config parsed = parse_config_json(json::object());
  Config reference;
  reference.scene.validate();
  EXPECT_EQ(serialize_config(parsed), serialize_config(reference));

  EXPECT_EQ(parsed.scene.led.position, (Vec3{2.5, 2.5, 3.0}));
  EXPECT_EQ(parsed.scene.led.half_power_semiangle_deg, 60.0);
  EXPECT_EQ(parsed.scene.led.optical_power_w, 3.0);
  EXPECT_EQ(parsed.scene.bob.pd.area_m2, 1e-4);
  EXPECT_EQ(parsed.scene.bob.pd.responsivity_a_per_w, 0.6);
  EXPECT_EQ(parsed.scene.bob.pd.fov_deg, 90.0);
  EXPECT_EQ(parsed.scene.bob.pd.refractive_index, 1.5);
  EXPECT_EQ(parsed.scene.panel.count_x, 12);
  EXPECT_EQ(parsed.scene.panel.count_y, 12);
  EXPECT_EQ(parsed.scene.panel.reflectivity, 1.0);
  EXPECT_EQ(parsed.scene.receiver_height_m, 0.85);
  EXPECT_EQ(parsed.scene.zone_radius_m, 1.0);
  EXPECT_EQ(parsed.system.symbol_period_s, 1e-9);
  EXPECT_EQ(parsed.system.noise_psd, 1e-21);
  EXPECT_EQ(parsed.system.gap_db, 2.0);
  EXPECT_EQ(parsed.system.mod_scaling, 3.2);
  EXPECT_EQ(parsed.system.integration_samples, 4097);
  EXPECT_EQ(parsed.ga.population_size, 50);
  EXPECT_EQ(parsed.ga.generations, 30);
  EXPECT_EQ(parsed.ga.crossover_prob, 0.8);
  EXPECT_FALSE(parsed.ga.mutation_prob.has_value());
  EXPECT_EQ(parsed.ga.resolved_mutation_prob(144), 1.0 / 144.0);
  EXPECT_EQ(parsed.ga.tournament_size, 3);
  EXPECT_EQ(parsed.ga.elite_count, 2);
  EXPECT_EQ(parsed.scenario.trials, 300);
  EXPECT_EQ(parsed.scenario.placement, Placement::BothUniform);
  EXPECT_EQ(parsed.scenario.power_sweep_w,
            (std::vector<double>{0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0}));
}

TEST(ConfigParsing, UnknownKeysAreRejectedWithTheirPath) {
  EXPECT_NE(error_text([] { parse_config_json(json{{"ledd", json::object()}}); })
                .find("config.ledd"),
            std::string::npos);
  EXPECT_NE(error_text([] {
              parse_config_json(json{{"led", {{"半power", 1.0}}}});
            }).find("unknown field"),
            std::string::npos);
  EXPECT_NE(error_text([] {
              parse_config_json(json{{"ga", {{"population", 10}}}});
            }).find("config.ga.population"),
            std::string::npos);
  EXPECT_NE(error_text([] {
              parse_config_json(json{{"scenario", {{"powers", json::array()}}}});
            }).find("config.scenario.powers"),
            std::string::npos);
}

TEST(ConfigParsing, WrongTypesAndBadValuesAreRejected) {
  const auto rejected = [](const char* text) {
    const json j = json::parse(text);
    EXPECT_THROW(parse_config_json(j), ConfigError) << text;
  };
  rejected(R"({"led": {"optical_power_w": "three"}})");
  rejected(R"({"room": {"width_m": "wide"}})");
  rejected(R"({"ga": {"rng_seed": -5}})");
  rejected(R"({"system": {"integration_samples": 100}})");
  rejected(R"({"scenario": {"power_sweep_w": [3.0, 1.0]}})");
  rejected(R"({"led": {"half_power_semiangle_deg": 120.0}})");
  rejected(R"({"led": {"position_m": [1.0, 2.0]}})");
  rejected(R"({"irs": {"wall": "ceiling"}})");
  rejected(R"({"scenario": {"placement": "random"}})");
  rejected(R"({"scenario": {"optimizer_mode": "anneal"}})");
  rejected(R"({"system": {"power_allocation": 2.0}})");
}

TEST(ConfigParsing, UserPositionsAcceptAnImpliedHeight) {
  json j;
  j["receiver_height_m"] = 0.9;
  j["users"]["bob_m"] = {1.0, 2.0};
  j["users"]["eve_m"] = {3.0, 4.0, 0.9};
  const Config c = parse_config_json(j);
  EXPECT_EQ(c.scene.bob.position, (Vec3{1.0, 2.0, 0.9}));
  EXPECT_EQ(c.scene.eve.position, (Vec3{3.0, 4.0, 0.9}));

  json off = j;
  off["users"]["eve_m"] = {3.0, 4.0, 0.5};
  EXPECT_THROW(parse_config_json(off), ConfigError);
}

TEST(ConfigParsing, PdBlockAppliesToBothUsers) {
  json j;
  j["pd"]["fov_deg"] = 60.0;
  j["pd"]["responsivity_a_per_w"] = 0.4;
  const Config c = parse_config_json(j);
  EXPECT_EQ(c.scene.bob.pd.fov_deg, 60.0);
  EXPECT_EQ(c.scene.eve.pd.fov_deg, 60.0);
  EXPECT_EQ(c.scene.bob.pd.responsivity_a_per_w, 0.4);
  EXPECT_EQ(c.scene.eve.pd.responsivity_a_per_w, 0.4);
}

TEST(ConfigParsing, MutationProbabilityNullMeansTheDefault) {
  json j;
  j["ga"]["mutation_prob"] = nullptr;
  EXPECT_FALSE(parse_config_json(j).ga.mutation_prob.has_value());
  j["ga"]["mutation_prob"] = 0.05;
  const Config c = parse_config_json(j);
  ASSERT_TRUE(c.ga.mutation_prob.has_value());
  EXPECT_EQ(*c.ga.mutation_prob, 0.05);
  EXPECT_EQ(c.ga.resolved_mutation_prob(144), 0.05);
}

TEST(ConfigParsing, RoundTripIsExact) {
  json j;
  j["room"] = {{"width_m", 6.0}, {"depth_m", 4.0}, {"height_m", 3.2}};
  j["led"] = {{"position_m", {3.0, 2.0, 3.2}}, {"optical_power_w", 5.0}};
  j["irs"] = {{"wall", "x_max"},
              {"count_x", 5},
              {"count_y", 3},
              {"center_m", {6.0, 2.0, 1.6}}};
  j["receiver_height_m"] = 0.9;
  j["users"]["bob_m"] = {1.0, 2.0};
  j["system"]["integration_samples"] = 2049;
  j["ga"]["mutation_prob"] = 0.05;
  j["scenario"]["optimizer_mode"] = "es";
  j["scenario"]["placement"] = "eve_inner_bob_outer";
  j["scenario"]["power_sweep_w"] = {1.0, 3.0};

  const Config c = parse_config_json(j);
  EXPECT_EQ(c.scene.panel.wall, Wall::XMax);
  EXPECT_EQ(c.scene.panel.count_x, 5);
  EXPECT_EQ(c.scenario.optimizer_mode, OptimizerMode::Es);
  EXPECT_EQ(c.scenario.placement, Placement::EveInnerBobOuter);
  EXPECT_EQ(c.scene.elements.size(), 15u);

  const std::string serialized = serialize_config(c);
  const Config reparsed = parse_config_json(json::parse(serialized));
  EXPECT_EQ(serialize_config(reparsed), serialized);
}

TEST(ConfigParsing, EveryWallNameRoundTrips) {
  for (const std::string wall : {"x_min", "x_max", "y_min", "y_max"}) {
    json j;
    j["irs"]["wall"] = wall;
    j["irs"]["count_x"] = 2;
    j["irs"]["count_y"] = 2;
    const double cx = (wall == "x_max") ? 5.0 : (wall == "x_min" ? 0.0 : 2.5);
    const double cy = (wall == "y_max") ? 5.0 : (wall == "y_min" ? 0.0 : 2.5);
    j["irs"]["center_m"] = {cx, cy, 1.5};
    const Config c = parse_config_json(j);
    const json round = json::parse(serialize_config(c));
    EXPECT_EQ(round.at("irs").at("wall").get<std::string>(), wall);
    EXPECT_EQ(c.scene.elements.size(), 4u);
  }
}

TEST(ConfigManifest, FieldsAndReparseContract) {
  Config config;
  config.scenario.master_seed = 1234;
  config.scene.validate();
  const std::string manifest = make_run_manifest(config, "experiment", "2026-08-16T12:00:00Z");
  const json m = json::parse(manifest);
  EXPECT_EQ(m.at("tool").get<std::string>(), "vlcsec");
  EXPECT_EQ(m.at("subcommand").get<std::string>(), "experiment");
  EXPECT_EQ(m.at("timestamp").get<std::string>(), "2026-08-16T12:00:00Z");
  EXPECT_EQ(m.at("master_seed").get<std::uint64_t>(), 1234u);
  ASSERT_TRUE(m.at("assumptions").is_array());
  EXPECT_EQ(m.at("assumptions").size(), 1u);

  const Config reparsed = parse_config_json(m, "manifest");
  EXPECT_EQ(serialize_config(reparsed), serialize_config(config));
  EXPECT_EQ(reparsed.scenario.master_seed, 1234u);
}

TEST(ConfigManifest, UnknownManifestKeysAreRejected) {
  Config config;
  config.scene.validate();
  json m = json::parse(make_run_manifest(config, "experiment", "2026-08-16T12:00:00Z"));
  m["operator"] = "someone";
  EXPECT_NE(error_text([&] { parse_config_json(m, "manifest"); }).find("operator"),
            std::string::npos);
}

TEST(ConfigFiles, MissingAndMalformedFiles) {
  EXPECT_THROW(parse_config(fs::path("/nonexistent/vlcsec.json")), IoError);

  const fs::path bad = fs::temp_directory_path() / "vlcsec_bad_config.json";
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  const std::string message = error_text([&] { parse_config(bad); });
  EXPECT_NE(message.find(bad.string()), std::string::npos);
  fs::remove(bad);
}

TEST(ConfigFiles, ValidFileParsesAndValidates) {
  const fs::path good = fs::temp_directory_path() / "vlcsec_good_config.json";
  {
    std::ofstream out(good);
    out << R"({"irs": {"count_x": 3, "count_y": 3}, "scenario": {"trials": 2}})";
  }
  const Config c = parse_config(good);
  EXPECT_EQ(c.scene.elements.size(), 9u);
  EXPECT_EQ(c.scenario.trials, 2);
  fs::remove(good);
}

TEST(ConfigTimestamp, UtcFormatShape) {
  const std::string ts = current_utc_timestamp();
  ASSERT_EQ(ts.size(), 20u);
  EXPECT_EQ(ts[4], '-');
  EXPECT_EQ(ts[7], '-');
  EXPECT_EQ(ts[10], 'T');
  EXPECT_EQ(ts[13], ':');
  EXPECT_EQ(ts[16], ':');
  EXPECT_EQ(ts.back(), 'Z');
}

}  // namespace
}  // namespace vlcsec
