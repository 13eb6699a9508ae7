#pragma once

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vlcsec/error.hpp"
#include "vlcsec/experiments.hpp"
#include "vlcsec/geometry.hpp"
#include "vlcsec/optimizer.hpp"
#include "vlcsec/rate.hpp"
#include "vlcsec/version.hpp"

namespace vlcsec {

/// Fully resolved run configuration: the scene plus the system, optimizer,
/// and scenario parameter blocks. Every field carries its default, so an
/// empty JSON object parses to the reference setup.
struct Config {
  Scene scene{};
  SystemParams system{};
  GaConfig ga{};
  ScenarioConfig scenario{};
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline void require_object(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) config_fail(path, "expected an object");
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::string& path,
                                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (item.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) config_fail(path + "." + item.key(), "unknown field");
  }
}

inline double get_number(const nlohmann::json& j, const std::string& path, const char* key,
                         double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) config_fail(path + "." + key, "expected a number");
  return v.get<double>();
}

inline int get_int(const nlohmann::json& j, const std::string& path, const char* key,
                   int fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) config_fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

inline std::uint64_t get_u64(const nlohmann::json& j, const std::string& path, const char* key,
                             std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<long long>() < 0)) {
    config_fail(path + "." + key, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

inline std::string get_string(const nlohmann::json& j, const std::string& path, const char* key,
                              const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) config_fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

/// Reads a coordinate array: [x, y, z], or [x, y] with the z supplied by the
/// caller (used for user positions, whose z is the receiver height).
inline Vec3 get_vec3(const nlohmann::json& j, const std::string& path, const char* key,
                     const Vec3& fallback, bool allow_xy = false, double implied_z = 0.0) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  const bool xy = allow_xy && v.is_array() && v.size() == 2;
  if (!v.is_array() || (v.size() != 3 && !xy)) {
    config_fail(path + "." + key,
                allow_xy ? "expected an array of 2 or 3 numbers" : "expected an array of 3 numbers");
  }
  for (const auto& c : v) {
    if (!c.is_number()) config_fail(path + "." + key, "expected numeric coordinates");
  }
  return {v[0].get<double>(), v[1].get<double>(), xy ? implied_z : v[2].get<double>()};
}

inline std::vector<double> get_number_array(const nlohmann::json& j, const std::string& path,
                                            const char* key,
                                            const std::vector<double>& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array()) config_fail(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& c : v) {
    if (!c.is_number()) config_fail(path + "." + key, "expected an array of numbers");
    out.push_back(c.get<double>());
  }
  return out;
}

inline Wall parse_wall(const std::string& text, const std::string& path) {
  if (text == "x_min") return Wall::XMin;
  if (text == "x_max") return Wall::XMax;
  if (text == "y_min") return Wall::YMin;
  if (text == "y_max") return Wall::YMax;
  config_fail(path, "expected one of x_min, x_max, y_min, y_max");
}

inline const char* wall_name(Wall wall) {
  switch (wall) {
    case Wall::XMin: return "x_min";
    case Wall::XMax: return "x_max";
    case Wall::YMin: return "y_min";
    default: return "y_max";
  }
}

inline Placement parse_placement(const std::string& text, const std::string& path) {
  if (text == "both_uniform") return Placement::BothUniform;
  if (text == "eve_inner_bob_outer") return Placement::EveInnerBobOuter;
  config_fail(path, "expected one of both_uniform, eve_inner_bob_outer");
}

inline const char* placement_name(Placement placement) {
  return placement == Placement::BothUniform ? "both_uniform" : "eve_inner_bob_outer";
}

inline OptimizerMode parse_optimizer_mode(const std::string& text, const std::string& path) {
  if (text == "ga") return OptimizerMode::Ga;
  if (text == "es") return OptimizerMode::Es;
  config_fail(path, "expected one of ga, es");
}

inline const char* optimizer_mode_name(OptimizerMode mode) {
  return mode == OptimizerMode::Ga ? "ga" : "es";
}

}  // namespace detail

/// Parses a configuration object, filling every omitted field with the
/// reference defaults and validating all invariants. Also accepts a run
/// manifest (an object with a "config" field), so a manifest reproduces its
/// run. Errors name the offending field path.
inline Config parse_config_json(const nlohmann::json& j, const std::string& source = "config") {
  using namespace detail;
  require_object(j, source);
  if (j.contains("config")) {
    reject_unknown_keys(j, source,
                        {"tool", "version", "subcommand", "timestamp", "master_seed",
                         "assumptions", "config"});
    return parse_config_json(j.at("config"), source + ".config");
  }
  reject_unknown_keys(j, source,
                      {"room", "led", "pd", "irs", "receiver_height_m", "zone_radius_m",
                       "users", "system", "ga", "scenario"});

  Config c;

  if (j.contains("room")) {
    const auto& r = j.at("room");
    const std::string path = source + ".room";
    require_object(r, path);
    reject_unknown_keys(r, path, {"width_m", "depth_m", "height_m"});
    c.scene.room.width = get_number(r, path, "width_m", c.scene.room.width);
    c.scene.room.depth = get_number(r, path, "depth_m", c.scene.room.depth);
    c.scene.room.height = get_number(r, path, "height_m", c.scene.room.height);
  }

  if (j.contains("led")) {
    const auto& l = j.at("led");
    const std::string path = source + ".led";
    require_object(l, path);
    reject_unknown_keys(l, path,
                        {"position_m", "normal", "half_power_semiangle_deg", "optical_power_w"});
    c.scene.led.position = get_vec3(l, path, "position_m", c.scene.led.position);
    c.scene.led.normal = get_vec3(l, path, "normal", c.scene.led.normal);
    c.scene.led.half_power_semiangle_deg =
        get_number(l, path, "half_power_semiangle_deg", c.scene.led.half_power_semiangle_deg);
    c.scene.led.optical_power_w =
        get_number(l, path, "optical_power_w", c.scene.led.optical_power_w);
  }

  Photodetector pd;
  if (j.contains("pd")) {
    const auto& p = j.at("pd");
    const std::string path = source + ".pd";
    require_object(p, path);
    reject_unknown_keys(p, path,
                        {"area_m2", "responsivity_a_per_w", "fov_deg", "refractive_index",
                         "filter_gain", "normal"});
    pd.area_m2 = get_number(p, path, "area_m2", pd.area_m2);
    pd.responsivity_a_per_w = get_number(p, path, "responsivity_a_per_w", pd.responsivity_a_per_w);
    pd.fov_deg = get_number(p, path, "fov_deg", pd.fov_deg);
    pd.refractive_index = get_number(p, path, "refractive_index", pd.refractive_index);
    pd.filter_gain = get_number(p, path, "filter_gain", pd.filter_gain);
    pd.normal = get_vec3(p, path, "normal", pd.normal);
  }
  c.scene.bob.pd = pd;
  c.scene.eve.pd = pd;

  if (j.contains("irs")) {
    const auto& p = j.at("irs");
    const std::string path = source + ".irs";
    require_object(p, path);
    reject_unknown_keys(p, path,
                        {"wall", "count_x", "count_y", "spacing_x_m", "spacing_y_m",
                         "reflectivity", "center_m"});
    c.scene.panel.wall =
        parse_wall(get_string(p, path, "wall", detail::wall_name(c.scene.panel.wall)),
                   path + ".wall");
    c.scene.panel.count_x = get_int(p, path, "count_x", c.scene.panel.count_x);
    c.scene.panel.count_y = get_int(p, path, "count_y", c.scene.panel.count_y);
    c.scene.panel.spacing_x_m = get_number(p, path, "spacing_x_m", c.scene.panel.spacing_x_m);
    c.scene.panel.spacing_y_m = get_number(p, path, "spacing_y_m", c.scene.panel.spacing_y_m);
    c.scene.panel.reflectivity = get_number(p, path, "reflectivity", c.scene.panel.reflectivity);
    c.scene.panel.center = get_vec3(p, path, "center_m", c.scene.panel.center);
  }

  c.scene.receiver_height_m =
      get_number(j, source, "receiver_height_m", c.scene.receiver_height_m);
  c.scene.zone_radius_m = get_number(j, source, "zone_radius_m", c.scene.zone_radius_m);

  const double h = c.scene.receiver_height_m;
  c.scene.bob.position = {3.5, 2.5, h};
  c.scene.eve.position = {2.0, 2.5, h};
  if (j.contains("users")) {
    const auto& u = j.at("users");
    const std::string path = source + ".users";
    require_object(u, path);
    reject_unknown_keys(u, path, {"bob_m", "eve_m"});
    c.scene.bob.position = get_vec3(u, path, "bob_m", c.scene.bob.position, true, h);
    c.scene.eve.position = get_vec3(u, path, "eve_m", c.scene.eve.position, true, h);
  }

  if (j.contains("system")) {
    const auto& s = j.at("system");
    const std::string path = source + ".system";
    require_object(s, path);
    reject_unknown_keys(s, path,
                        {"symbol_period_s", "noise_psd", "gap_db", "mod_scaling",
                         "power_allocation", "integration_samples", "quadrature_rel_tol"});
    c.system.symbol_period_s = get_number(s, path, "symbol_period_s", c.system.symbol_period_s);
    c.system.noise_psd = get_number(s, path, "noise_psd", c.system.noise_psd);
    c.system.gap_db = get_number(s, path, "gap_db", c.system.gap_db);
    c.system.mod_scaling = get_number(s, path, "mod_scaling", c.system.mod_scaling);
    c.system.power_allocation = get_number(s, path, "power_allocation", c.system.power_allocation);
    c.system.integration_samples =
        get_int(s, path, "integration_samples", c.system.integration_samples);
    c.system.quadrature_rel_tol =
        get_number(s, path, "quadrature_rel_tol", c.system.quadrature_rel_tol);
  }

  if (j.contains("ga")) {
    const auto& g = j.at("ga");
    const std::string path = source + ".ga";
    require_object(g, path);
    reject_unknown_keys(g, path,
                        {"population_size", "generations", "crossover_prob", "mutation_prob",
                         "tournament_size", "elite_count", "rng_seed"});
    c.ga.population_size = get_int(g, path, "population_size", c.ga.population_size);
    c.ga.generations = get_int(g, path, "generations", c.ga.generations);
    c.ga.crossover_prob = get_number(g, path, "crossover_prob", c.ga.crossover_prob);
    if (g.contains("mutation_prob") && !g.at("mutation_prob").is_null()) {
      if (!g.at("mutation_prob").is_number()) {
        detail::config_fail(path + ".mutation_prob", "expected a number or null");
      }
      c.ga.mutation_prob = g.at("mutation_prob").get<double>();
    }
    c.ga.tournament_size = get_int(g, path, "tournament_size", c.ga.tournament_size);
    c.ga.elite_count = get_int(g, path, "elite_count", c.ga.elite_count);
    c.ga.rng_seed = get_u64(g, path, "rng_seed", c.ga.rng_seed);
  }

  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    const std::string path = source + ".scenario";
    require_object(s, path);
    reject_unknown_keys(s, path,
                        {"placement", "trials", "power_sweep_w", "optimizer_mode", "master_seed"});
    c.scenario.placement = parse_placement(
        get_string(s, path, "placement", detail::placement_name(c.scenario.placement)),
        path + ".placement");
    c.scenario.trials = get_int(s, path, "trials", c.scenario.trials);
    c.scenario.power_sweep_w =
        get_number_array(s, path, "power_sweep_w", c.scenario.power_sweep_w);
    c.scenario.optimizer_mode = parse_optimizer_mode(
        get_string(s, path, "optimizer_mode", detail::optimizer_mode_name(c.scenario.optimizer_mode)),
        path + ".optimizer_mode");
    c.scenario.master_seed = get_u64(s, path, "master_seed", c.scenario.master_seed);
  }

  c.scene.validate();
  c.system.validate();
  c.ga.validate();
  c.scenario.validate();
  return c;
}

/// Parses a configuration (or run manifest) file.
inline Config parse_config(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config_json(j, path.string());
}

namespace detail {

inline nlohmann::ordered_json vec3_json(const Vec3& v) {
  return nlohmann::ordered_json::array({v.x, v.y, v.z});
}

}  // namespace detail

/// Serializes a configuration with every field explicit, in a stable key
/// order; parse_config_json inverts it exactly.
inline nlohmann::ordered_json to_json(const Config& c) {
  using detail::vec3_json;
  nlohmann::ordered_json j;
  j["room"] = {{"width_m", c.scene.room.width},
               {"depth_m", c.scene.room.depth},
               {"height_m", c.scene.room.height}};
  j["led"] = {{"position_m", vec3_json(c.scene.led.position)},
              {"normal", vec3_json(c.scene.led.normal)},
              {"half_power_semiangle_deg", c.scene.led.half_power_semiangle_deg},
              {"optical_power_w", c.scene.led.optical_power_w}};
  const Photodetector& pd = c.scene.bob.pd;
  j["pd"] = {{"area_m2", pd.area_m2},
             {"responsivity_a_per_w", pd.responsivity_a_per_w},
             {"fov_deg", pd.fov_deg},
             {"refractive_index", pd.refractive_index},
             {"filter_gain", pd.filter_gain},
             {"normal", vec3_json(pd.normal)}};
  j["irs"] = {{"wall", detail::wall_name(c.scene.panel.wall)},
              {"count_x", c.scene.panel.count_x},
              {"count_y", c.scene.panel.count_y},
              {"spacing_x_m", c.scene.panel.spacing_x_m},
              {"spacing_y_m", c.scene.panel.spacing_y_m},
              {"reflectivity", c.scene.panel.reflectivity},
              {"center_m", vec3_json(c.scene.panel.center)}};
  j["receiver_height_m"] = c.scene.receiver_height_m;
  j["zone_radius_m"] = c.scene.zone_radius_m;
  j["users"] = {{"bob_m", vec3_json(c.scene.bob.position)},
                {"eve_m", vec3_json(c.scene.eve.position)}};
  j["system"] = {{"symbol_period_s", c.system.symbol_period_s},
                 {"noise_psd", c.system.noise_psd},
                 {"gap_db", c.system.gap_db},
                 {"mod_scaling", c.system.mod_scaling},
                 {"power_allocation", c.system.power_allocation},
                 {"integration_samples", c.system.integration_samples},
                 {"quadrature_rel_tol", c.system.quadrature_rel_tol}};
  j["ga"] = {{"population_size", c.ga.population_size},
             {"generations", c.ga.generations},
             {"crossover_prob", c.ga.crossover_prob},
             {"mutation_prob",
              c.ga.mutation_prob ? nlohmann::ordered_json(*c.ga.mutation_prob)
                                 : nlohmann::ordered_json(nullptr)},
             {"tournament_size", c.ga.tournament_size},
             {"elite_count", c.ga.elite_count},
             {"rng_seed", c.ga.rng_seed}};
  j["scenario"] = {{"placement", detail::placement_name(c.scenario.placement)},
                   {"trials", c.scenario.trials},
                   {"power_sweep_w", c.scenario.power_sweep_w},
                   {"optimizer_mode", detail::optimizer_mode_name(c.scenario.optimizer_mode)},
                   {"master_seed", c.scenario.master_seed}};
  return j;
}

inline std::string serialize_config(const Config& c) { return to_json(c).dump(2); }

inline std::string current_utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

/// Renders the run manifest: tool identity, subcommand, timestamp, master
/// seed, modeling assumptions, and the full configuration echo. Feeding the
/// manifest back as a config file reproduces the run.
inline std::string make_run_manifest(const Config& c, std::string_view subcommand,
                                     std::string_view timestamp_utc) {
  nlohmann::ordered_json m;
  m["tool"] = kToolName;
  m["version"] = kVersion;
  m["subcommand"] = std::string(subcommand);
  m["timestamp"] = std::string(timestamp_utc);
  m["master_seed"] = c.scenario.master_seed;
  m["assumptions"] = nlohmann::ordered_json::array(
      {"eavesdropper is passive; the transmitter knows both user positions"});
  m["config"] = to_json(c);
  return m.dump(2);
}

}  // namespace vlcsec
