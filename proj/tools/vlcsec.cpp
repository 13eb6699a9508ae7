#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vlcsec/channel.hpp"
#include "vlcsec/config.hpp"
#include "vlcsec/experiments.hpp"
#include "vlcsec/optimizer.hpp"
#include "vlcsec/rate.hpp"
#include "vlcsec/validate.hpp"
#include "vlcsec/version.hpp"

namespace {

using namespace vlcsec;

Config load_config(const std::string& path) {
  if (path.empty()) {
    Config c;
    c.scene.validate();
    return c;
  }
  return parse_config(path);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

std::filesystem::path ensure_out_dir(const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec && !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
  return dir;
}

void emit_manifest(const Config& c, const char* subcommand,
                   const std::filesystem::path& dir) {
  write_text(dir / "run_manifest.json",
             make_run_manifest(c, subcommand, current_utc_timestamp()) + "\n");
  std::cout << "wrote " << (dir / "run_manifest.json").string() << "\n";
}

int run_channel(const std::string& scene_path, const std::string& user_name, double fmax,
                int points, const std::string& out_dir) {
  const Config c = load_config(scene_path);
  const UserTerminal& user = user_name == "eve" ? c.scene.eve : c.scene.bob;
  const ChannelTaps taps = build_channel_taps(c.scene, user);
  const std::filesystem::path dir = ensure_out_dir(out_dir);

  std::string taps_csv = "n,gain,delay_s\n";
  taps_csv += "0," + detail::format_double(taps.los_gain) + "," +
              detail::format_double(taps.los_delay) + "\n";
  for (std::size_t i = 0; i < taps.element_count(); ++i) {
    taps_csv += std::to_string(i + 1) + "," + detail::format_double(taps.nlos_gains[i]) + "," +
                detail::format_double(taps.nlos_delays[i]) + "\n";
  }
  write_text(dir / "taps.csv", taps_csv);

  std::string cfr_csv = "f_Hz,Re_Q,Im_Q,Q2\n";
  for (int i = 0; i < points; ++i) {
    const double f = fmax * static_cast<double>(i) / static_cast<double>(points - 1);
    const std::complex<double> q = cfr(taps, f);
    cfr_csv += detail::format_double(f) + "," + detail::format_double(q.real()) + "," +
               detail::format_double(q.imag()) + "," + detail::format_double(std::norm(q)) +
               "\n";
  }
  write_text(dir / "cfr.csv", cfr_csv);

  std::cout << "wrote " << (dir / "taps.csv").string() << " (" << (taps.element_count() + 1)
            << " taps)\n";
  std::cout << "wrote " << (dir / "cfr.csv").string() << " (" << points << " points)\n";
  emit_manifest(c, "channel", dir);
  return 0;
}

int run_rate(const std::string& scene_path, const std::string& alloc_text, double power_flag,
             bool power_set, bool snr_csv, const std::string& out_dir) {
  const Config c = load_config(scene_path);
  const AllocationVector alloc = AllocationVector::from_string(alloc_text);
  if (alloc.size() != c.scene.elements.size()) {
    throw ConfigError("allocation has " + std::to_string(alloc.size()) + " bits but the panel has " +
                      std::to_string(c.scene.elements.size()) + " elements");
  }
  const double power = power_set ? power_flag : c.scene.led.optical_power_w;
  if (!(power >= 0.0)) throw ConfigError("power: must be nonnegative");

  const ChannelTaps taps_bob = build_channel_taps(c.scene, c.scene.bob);
  const ChannelTaps taps_eve = build_channel_taps(c.scene, c.scene.eve);
  const double rb = achievable_rate_checked(taps_bob, alloc, power, c.system);
  const double re = achievable_rate_checked(taps_eve, alloc.complement(), power, c.system);

  std::cout << "R_B = " << detail::format_mbps(rb) << " Mbit/s\n";
  std::cout << "R_E = " << detail::format_mbps(re) << " Mbit/s\n";
  std::cout << "C_s = " << detail::format_mbps(rb - re) << " Mbit/s\n";

  const std::filesystem::path dir = ensure_out_dir(out_dir);
  if (snr_csv) {
    std::string csv = "f_Hz,snr_bob,snr_eve\n";
    const int n = c.system.integration_samples;
    const AllocationVector eve_alloc = alloc.complement();
    for (int i = 0; i < n; ++i) {
      const double f = c.system.band_hz() * static_cast<double>(i) / static_cast<double>(n - 1);
      csv += detail::format_double(f) + "," +
             detail::format_double(snr_at(f, taps_bob, alloc, power, c.system)) + "," +
             detail::format_double(snr_at(f, taps_eve, eve_alloc, power, c.system)) + "\n";
    }
    write_text(dir / "snr.csv", csv);
    std::cout << "wrote " << (dir / "snr.csv").string() << "\n";
  }
  emit_manifest(c, "rate", dir);
  return 0;
}

int run_optimize(const std::string& scene_path, const std::string& mode, std::uint64_t seed,
                 bool seed_set, double power_flag, bool power_set,
                 const std::string& out_dir) {
  Config c = load_config(scene_path);
  if (seed_set) c.ga.rng_seed = seed;
  if (power_set) {
    c.scene.led.optical_power_w = power_flag;
    c.scene.validate();
  }
  const ChannelTaps taps_bob = build_channel_taps(c.scene, c.scene.bob);
  const ChannelTaps taps_eve = build_channel_taps(c.scene, c.scene.eve);
  const SecrecyContext context(taps_bob, taps_eve, c.scene.led.optical_power_w, c.system);
  const std::filesystem::path dir = ensure_out_dir(out_dir);

  if (mode == "baselines") {
    std::string csv = "label,allocation,Cs_Mbps\n";
    for (const BaselineResult& b : baselines(context, c.ga.rng_seed)) {
      const std::string bits = b.label == "los_only" ? "-" : b.allocation.to_string();
      std::cout << b.label << " " << bits << " " << detail::format_mbps(b.fitness)
                << " Mbit/s\n";
      csv += b.label + "," + bits + "," + detail::format_mbps(b.fitness) + "\n";
    }
    write_text(dir / "baselines.csv", csv);
    std::cout << "wrote " << (dir / "baselines.csv").string() << "\n";
    emit_manifest(c, "optimize", dir);
    return 0;
  }

  const OptimizationResult result =
      mode == "es" ? exhaustive_search(context) : ga_optimize(c.ga, context);
  std::cout << "allocation " << result.best_allocation.to_string() << "\n";
  std::cout << "secrecy_Mbps " << detail::format_mbps(result.best_fitness) << "\n";
  std::cout << "evaluations " << result.evaluations << "\n";
  if (mode != "es") {
    std::string csv = "generation,best_Cs_Mbps\n";
    for (std::size_t g = 0; g < result.fitness_history.size(); ++g) {
      csv += std::to_string(g) + "," + detail::format_mbps(result.fitness_history[g]) + "\n";
    }
    write_text(dir / "history.csv", csv);
    std::cout << "wrote " << (dir / "history.csv").string() << "\n";
  }
  emit_manifest(c, "optimize", dir);
  return 0;
}

int run_experiment_cmd(const std::string& scenario_path, std::uint64_t seed, bool seed_set,
                       int trials, bool trials_set, int threads, const std::string& out_dir) {
  Config c = load_config(scenario_path);
  if (seed_set) c.scenario.master_seed = seed;
  if (trials_set) c.scenario.trials = trials;
  c.scenario.validate();

  const ExperimentResult result =
      run_experiment(c.scene, c.system, c.ga, c.scenario, threads);
  const std::string manifest = make_run_manifest(c, "experiment", current_utc_timestamp());
  const ExportPaths paths = export_results(result, manifest, out_dir);

  for (const SummaryRow& row : result.summary.rows) {
    std::cout << "P=" << detail::format_double(row.power_w)
              << " W  mean_Cs_los=" << detail::format_mbps(row.cs_los)
              << " Mbit/s  mean_Cs_opt=" << detail::format_mbps(row.cs_opt) << " Mbit/s";
    if (row.enhancement_percent) {
      std::cout << "  enhancement=" << detail::format_double(*row.enhancement_percent) << "%";
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << paths.trials_csv.string() << "\n";
  std::cout << "wrote " << paths.summary_csv.string() << "\n";
  std::cout << "wrote " << paths.manifest_json.string() << "\n";
  return 0;
}

int run_validate(bool quick, const std::string& out_dir) {
  const std::vector<CheckResult> results = run_validation(quick);
  int failures = 0;
  for (const CheckResult& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.detail.empty()) std::cout << " - " << r.detail;
    std::cout << "\n";
    if (!r.passed) ++failures;
  }
  std::cout << results.size() - failures << "/" << results.size() << " checks passed\n";
  Config c;
  c.scene.validate();
  emit_manifest(c, "validate", ensure_out_dir(out_dir));
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted optical wireless secrecy simulator"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  std::string out_channel = ".";
  std::string out_rate = ".";
  std::string out_optimize = ".";
  std::string out_experiment = ".";
  std::string out_validate = ".";
  const auto add_out = [](CLI::App* sub, std::string& target) {
    sub->add_option("--out", target, "output directory")
        ->envname("VLCSEC_OUT_DIR")
        ->capture_default_str();
  };

  CLI::App* channel_cmd = app.add_subcommand("channel", "export channel taps and frequency response");
  std::string channel_scene;
  std::string channel_user = "bob";
  double channel_fmax = 5e8;
  int channel_points = 1024;
  channel_cmd->add_option("--scene", channel_scene, "configuration file");
  channel_cmd->add_option("--user", channel_user, "receiver to evaluate")
      ->check(CLI::IsMember({"bob", "eve"}));
  channel_cmd->add_option("--fmax", channel_fmax, "maximum frequency in Hz")
      ->check(CLI::PositiveNumber);
  channel_cmd->add_option("--points", channel_points, "frequency sample count")
      ->check(CLI::Range(2, 10'000'000));
  add_out(channel_cmd, out_channel);

  CLI::App* rate_cmd = app.add_subcommand("rate", "rates and secrecy capacity for one allocation");
  std::string rate_scene;
  std::string rate_alloc;
  double rate_power = 0.0;
  bool rate_snr_csv = false;
  rate_cmd->add_option("--scene", rate_scene, "configuration file");
  rate_cmd->add_option("--alloc", rate_alloc, "allocation bitstring, 1 assigns to Bob")
      ->required();
  CLI::Option* rate_power_opt =
      rate_cmd->add_option("--power", rate_power, "LED optical power in W");
  rate_cmd->add_flag("--snr-csv", rate_snr_csv, "also export per-frequency SNR");
  add_out(rate_cmd, out_rate);

  CLI::App* optimize_cmd = app.add_subcommand("optimize", "search for the best allocation");
  std::string optimize_scene;
  std::string optimize_mode = "ga";
  std::uint64_t optimize_seed = 0;
  double optimize_power = 0.0;
  optimize_cmd->add_option("--scene", optimize_scene, "configuration file");
  optimize_cmd->add_option("--mode", optimize_mode, "search strategy")
      ->check(CLI::IsMember({"ga", "es", "baselines"}));
  CLI::Option* optimize_seed_opt =
      optimize_cmd->add_option("--seed", optimize_seed, "genetic algorithm seed");
  CLI::Option* optimize_power_opt =
      optimize_cmd->add_option("--power", optimize_power, "LED optical power in W");
  add_out(optimize_cmd, out_optimize);

  CLI::App* experiment_cmd = app.add_subcommand("experiment", "seeded Monte Carlo study");
  std::string experiment_scenario;
  std::uint64_t experiment_seed = 0;
  int experiment_trials = 0;
  int experiment_threads = 0;
  experiment_cmd->add_option("--scenario", experiment_scenario,
                             "configuration or manifest file");
  CLI::Option* experiment_seed_opt =
      experiment_cmd->add_option("--seed", experiment_seed, "master seed");
  CLI::Option* experiment_trials_opt =
      experiment_cmd->add_option("--trials", experiment_trials, "trial count")
          ->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--threads", experiment_threads, "worker cap, 0 = all cores")
      ->check(CLI::NonNegativeNumber);
  add_out(experiment_cmd, out_experiment);

  CLI::App* validate_cmd = app.add_subcommand("validate", "run the invariant suite");
  bool validate_quick = false;
  validate_cmd->add_flag("--quick", validate_quick, "smaller sample counts");
  add_out(validate_cmd, out_validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*channel_cmd) {
      return run_channel(channel_scene, channel_user, channel_fmax, channel_points,
                         out_channel);
    }
    if (*rate_cmd) {
      return run_rate(rate_scene, rate_alloc, rate_power, rate_power_opt->count() > 0,
                      rate_snr_csv, out_rate);
    }
    if (*optimize_cmd) {
      return run_optimize(optimize_scene, optimize_mode, optimize_seed,
                          optimize_seed_opt->count() > 0, optimize_power,
                          optimize_power_opt->count() > 0, out_optimize);
    }
    if (*experiment_cmd) {
      return run_experiment_cmd(experiment_scenario, experiment_seed,
                                experiment_seed_opt->count() > 0, experiment_trials,
                                experiment_trials_opt->count() > 0, experiment_threads,
                                out_experiment);
    }
    if (*validate_cmd) {
      return run_validate(validate_quick, out_validate);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
