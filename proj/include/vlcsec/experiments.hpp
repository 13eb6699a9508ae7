#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vlcsec/channel.hpp"
#include "vlcsec/error.hpp"
#include "vlcsec/geometry.hpp"
#include "vlcsec/optimizer.hpp"
#include "vlcsec/rate.hpp"
#include "vlcsec/rng.hpp"

namespace vlcsec {

/// Where the two users land each trial: both uniform over the floor, or the
/// worst case with Eve inside the LED's inner zone and Bob outside it.
enum class Placement { BothUniform, EveInnerBobOuter };

enum class OptimizerMode { Ga, Es };

/// Monte Carlo study description: placement policy, trial count, LED power
/// sweep, optimizer, and the master seed everything derives from.
struct ScenarioConfig {
  Placement placement = Placement::BothUniform;
  int trials = 300;
  std::vector<double> power_sweep_w = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
  OptimizerMode optimizer_mode = OptimizerMode::Ga;
  std::uint64_t master_seed = 1;

  void validate() const {
    if (trials < 1) throw ConfigError("scenario.trials: must be at least 1");
    if (power_sweep_w.empty()) {
      throw ConfigError("scenario.power_sweep_w: must contain at least one power");
    }
    double prev = 0.0;
    for (double p : power_sweep_w) {
      if (!(p > prev)) {
        throw ConfigError("scenario.power_sweep_w: powers must be positive and strictly ascending");
      }
      prev = p;
    }
  }
};

/// One trial's results at one LED power.
struct PowerEntry {
  double power_w = 0.0;
  double rb_los = 0.0;
  double re_los = 0.0;
  double cs_los = 0.0;
  double rb_opt = 0.0;
  double re_opt = 0.0;
  double cs_opt = 0.0;
  std::string allocation_bits;
};

/// One random placement with its full power sweep.
struct TrialRecord {
  int trial_index = 0;
  Vec3 bob_position{};
  Vec3 eve_position{};
  std::vector<PowerEntry> entries;
};

/// Per-power means across trials. enhancement_percent is empty when the
/// baseline mean is exactly zero (the change is undefined there).
struct SummaryRow {
  double power_w = 0.0;
  double rb_los = 0.0;
  double re_los = 0.0;
  double cs_los = 0.0;
  double rb_opt = 0.0;
  double re_opt = 0.0;
  double cs_opt = 0.0;
  std::optional<double> enhancement_percent;
};

struct ExperimentSummary {
  std::vector<SummaryRow> rows;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  ExperimentSummary summary;
};

/// Signed relative change of the optimized secrecy capacity against the
/// baseline, in percent of the baseline magnitude. Undefined at a zero
/// baseline; both raw values should always be reported alongside.
inline double enhancement_percent(double c_base, double c_opt) {
  if (c_base == 0.0) {
    throw DomainError("enhancement_percent: undefined for a zero baseline");
  }
  return 100.0 * (c_opt - c_base) / std::abs(c_base);
}

namespace detail {

inline TrialRecord run_trial(const Scene& base, const SystemParams& params, const GaConfig& ga,
                             const ScenarioConfig& scenario, int trial) {
  const std::uint64_t trial_seed = derive_seed(scenario.master_seed, static_cast<std::uint64_t>(trial));
  Rng rng(trial_seed);

  Scene scene = base;
  std::optional<Zone> bob_zone;
  std::optional<Zone> eve_zone;
  if (scenario.placement == Placement::EveInnerBobOuter) {
    bob_zone = scene.zone(ZoneLabel::Outer);
    eve_zone = scene.zone(ZoneLabel::Inner);
  }
  scene.bob.position =
      sample_position(rng, scene.room, scene.led, scene.receiver_height_m, bob_zone);
  scene.eve.position =
      sample_position(rng, scene.room, scene.led, scene.receiver_height_m, eve_zone);

  const ChannelTaps taps_bob = build_channel_taps(scene, scene.bob);
  const ChannelTaps taps_eve = build_channel_taps(scene, scene.eve);

  TrialRecord record;
  record.trial_index = trial;
  record.bob_position = scene.bob.position;
  record.eve_position = scene.eve.position;
  record.entries.reserve(scenario.power_sweep_w.size());

  for (std::size_t pi = 0; pi < scenario.power_sweep_w.size(); ++pi) {
    const double power = scenario.power_sweep_w[pi];
    SecrecyContext context(taps_bob, taps_eve, power, params);

    PowerEntry entry;
    entry.power_w = power;
    entry.rb_los = context.bob().rate_los_only(power);
    entry.re_los = context.eve().rate_los_only(power);
    entry.cs_los = entry.rb_los - entry.re_los;

    OptimizationResult opt;
    if (scenario.optimizer_mode == OptimizerMode::Ga) {
      GaConfig per_power = ga;
      per_power.rng_seed = derive_seed(trial_seed, pi + 1);
      opt = ga_optimize(per_power, context);
    } else {
      opt = exhaustive_search(context);
    }

    const RatePair rates = context.rates(opt.best_allocation);
    entry.rb_opt = rates.rate_bob;
    entry.re_opt = rates.rate_eve;
    entry.cs_opt = rates.secrecy;
    entry.allocation_bits = opt.best_allocation.to_string();
    record.entries.push_back(std::move(entry));
  }
  return record;
}

}  // namespace detail

/// Runs the Monte Carlo study. Each trial draws its positions from a seed
/// derived from (master_seed, trial index) and is independent of the others,
/// so results are bitwise identical for any thread count; aggregation walks
/// trials in index order. Throws (emitting nothing) if any trial fails.
inline ExperimentResult run_experiment(const Scene& scene, const SystemParams& params,
                                       const GaConfig& ga, const ScenarioConfig& scenario,
                                       unsigned threads = 0) {
  Scene base = scene;
  base.validate();
  params.validate();
  ga.validate();
  scenario.validate();
  if (scenario.optimizer_mode == OptimizerMode::Es && base.elements.size() > 15) {
    throw ConfigError(
        "scenario.optimizer_mode: exhaustive search is limited to panels of at most 15 "
        "elements per trial; use ga");
  }

  const int trials = scenario.trials;
  std::vector<TrialRecord> records(static_cast<std::size_t>(trials));

  unsigned worker_count =
      threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  worker_count = std::min(worker_count, static_cast<unsigned>(trials));

  if (worker_count <= 1) {
    for (int t = 0; t < trials; ++t) {
      records[static_cast<std::size_t>(t)] = detail::run_trial(base, params, ga, scenario, t);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(trials));
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (unsigned w = 0; w < worker_count; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
          try {
            records[static_cast<std::size_t>(t)] =
                detail::run_trial(base, params, ga, scenario, t);
          } catch (...) {
            failures[static_cast<std::size_t>(t)] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }

  ExperimentSummary summary;
  summary.rows.reserve(scenario.power_sweep_w.size());
  for (std::size_t pi = 0; pi < scenario.power_sweep_w.size(); ++pi) {
    SummaryRow row;
    row.power_w = scenario.power_sweep_w[pi];
    for (const TrialRecord& record : records) {
      const PowerEntry& e = record.entries[pi];
      row.rb_los += e.rb_los;
      row.re_los += e.re_los;
      row.cs_los += e.cs_los;
      row.rb_opt += e.rb_opt;
      row.re_opt += e.re_opt;
      row.cs_opt += e.cs_opt;
    }
    const double count = static_cast<double>(trials);
    row.rb_los /= count;
    row.re_los /= count;
    row.cs_los /= count;
    row.rb_opt /= count;
    row.re_opt /= count;
    row.cs_opt /= count;
    if (row.cs_los != 0.0) {
      row.enhancement_percent = enhancement_percent(row.cs_los, row.cs_opt);
    }
    summary.rows.push_back(row);
  }

  return {std::move(records), std::move(summary)};
}

namespace detail {

/// Shortest round-trip decimal form, locale-independent; the basis of the
/// byte-identical output contract.
inline std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

inline std::string format_mbps(double bits_per_second) {
  return format_double(bits_per_second / 1e6);
}

}  // namespace detail

struct ExportPaths {
  std::filesystem::path trials_csv;
  std::filesystem::path summary_csv;
  std::filesystem::path manifest_json;
};

inline constexpr const char* kTrialCsvHeader =
    "trial,power_W,bob_x,bob_y,eve_x,eve_y,RB_los_Mbps,RE_los_Mbps,Cs_los_Mbps,RB_opt_Mbps,"
    "RE_opt_Mbps,Cs_opt_Mbps,allocation_bits";

inline constexpr const char* kSummaryCsvHeader =
    "power_W,RB_los_Mbps,RE_los_Mbps,Cs_los_Mbps,RB_opt_Mbps,RE_opt_Mbps,Cs_opt_Mbps,"
    "enhancement_percent";

/// Writes trials.csv (one row per trial and power), summary.csv (one row per
/// power), and manifest.json (the caller-rendered run manifest) into the
/// directory. Rates appear in Mbit/s. Nothing in the CSVs depends on time or
/// scheduling, so identical experiments export identical bytes.
inline ExportPaths export_results(const ExperimentResult& result,
                                  const std::string& manifest_json,
                                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec && !std::filesystem::is_directory(out_dir)) {
    throw IoError("export_results: cannot create directory " + out_dir.string());
  }

  const auto open = [](const std::filesystem::path& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("export_results: cannot write " + path.string());
    return file;
  };

  ExportPaths paths{out_dir / "trials.csv", out_dir / "summary.csv", out_dir / "manifest.json"};

  {
    std::ofstream file = open(paths.trials_csv);
    file << kTrialCsvHeader << '\n';
    for (const TrialRecord& record : result.records) {
      for (const PowerEntry& e : record.entries) {
        file << record.trial_index << ',' << detail::format_double(e.power_w) << ','
             << detail::format_double(record.bob_position.x) << ','
             << detail::format_double(record.bob_position.y) << ','
             << detail::format_double(record.eve_position.x) << ','
             << detail::format_double(record.eve_position.y) << ','
             << detail::format_mbps(e.rb_los) << ',' << detail::format_mbps(e.re_los) << ','
             << detail::format_mbps(e.cs_los) << ',' << detail::format_mbps(e.rb_opt) << ','
             << detail::format_mbps(e.re_opt) << ',' << detail::format_mbps(e.cs_opt) << ','
             << e.allocation_bits << '\n';
      }
    }
  }
  {
    std::ofstream file = open(paths.summary_csv);
    file << kSummaryCsvHeader << '\n';
    for (const SummaryRow& row : result.summary.rows) {
      file << detail::format_double(row.power_w) << ',' << detail::format_mbps(row.rb_los)
           << ',' << detail::format_mbps(row.re_los) << ',' << detail::format_mbps(row.cs_los)
           << ',' << detail::format_mbps(row.rb_opt) << ',' << detail::format_mbps(row.re_opt)
           << ',' << detail::format_mbps(row.cs_opt) << ','
           << (row.enhancement_percent ? detail::format_double(*row.enhancement_percent)
                                       : std::string("nan"))
           << '\n';
    }
  }
  {
    std::ofstream file = open(paths.manifest_json);
    file << manifest_json;
    if (manifest_json.empty() || manifest_json.back() != '\n') file << '\n';
  }

  return paths;
}

}  // namespace vlcsec
