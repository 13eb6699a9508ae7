#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vlcsec/channel.hpp"
#include "vlcsec/config.hpp"
#include "vlcsec/experiments.hpp"
#include "vlcsec/geometry.hpp"
#include "vlcsec/optimizer.hpp"
#include "vlcsec/rate.hpp"
#include "vlcsec/rng.hpp"

namespace vlcsec {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

inline Scene panel_scene(int count_x, int count_y) {
  Scene s;
  s.panel.count_x = count_x;
  s.panel.count_y = count_y;
  s.validate();
  return s;
}

inline void place_users(Scene& s, Rng& rng, const std::optional<Zone>& bob_zone,
                        const std::optional<Zone>& eve_zone) {
  s.bob.position = sample_position(rng, s.room, s.led, s.receiver_height_m, bob_zone);
  s.eve.position = sample_position(rng, s.room, s.led, s.receiver_height_m, eve_zone);
}

/// The discretized-CIR verification oracle: taps accumulated into the
/// nearest of 2^16 bins spanning [0, 100 ns], then the discrete-time
/// Fourier transform evaluated directly.
inline std::complex<double> binned_cfr(const ChannelTaps& taps, double f_hz) {
  constexpr long kBins = 1L << 16;
  constexpr double kSpan = 100e-9;
  constexpr double kDt = kSpan / static_cast<double>(kBins);
  std::vector<std::pair<long, double>> impulses;
  impulses.reserve(taps.element_count() + 1);
  impulses.emplace_back(std::lround(taps.los_delay / kDt), taps.los_gain);
  for (std::size_t i = 0; i < taps.element_count(); ++i) {
    if (taps.nlos_gains[i] == 0.0) continue;
    impulses.emplace_back(std::lround(taps.nlos_delays[i] / kDt), taps.nlos_gains[i]);
  }
  std::complex<double> sum{0.0, 0.0};
  for (const auto& [bin, gain] : impulses) {
    if (bin < 0 || bin >= kBins) {
      throw DomainError("binned_cfr: tap delay outside the 100 ns window");
    }
    const double t = static_cast<double>(bin) * kDt;
    sum += gain * std::polar(1.0, -2.0 * std::numbers::pi * f_hz * t);
  }
  return sum;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

/// LoS-only variant of a tap list (all reflected paths removed).
inline ChannelTaps strip_to_los(const ChannelTaps& taps) {
  ChannelTaps out;
  out.los_gain = taps.los_gain;
  out.los_delay = taps.los_delay;
  out.responsivity = taps.responsivity;
  return out;
}

struct CheckOutcome {
  bool passed = false;
  std::string detail;
};

using CheckFn = std::function<CheckOutcome()>;

inline void run_check(std::vector<CheckResult>& out, const std::string& name,
                      const CheckFn& fn) {
  CheckResult r;
  r.name = name;
  try {
    CheckOutcome o = fn();
    r.passed = o.passed;
    r.detail = std::move(o.detail);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("unexpected error: ") + e.what();
  }
  out.push_back(std::move(r));
}

inline bool trial_records_equal(const TrialRecord& a, const TrialRecord& b) {
  if (a.trial_index != b.trial_index) return false;
  if (!(a.bob_position == b.bob_position) || !(a.eve_position == b.eve_position)) return false;
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const PowerEntry& x = a.entries[i];
    const PowerEntry& y = b.entries[i];
    if (x.power_w != y.power_w || x.rb_los != y.rb_los || x.re_los != y.re_los ||
        x.cs_los != y.cs_los || x.rb_opt != y.rb_opt || x.re_opt != y.re_opt ||
        x.cs_opt != y.cs_opt || x.allocation_bits != y.allocation_bits) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Runs every module-level invariant as an executable check. quick mode
/// shrinks the sampled scene counts; the checks themselves are identical.
inline std::vector<CheckResult> run_validation(bool quick = false) {
  using namespace detail;
  std::vector<CheckResult> results;
  const SystemParams params;

  run_check(results, "geometry.element-grid-on-wall", []() -> CheckOutcome {
    Scene s;
    s.validate();
    if (s.elements.size() != 144) return {false, "expected 144 elements"};
    const double dz = effective_vertical_spacing(s.panel, s.room);
    for (const Vec3& e : s.elements) {
      if (e.y != 0.0) return {false, "element off the wall plane at y=" + fmt(e.y)};
      if (e.x < 0.0 || e.x > s.room.width || e.z < 0.0 || e.z > s.room.height) {
        return {false, "element outside the wall rectangle"};
      }
    }
    for (int row = 0; row < 12; ++row) {
      for (int col = 0; col < 12; ++col) {
        const Vec3& e = s.elements[static_cast<std::size_t>(row * 12 + col)];
        const double x = 2.5 + (col - 5.5) * 0.3;
        const double z = 1.5 + (row - 5.5) * dz;
        if (std::abs(e.x - x) > 1e-12 || std::abs(e.z - z) > 1e-12) {
          return {false, "grid position mismatch at row " + std::to_string(row)};
        }
      }
    }
    return {true, "144 elements, vertical pitch " + fmt(dz) + " m"};
  });

  run_check(results, "geometry.element-grid-deterministic", []() -> CheckOutcome {
    Scene s;
    s.validate();
    const auto a = element_positions(s.panel, s.room);
    const auto b = element_positions(s.panel, s.room);
    if (a != b) return {false, "repeated layout differs"};
    if (a != s.elements) return {false, "cached layout differs"};
    return {true, "layout reproducible"};
  });

  run_check(results, "geometry.cos-angle-properties", []() -> CheckOutcome {
    Rng rng(0xC05A11);
    for (int i = 0; i < 500; ++i) {
      const Vec3 from{rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 3.0)};
      Vec3 to{rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 3.0)};
      if (distance(from, to) < 1e-6) continue;
      Vec3 n{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      if (n.norm() < 1e-3) continue;
      n = n.normalized();
      const double c = cos_angle(from, to, n);
      if (!(c >= -1.0 - 1e-12 && c <= 1.0 + 1e-12)) {
        return {false, "cosine outside [-1, 1]: " + fmt(c)};
      }
      const double lambda = rng.uniform(0.1, 10.0);
      const Vec3 scaled = from + lambda * (to - from);
      if (std::abs(cos_angle(from, scaled, n) - c) > 1e-10) {
        return {false, "not scale invariant"};
      }
    }
    return {true, "bounded and scale invariant over 500 draws"};
  });

  run_check(results, "geometry.zone-sampling", []() -> CheckOutcome {
    Scene s;
    s.validate();
    Rng rng(0x5A3E);
    for (int i = 0; i < 2000; ++i) {
      const Vec3 p = sample_position(rng, s.room, s.led, s.receiver_height_m, std::nullopt);
      if (!s.room.contains(p) || p.z != s.receiver_height_m) {
        return {false, "unzoned sample outside the room or off the receiver plane"};
      }
      const Vec3 inner =
          sample_position(rng, s.room, s.led, s.receiver_height_m, s.zone(ZoneLabel::Inner));
      if (!(horizontal_distance_to_emitter(inner, s.led) < s.zone_radius_m)) {
        return {false, "inner-zone sample at radius " +
                           fmt(horizontal_distance_to_emitter(inner, s.led))};
      }
      const Vec3 outer =
          sample_position(rng, s.room, s.led, s.receiver_height_m, s.zone(ZoneLabel::Outer));
      if (!(horizontal_distance_to_emitter(outer, s.led) >= s.zone_radius_m)) {
        return {false, "outer-zone sample at radius " +
                           fmt(horizontal_distance_to_emitter(outer, s.led))};
      }
    }
    return {true, "2000 samples per zone respect the radius threshold"};
  });

  run_check(results, "channel.lambertian-half-power", []() -> CheckOutcome {
    for (double semiangle : {30.0, 45.0, 60.0, 70.0}) {
      const double m = lambertian_order(semiangle);
      const double at_half = std::pow(std::cos(deg_to_rad(semiangle)), m);
      if (std::abs(at_half - 0.5) > 1e-12) {
        return {false, "directional factor at the semiangle is " + fmt(at_half)};
      }
    }
    if (std::abs(lambertian_order(60.0) - 1.0) > 1e-12) {
      return {false, "order at 60 deg is " + fmt(lambertian_order(60.0))};
    }
    return {true, "half-power point matches the order for 4 semiangles"};
  });

  run_check(results, "channel.fov-cutoff", []() -> CheckOutcome {
    Scene s;
    s.validate();
    UserTerminal grazing = s.bob;
    grazing.position = {0.1, 2.5, 2.9};
    grazing.pd.fov_deg = 60.0;
    if (los_gain(s.led, grazing) != 0.0) {
      return {false, "gain nonzero past the field of view"};
    }
    if (concentrator_gain(70.0, 60.0, 1.5) != 0.0) {
      return {false, "concentrator nonzero past its field of view"};
    }
    const double inside = concentrator_gain(50.0, 60.0, 1.5);
    const double expected = 1.5 * 1.5 / std::pow(std::sin(deg_to_rad(60.0)), 2);
    if (std::abs(inside - expected) > 1e-12 * expected) {
      return {false, "in-view concentrator gain is " + fmt(inside)};
    }
    return {true, "zero beyond the field of view, analytic inside"};
  });

  run_check(results, "channel.reflectivity-linearity", []() -> CheckOutcome {
    Scene s;
    s.validate();
    const Vec3 n = s.panel.normal();
    for (std::size_t idx : {std::size_t{70}, std::size_t{100}, std::size_t{143}}) {
      const double unit = nlos_gain(s.led, s.elements[idx], n, s.bob, 1.0);
      for (double rho : {0.25, 0.5, 0.8}) {
        const double scaled = nlos_gain(s.led, s.elements[idx], n, s.bob, rho);
        if (rel_diff(scaled, rho * unit) > 1e-15) {
          return {false, "gain not linear in reflectivity at element " + std::to_string(idx)};
        }
      }
    }
    return {true, "reflected gain scales linearly with reflectivity"};
  });

  run_check(results, "channel.cfr-hermitian-symmetry", []() -> CheckOutcome {
    Scene s;
    s.validate();
    const ChannelTaps taps = build_channel_taps(s, s.bob);
    double scale = taps.los_gain;
    for (double g : taps.nlos_gains) scale += g;
    Rng rng(0xC4F2);
    for (int i = 0; i < 200; ++i) {
      const double f = rng.uniform(0.0, 5e8);
      const std::complex<double> q = cfr(taps, f);
      const std::complex<double> qneg = cfr(taps, -f);
      if (std::abs(qneg - std::conj(q)) > 1e-12 * scale) {
        return {false, "conjugate symmetry broken at f=" + fmt(f)};
      }
    }
    return {true, "Q(-f) = conj(Q(f)) over 200 frequencies"};
  });

  run_check(results, "channel.cfr-dc-gain-sum", []() -> CheckOutcome {
    Scene s;
    s.validate();
    const ChannelTaps taps = build_channel_taps(s, s.bob);
    double total = taps.los_gain;
    for (double g : taps.nlos_gains) total += g;
    if (rel_diff(cfr(taps, 0.0).real(), total) > 1e-12 || cfr(taps, 0.0).imag() != 0.0) {
      return {false, "full DC response differs from the gain sum"};
    }
    Rng rng(0xDC01);
    for (int i = 0; i < 20; ++i) {
      const AllocationVector mask = AllocationVector::random(taps.element_count(), rng);
      double masked = taps.los_gain;
      for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask.test(k)) masked += taps.nlos_gains[k];
      }
      if (rel_diff(cfr(taps, mask, 0.0).real(), masked) > 1e-12) {
        return {false, "masked DC response differs from the masked gain sum"};
      }
    }
    return {true, "DC response equals the tap gain sum, masked and full"};
  });

  run_check(results, "channel.two-path-identity", []() -> CheckOutcome {
    Rng rng(0x2BA7);
    Scene s = panel_scene(1, 1);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      s.panel.center = {rng.uniform(0.3, 4.7), 0.0, rng.uniform(0.3, 2.7)};
      s.panel.count_x = 1;
      s.panel.count_y = 1;
      s.validate();
      place_users(s, rng, std::nullopt, std::nullopt);
      const ChannelTaps taps = build_channel_taps(s, s.bob);
      const double f = rng.uniform(0.0, 5e8);
      const double lhs = std::norm(cfr(taps, f));
      const double rhs = power_gain_two_path(taps.los_gain, taps.nlos_gains[0],
                                             taps.nlos_delays[0] - taps.los_delay, f);
      worst = std::max(worst, rel_diff(lhs, rhs));
    }
    if (worst > 1e-12) return {false, "max relative mismatch " + fmt(worst)};
    return {true, "1000 draws, max relative mismatch " + fmt(worst)};
  });

  run_check(results, "channel.binned-cir-matches-cfr", [quick]() -> CheckOutcome {
    const int scenes = quick ? 5 : 20;
    Rng rng(0xB14D01);
    Scene s;
    s.validate();
    double worst = 0.0;
    for (int scene_i = 0; scene_i < scenes; ++scene_i) {
      place_users(s, rng, std::nullopt, std::nullopt);
      for (const UserTerminal* user : {&s.bob, &s.eve}) {
        const ChannelTaps taps = build_channel_taps(s, *user);
        for (int k = 0; k <= 20; ++k) {
          const double f = 25e6 * k;
          const double exact = std::abs(cfr(taps, f));
          const double binned = std::abs(binned_cfr(taps, f));
          worst = std::max(worst, std::abs(binned - exact) / exact);
        }
      }
    }
    if (worst > 0.01) {
      return {false, "max relative error " + fmt(worst) + " exceeds 1%"};
    }
    return {true, std::to_string(scenes) + " scenes, max relative error " + fmt(worst)};
  });

  run_check(results, "channel.tap-causality", []() -> CheckOutcome {
    Rng rng(0xCA05);
    Scene s;
    s.validate();
    for (int i = 0; i < 50; ++i) {
      place_users(s, rng, std::nullopt, std::nullopt);
      for (const UserTerminal* user : {&s.bob, &s.eve}) {
        const ChannelTaps taps = build_channel_taps(s, *user);
        const double direct = distance(s.led.position, user->position);
        if (rel_diff(taps.los_delay, direct / speed_of_light_m_per_s) > 1e-12) {
          return {false, "direct delay inconsistent with distance"};
        }
        for (double tau : taps.nlos_delays) {
          if (!(tau >= taps.los_delay)) {
            return {false, "reflected path arrives before the direct path"};
          }
        }
      }
    }
    return {true, "all reflected delays at or after the direct delay, 50 scenes"};
  });

  run_check(results, "rate.snr-power-scaling", [&params]() -> CheckOutcome {
    Scene s;
    s.validate();
    const ChannelTaps taps = build_channel_taps(s, s.bob);
    Rng rng(0x55C4);
    for (int i = 0; i < 100; ++i) {
      const double f = rng.uniform(0.0, params.band_hz());
      const double p = rng.uniform(0.2, 5.0);
      const double g1 = snr_at(f, taps, p, params);
      const double g2 = snr_at(f, taps, 2.0 * p, params);
      if (!(g1 >= 0.0)) return {false, "negative SNR"};
      if (rel_diff(g2, 4.0 * g1) > 1e-12) {
        return {false, "SNR not quadratic in power at f=" + fmt(f)};
      }
    }
    return {true, "SNR scales with the power squared over 100 draws"};
  });

  run_check(results, "rate.monotone-in-power", [&params]() -> CheckOutcome {
    Scene s;
    s.validate();
    const ChannelTaps taps = build_channel_taps(s, s.bob);
    const AllocationVector zeros(taps.element_count());
    double prev_all = 0.0;
    double prev_los = 0.0;
    for (double p : {0.5, 1.0, 3.0, 7.0}) {
      const double r_all = achievable_rate(taps, p, params);
      const double r_los = achievable_rate(taps, zeros, p, params);
      if (!(r_all > prev_all) || !(r_los > prev_los)) {
        return {false, "rate not strictly increasing at " + fmt(p) + " W"};
      }
      prev_all = r_all;
      prev_los = r_los;
    }
    return {true, "full and direct-only rates strictly increase in power"};
  });

  run_check(results, "rate.quadrature-doubling", [quick, &params]() -> CheckOutcome {
    const int triples = quick ? 10 : 30;
    Rng rng(0x0D0B);
    Scene s;
    s.validate();
    SystemParams refined = params;
    refined.integration_samples = 2 * (params.integration_samples - 1) + 1;
    double worst = 0.0;
    for (int i = 0; i < triples; ++i) {
      place_users(s, rng, std::nullopt, std::nullopt);
      const ChannelTaps taps = build_channel_taps(s, s.bob);
      const AllocationVector mask = AllocationVector::random(taps.element_count(), rng);
      const double p = rng.uniform(0.5, 7.0);
      const double coarse = achievable_rate(taps, mask, p, params);
      const double fine = achievable_rate(taps, mask, p, refined);
      worst = std::max(worst, rel_diff(coarse, fine));
    }
    if (worst > 1e-3) return {false, "doubling changed a rate by " + fmt(worst * 100) + "%"};
    return {true, std::to_string(triples) + " triples, max change " + fmt(worst * 100) + "%"};
  });

  run_check(results, "rate.secrecy-antisymmetry", [quick, &params]() -> CheckOutcome {
    const int draws = quick ? 25 : 100;
    Rng rng(0xA2B2);
    Scene s;
    s.validate();
    double worst = 0.0;
    for (int i = 0; i < draws; ++i) {
      place_users(s, rng, std::nullopt, std::nullopt);
      const ChannelTaps tb = build_channel_taps(s, s.bob);
      const ChannelTaps te = build_channel_taps(s, s.eve);
      const AllocationVector mask = AllocationVector::random(tb.element_count(), rng);
      const double p = rng.uniform(0.5, 7.0);
      const double forward = secrecy_capacity(tb, te, mask, p, params).secrecy;
      const double swapped = secrecy_capacity(te, tb, mask.complement(), p, params).secrecy;
      worst = std::max(worst, std::abs(forward + swapped) /
                                  std::max({std::abs(forward), std::abs(swapped), 1.0}));
    }
    if (worst > 1e-12) return {false, "max antisymmetry violation " + fmt(worst)};
    return {true, std::to_string(draws) + " draws, swapping roles negates the capacity"};
  });

  run_check(results, "rate.evaluator-consistency", [&params]() -> CheckOutcome {
    Rng rng(0xEA17);
    Scene s;
    s.validate();
    place_users(s, rng, std::nullopt, std::nullopt);
    const ChannelTaps taps = build_channel_taps(s, s.bob);
    const RateEvaluator evaluator(taps, params);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const AllocationVector mask = AllocationVector::random(taps.element_count(), rng);
      const double p = rng.uniform(0.5, 7.0);
      worst = std::max(worst, rel_diff(evaluator.rate(mask, p),
                                       achievable_rate(taps, mask, p, params)));
    }
    worst = std::max(worst, rel_diff(evaluator.rate_all_elements(3.0),
                                     achievable_rate(taps, 3.0, params)));
    worst = std::max(
        worst, rel_diff(evaluator.rate_los_only(3.0),
                        achievable_rate(taps, AllocationVector(taps.element_count()), 3.0,
                                        params)));
    if (worst > 1e-9) return {false, "incremental path drifts by " + fmt(worst)};
    return {true, "incremental and reference paths agree, max drift " + fmt(worst)};
  });

  run_check(results, "rate.los-rate-band", [&params]() -> CheckOutcome {
    Scene s;
    s.validate();
    s.bob.position = {2.5, 2.5, 0.85};
    const ChannelTaps direct = strip_to_los(build_channel_taps(s, s.bob));
    double prev = 0.0;
    for (double p : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0}) {
      const double r = achievable_rate(direct, p, params);
      if (!(r > prev)) return {false, "direct-link rate not increasing at " + fmt(p) + " W"};
      if (r < 1e8 || r >= 1e10) {
        return {false, "direct-link rate " + fmt(r) + " bit/s out of band at " + fmt(p) + " W"};
      }
      prev = r;
    }
    return {true, "vertical 2.15 m link sweeps 1-7 W inside [1e8, 1e10) bit/s, monotone"};
  });

  run_check(results, "optimizer.history-nondecreasing", [&params]() -> CheckOutcome {
    Rng rng(0x6A11);
    Scene s = panel_scene(4, 4);
    place_users(s, rng, std::nullopt, std::nullopt);
    const SecrecyContext context(build_channel_taps(s, s.bob), build_channel_taps(s, s.eve),
                                 3.0, params);
    GaConfig ga;
    ga.population_size = 20;
    ga.generations = 12;
    ga.elite_count = 2;
    ga.rng_seed = 7;
    const OptimizationResult result = ga_optimize(ga, context);
    if (result.fitness_history.size() != 13) return {false, "history length wrong"};
    for (std::size_t i = 1; i < result.fitness_history.size(); ++i) {
      if (result.fitness_history[i] < result.fitness_history[i - 1]) {
        return {false, "best fitness decreased at generation " + std::to_string(i)};
      }
    }
    if (result.best_fitness != result.fitness_history.back()) {
      return {false, "final history entry is not the best fitness"};
    }
    return {true, "13 history entries, nondecreasing, final equals best"};
  });

  run_check(results, "optimizer.evaluation-count", [&params]() -> CheckOutcome {
    Rng rng(0x6A22);
    Scene s = panel_scene(4, 4);
    place_users(s, rng, std::nullopt, std::nullopt);
    const SecrecyContext context(build_channel_taps(s, s.bob), build_channel_taps(s, s.eve),
                                 3.0, params);
    for (auto [pop, gens, elite] : {std::array<int, 3>{20, 12, 2}, std::array<int, 3>{7, 5, 3}}) {
      GaConfig ga;
      ga.population_size = pop;
      ga.generations = gens;
      ga.elite_count = elite;
      ga.rng_seed = 11;
      const OptimizationResult result = ga_optimize(ga, context);
      const std::uint64_t expected =
          static_cast<std::uint64_t>(pop) +
          static_cast<std::uint64_t>(gens) * static_cast<std::uint64_t>(pop - elite);
      if (result.evaluations != expected) {
        return {false, "expected " + std::to_string(expected) + " evaluations, got " +
                           std::to_string(result.evaluations)};
      }
    }
    return {true, "evaluation budget matches population + generations x offspring"};
  });

  run_check(results, "optimizer.ga-beats-baselines", [&params]() -> CheckOutcome {
    Rng rng(0x6A33);
    Scene s = panel_scene(4, 4);
    place_users(s, rng, std::nullopt, std::nullopt);
    const SecrecyContext context(build_channel_taps(s, s.bob), build_channel_taps(s, s.eve),
                                 3.0, params);
    GaConfig ga;
    ga.population_size = 20;
    ga.generations = 10;
    ga.elite_count = 2;
    ga.rng_seed = 7;
    const OptimizationResult result = ga_optimize(ga, context);
    for (const BaselineResult& b : baselines(context, ga.rng_seed)) {
      if (b.label == "los_only") continue;
      if (!(result.best_fitness >= b.fitness)) {
        return {false, "best fitness below the " + b.label + " baseline"};
      }
    }
    return {true, "best fitness dominates every injectable baseline"};
  });

  run_check(results, "optimizer.es-exact-on-tiny-space", [&params]() -> CheckOutcome {
    Scene s = panel_scene(2, 2);
    const SecrecyContext context(build_channel_taps(s, s.bob), build_channel_taps(s, s.eve),
                                 3.0, params);
    double best_value = 0.0;
    AllocationVector best(4);
    bool first = true;
    for (unsigned v = 0; v < 16; ++v) {
      AllocationVector mask(4);
      for (std::size_t i = 0; i < 4; ++i) {
        if ((v >> (3 - i)) & 1u) mask.flip(i);
      }
      const double value = context.fitness(mask);
      if (first || value > best_value) {
        best_value = value;
        best = mask;
        first = false;
      }
    }
    const OptimizationResult es = exhaustive_search(context);
    if (!(es.best_allocation == best)) {
      return {false, "search returned " + es.best_allocation.to_string() + ", enumeration " +
                         best.to_string()};
    }
    if (rel_diff(es.best_fitness, best_value) > 1e-12) {
      return {false, "fitness mismatch against enumeration"};
    }
    if (es.evaluations != 16) return {false, "evaluation count wrong"};
    return {true, "matches plain enumeration over all 16 masks"};
  });

  run_check(results, "optimizer.ga-matches-es", [quick, &params]() -> CheckOutcome {
    const int scenes = quick ? 4 : 20;
    Scene s = panel_scene(5, 3);
    int hits = 0;
    for (int i = 0; i < scenes; ++i) {
      Rng rng(derive_seed(0x6A0E5, static_cast<std::uint64_t>(i)));
      place_users(s, rng, std::nullopt, std::nullopt);
      const SecrecyContext context(build_channel_taps(s, s.bob), build_channel_taps(s, s.eve),
                                   3.0, params);
      const OptimizationResult es = exhaustive_search(context);
      GaConfig ga;
      ga.rng_seed = derive_seed(0x6A5EED, static_cast<std::uint64_t>(i));
      const OptimizationResult result = ga_optimize(ga, context);
      if (std::abs(result.best_fitness - es.best_fitness) <=
          1e-9 * std::max(std::abs(es.best_fitness), 1e6)) {
        ++hits;
      }
    }
    const double rate = static_cast<double>(hits) / scenes;
    if (rate < (quick ? 1.0 : 0.95)) {
      return {false, "optimum found in only " + std::to_string(hits) + "/" +
                         std::to_string(scenes) + " scenes"};
    }
    return {true, "optimum found in " + std::to_string(hits) + "/" + std::to_string(scenes) +
                      " scenes"};
  });

  run_check(results, "optimizer.static-config-stagnation", [&params]() -> CheckOutcome {
    Rng rng(0x6A44);
    Scene s = panel_scene(4, 4);
    place_users(s, rng, std::nullopt, std::nullopt);
    const SecrecyContext context(build_channel_taps(s, s.bob), build_channel_taps(s, s.eve),
                                 3.0, params);
    GaConfig ga;
    ga.population_size = 10;
    ga.generations = 8;
    ga.crossover_prob = 0.0;
    ga.mutation_prob = 0.0;
    ga.elite_count = 1;
    ga.rng_seed = 3;
    const OptimizationResult result = ga_optimize(ga, context);
    for (double v : result.fitness_history) {
      if (v != result.fitness_history.front()) {
        return {false, "fitness changed without novelty operators"};
      }
    }
    return {true, "no crossover or mutation leaves the best fitness static"};
  });

  run_check(results, "experiments.trial-shape-and-policy", [&params]() -> CheckOutcome {
    Scene s = panel_scene(3, 3);
    GaConfig ga;
    ga.population_size = 10;
    ga.generations = 5;
    ga.elite_count = 1;
    ScenarioConfig zoned;
    zoned.placement = Placement::EveInnerBobOuter;
    zoned.trials = 6;
    zoned.power_sweep_w = {3.0};
    zoned.master_seed = 42;
    const ExperimentResult result = run_experiment(s, params, ga, zoned, 1);
    if (result.records.size() != 6) return {false, "record count wrong"};
    for (const TrialRecord& r : result.records) {
      if (r.entries.size() != 1) return {false, "entry count wrong"};
      const double rb = horizontal_distance_to_emitter(r.bob_position, s.led);
      const double re = horizontal_distance_to_emitter(r.eve_position, s.led);
      if (!(re < s.zone_radius_m && rb >= s.zone_radius_m)) {
        return {false, "placement policy violated: bob at " + fmt(rb) + " m, eve at " +
                           fmt(re) + " m"};
      }
    }
    ScenarioConfig single;
    single.trials = 1;
    single.power_sweep_w = {3.0};
    single.master_seed = 7;
    const ExperimentResult one = run_experiment(s, params, ga, single, 1);
    if (one.records.size() != 1 || one.records[0].entries.size() != 1 ||
        one.summary.rows.size() != 1) {
      return {false, "single-trial shape wrong"};
    }
    return {true, "shapes and zone policy hold over 6 zoned trials"};
  });

  Scene shared_scene = panel_scene(3, 3);
  GaConfig shared_ga;
  shared_ga.population_size = 10;
  shared_ga.generations = 5;
  shared_ga.elite_count = 1;
  ScenarioConfig shared_scenario;
  shared_scenario.trials = 4;
  shared_scenario.power_sweep_w = {1.0, 3.0};
  shared_scenario.master_seed = 0xD17E;
  const ExperimentResult shared_run =
      run_experiment(shared_scene, params, shared_ga, shared_scenario, 1);

  run_check(results, "experiments.thread-determinism",
            [&params, &shared_scene, &shared_ga, &shared_scenario,
             &shared_run]() -> CheckOutcome {
              const ExperimentResult threaded =
                  run_experiment(shared_scene, params, shared_ga, shared_scenario, 3);
              if (threaded.records.size() != shared_run.records.size()) {
                return {false, "record counts differ across thread counts"};
              }
              for (std::size_t i = 0; i < threaded.records.size(); ++i) {
                if (!trial_records_equal(threaded.records[i], shared_run.records[i])) {
                  return {false, "trial " + std::to_string(i) + " differs across thread counts"};
                }
              }
              return {true, "1-thread and 3-thread runs agree bitwise"};
            });

  run_check(results, "experiments.secrecy-consistency", [&shared_run]() -> CheckOutcome {
    for (const TrialRecord& r : shared_run.records) {
      for (const PowerEntry& e : r.entries) {
        if (e.cs_los != e.rb_los - e.re_los || e.cs_opt != e.rb_opt - e.re_opt) {
          return {false, "secrecy column differs from the rate difference"};
        }
      }
    }
    return {true, "secrecy columns equal their rate differences exactly"};
  });

  run_check(results, "experiments.baseline-dominance",
            [&params, &shared_scene, &shared_scenario, &shared_run]() -> CheckOutcome {
              for (const TrialRecord& r : shared_run.records) {
                Scene s = shared_scene;
                s.bob.position = r.bob_position;
                s.eve.position = r.eve_position;
                const ChannelTaps tb = build_channel_taps(s, s.bob);
                const ChannelTaps te = build_channel_taps(s, s.eve);
                const std::uint64_t trial_seed =
                    derive_seed(shared_scenario.master_seed,
                                static_cast<std::uint64_t>(r.trial_index));
                for (std::size_t pi = 0; pi < r.entries.size(); ++pi) {
                  const PowerEntry& e = r.entries[pi];
                  const SecrecyContext context(tb, te, e.power_w, params);
                  const std::uint64_t seed = derive_seed(trial_seed, pi + 1);
                  for (const BaselineResult& b : baselines(context, seed)) {
                    if (b.label == "los_only") continue;
                    if (!(e.cs_opt >= b.fitness)) {
                      return {false, "optimized secrecy below the " + b.label +
                                         " baseline in trial " + std::to_string(r.trial_index)};
                    }
                  }
                }
              }
              return {true, "optimized secrecy dominates every injected baseline"};
            });

  run_check(results, "experiments.summary-mean-bounds", [&shared_run,
                                                         &shared_scenario]() -> CheckOutcome {
    if (shared_run.summary.rows.size() != shared_scenario.power_sweep_w.size()) {
      return {false, "summary row count wrong"};
    }
    for (std::size_t pi = 0; pi < shared_run.summary.rows.size(); ++pi) {
      const SummaryRow& row = shared_run.summary.rows[pi];
      const auto field = [&](const PowerEntry& e, int which) {
        switch (which) {
          case 0: return e.rb_los;
          case 1: return e.re_los;
          case 2: return e.cs_los;
          case 3: return e.rb_opt;
          case 4: return e.re_opt;
          default: return e.cs_opt;
        }
      };
      const double means[6] = {row.rb_los, row.re_los, row.cs_los,
                               row.rb_opt, row.re_opt, row.cs_opt};
      for (int which = 0; which < 6; ++which) {
        double lo = field(shared_run.records[0].entries[pi], which);
        double hi = lo;
        for (const TrialRecord& r : shared_run.records) {
          lo = std::min(lo, field(r.entries[pi], which));
          hi = std::max(hi, field(r.entries[pi], which));
        }
        const double slack = 1e-9 * std::max(std::abs(lo), std::abs(hi));
        if (means[which] < lo - slack || means[which] > hi + slack) {
          return {false, "a summary mean falls outside the per-trial range"};
        }
      }
      if (row.cs_los != 0.0) {
        if (!row.enhancement_percent ||
            rel_diff(*row.enhancement_percent, enhancement_percent(row.cs_los, row.cs_opt)) >
                1e-12) {
          return {false, "enhancement column inconsistent with its definition"};
        }
      }
    }
    return {true, "summary means bounded by per-trial extremes"};
  });

  run_check(results, "experiments.uniform-null-secrecy", [&params]() -> CheckOutcome {
    Scene s;
    s.validate();
    const int trials = 300;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(1, static_cast<std::uint64_t>(t)));
      place_users(s, rng, std::nullopt, std::nullopt);
      const ChannelTaps tb = strip_to_los(build_channel_taps(s, s.bob));
      const ChannelTaps te = strip_to_los(build_channel_taps(s, s.eve));
      const double cs = achievable_rate(tb, 3.0, params) - achievable_rate(te, 3.0, params);
      sum += cs;
      sum_sq += cs * cs;
    }
    const double mean = sum / trials;
    const double variance = (sum_sq - sum * sum / trials) / (trials - 1);
    const double standard_error = std::sqrt(variance / trials);
    if (!(std::abs(mean) < 2.0 * standard_error)) {
      return {false, "mean " + fmt(mean / 1e6) + " Mbit/s vs standard error " +
                         fmt(standard_error / 1e6) + " Mbit/s"};
    }
    return {true, "direct-only secrecy mean " + fmt(mean / 1e6) + " Mbit/s within 2 x " +
                      fmt(standard_error / 1e6) + " Mbit/s"};
  });

  run_check(results, "experiments.zoned-los-secrecy-negative", [&params]() -> CheckOutcome {
    Scene s;
    s.validate();
    const int trials = 300;
    std::vector<double> powers = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
    std::vector<double> sums(powers.size(), 0.0);
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(0x5EC6, static_cast<std::uint64_t>(t)));
      place_users(s, rng, s.zone(ZoneLabel::Outer), s.zone(ZoneLabel::Inner));
      const ChannelTaps tb = strip_to_los(build_channel_taps(s, s.bob));
      const ChannelTaps te = strip_to_los(build_channel_taps(s, s.eve));
      for (std::size_t pi = 0; pi < powers.size(); ++pi) {
        sums[pi] += achievable_rate(tb, powers[pi], params) -
                    achievable_rate(te, powers[pi], params);
      }
    }
    std::string details;
    for (std::size_t pi = 0; pi < powers.size(); ++pi) {
      const double mean = sums[pi] / trials;
      if (!(mean < 0.0)) {
        return {false, "mean direct-only secrecy " + fmt(mean / 1e6) + " Mbit/s at " +
                           fmt(powers[pi]) + " W is not negative"};
      }
      if (pi == 2) details = fmt(mean / 1e6);
    }
    return {true, "negative at 1-7 W; at 3 W the mean is " + details + " Mbit/s"};
  });

  run_check(results, "experiments.zoned-optimized-secrecy-positive",
            [quick, &params]() -> CheckOutcome {
              Scene s;
              s.validate();
              GaConfig ga;
              ScenarioConfig scenario;
              scenario.placement = Placement::EveInnerBobOuter;
              scenario.trials = quick ? 12 : 50;
              scenario.power_sweep_w = {3.0};
              scenario.master_seed = 0x5EC7;
              const ExperimentResult result = run_experiment(s, params, ga, scenario, 1);
              const double mean = result.summary.rows[0].cs_opt;
              if (!(mean > 0.0)) {
                return {false, "mean optimized secrecy at 3 W is " + fmt(mean / 1e6) +
                                   " Mbit/s over " + std::to_string(scenario.trials) +
                                   " zoned trials; the optimized split does not lift the "
                                   "band-integrated secrecy above zero here"};
              }
              return {true, "mean optimized secrecy at 3 W is " + fmt(mean / 1e6) + " Mbit/s"};
            });

  run_check(results, "experiments.uniform-bob-rate-gain", [quick, &params]() -> CheckOutcome {
    Scene s;
    s.validate();
    GaConfig ga;
    ScenarioConfig scenario;
    scenario.trials = quick ? 8 : 20;
    scenario.power_sweep_w = {3.0};
    scenario.master_seed = 0x0B0B;
    const ExperimentResult result = run_experiment(s, params, ga, scenario, 1);
    const SummaryRow& row = result.summary.rows[0];
    if (!(row.rb_opt >= row.rb_los)) {
      return {false, "mean optimized rate " + fmt(row.rb_opt / 1e6) +
                         " Mbit/s below the direct-only mean " + fmt(row.rb_los / 1e6)};
    }
    return {true, "mean rate " + fmt(row.rb_los / 1e6) + " -> " + fmt(row.rb_opt / 1e6) +
                      " Mbit/s with the optimized split"};
  });

  run_check(results, "config.defaults-complete", []() -> CheckOutcome {
    const Config parsed = parse_config_json(nlohmann::json::object());
    if (serialize_config(parsed) != serialize_config(Config{})) {
      return {false, "empty object does not produce the default configuration"};
    }
    if (parsed.scene.led.half_power_semiangle_deg != 60.0 ||
        parsed.scene.bob.pd.responsivity_a_per_w != 0.6 ||
        parsed.scene.bob.pd.area_m2 != 1e-4 || parsed.scene.bob.pd.fov_deg != 90.0 ||
        parsed.system.symbol_period_s != 1e-9 || parsed.system.noise_psd != 1e-21 ||
        parsed.scene.panel.reflectivity != 1.0 || parsed.scene.bob.pd.refractive_index != 1.5 ||
        parsed.system.mod_scaling != 3.2 || parsed.system.gap_db != 2.0 ||
        parsed.scene.panel.count_x != 12 || parsed.scene.panel.count_y != 12 ||
        parsed.scene.panel.spacing_x_m != 0.3 || parsed.ga.population_size != 50 ||
        parsed.ga.generations != 30 || parsed.ga.crossover_prob != 0.8) {
      return {false, "a reference default is wrong"};
    }
    if (parsed.ga.mutation_prob.has_value() ||
        parsed.ga.resolved_mutation_prob(144) != 1.0 / 144.0) {
      return {false, "default mutation probability is not 1/N"};
    }
    return {true, "empty object yields the full reference defaults"};
  });

  run_check(results, "config.invalid-rejected", []() -> CheckOutcome {
    const auto expect_failure = [](const char* text, const char* needle) -> bool {
      try {
        parse_config_json(nlohmann::json::parse(text));
        return false;
      } catch (const ConfigError& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
      } catch (const Error&) {
        return needle == std::string("");
      }
    };
    if (!expect_failure(R"({"led":{"optical_power_w":"three"}})", "led.optical_power_w")) {
      return {false, "wrong-type field not reported by path"};
    }
    if (!expect_failure(R"({"ledd":{}})", "ledd")) {
      return {false, "unknown field not reported by path"};
    }
    if (!expect_failure(R"({"system":{"integration_samples":64}})", "integration_samples")) {
      return {false, "even sample count accepted"};
    }
    if (!expect_failure(R"({"scenario":{"power_sweep_w":[3.0,1.0]}})", "power_sweep_w")) {
      return {false, "descending power sweep accepted"};
    }
    try {
      parse_config_json(nlohmann::json::parse(R"({"led":{"half_power_semiangle_deg":120}})"));
      return {false, "out-of-range semiangle accepted"};
    } catch (const Error&) {
    }
    return {true, "five malformed configurations rejected with field context"};
  });

  run_check(results, "config.round-trip", []() -> CheckOutcome {
    const char* text = R"({
      "room": {"width_m": 6.0, "depth_m": 4.0, "height_m": 3.2},
      "led": {"position_m": [3.0, 2.0, 3.2], "half_power_semiangle_deg": 45.0,
              "optical_power_w": 5.0},
      "pd": {"fov_deg": 60.0, "refractive_index": 1.4},
      "irs": {"wall": "x_max", "count_x": 5, "count_y": 3, "spacing_x_m": 0.25,
              "spacing_y_m": 0.25, "reflectivity": 0.7, "center_m": [6.0, 2.0, 1.6]},
      "receiver_height_m": 0.9,
      "zone_radius_m": 1.2,
      "users": {"bob_m": [1.0, 2.0], "eve_m": [4.0, 3.0, 0.9]},
      "system": {"integration_samples": 2049, "gap_db": 3.0},
      "ga": {"population_size": 12, "generations": 4, "mutation_prob": 0.05,
             "elite_count": 1, "rng_seed": 99},
      "scenario": {"placement": "eve_inner_bob_outer", "trials": 5,
                   "power_sweep_w": [1.5, 2.5], "optimizer_mode": "es", "master_seed": 99}
    })";
    const Config first = parse_config_json(nlohmann::json::parse(text));
    const std::string once = serialize_config(first);
    const Config second = parse_config_json(nlohmann::json::parse(once));
    if (serialize_config(second) != once) return {false, "serialization is not a fixed point"};
    if (second.scene.panel.wall != Wall::XMax || second.scene.bob.position.z != 0.9 ||
        !second.ga.mutation_prob || *second.ga.mutation_prob != 0.05 ||
        second.scenario.optimizer_mode != OptimizerMode::Es) {
      return {false, "a field changed across the round trip"};
    }
    return {true, "parse, serialize, reparse is the identity"};
  });

  run_check(results, "config.manifest-reparse", []() -> CheckOutcome {
    Config c;
    c.scenario.master_seed = 1234;
    c.scene.validate();
    const std::string manifest = make_run_manifest(c, "experiment", "2026-01-01T00:00:00Z");
    const nlohmann::json mj = nlohmann::json::parse(manifest);
    if (mj.at("tool") != kToolName || mj.at("subcommand") != "experiment" ||
        mj.at("master_seed") != 1234) {
      return {false, "manifest identity fields wrong"};
    }
    const Config replayed = parse_config_json(mj, "manifest");
    if (serialize_config(replayed) != serialize_config(c)) {
      return {false, "manifest does not reproduce its configuration"};
    }
    return {true, "manifest reparses to the identical configuration"};
  });

  return results;
}

}  // namespace vlcsec
