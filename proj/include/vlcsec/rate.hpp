#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "vlcsec/allocation.hpp"
#include "vlcsec/channel.hpp"
#include "vlcsec/error.hpp"

namespace vlcsec {

/// Modulation and noise constants of the DCO-OFDM link plus the quadrature
/// resolution. The achievable-rate integral runs over [0, 1/(2 symbol_period)].
struct SystemParams {
  double symbol_period_s = 1e-9;
  double noise_psd = 1e-21;
  double gap_db = 2.0;
  double mod_scaling = 3.2;
  double power_allocation = 1.0;
  int integration_samples = 4097;
  double quadrature_rel_tol = 1e-3;

  double gap_linear() const { return std::pow(10.0, gap_db / 10.0); }

  /// Upper integration limit 1/(2 T_s), i.e. 500 MHz at the 1 ns default.
  double band_hz() const { return 1.0 / (2.0 * symbol_period_s); }

  void validate() const {
    if (!(symbol_period_s > 0.0)) throw ConfigError("system.symbol_period_s: must be positive");
    if (!(noise_psd > 0.0)) throw ConfigError("system.noise_psd: must be positive");
    if (!std::isfinite(gap_db)) throw ConfigError("system.gap_db: must be finite");
    if (!(mod_scaling > 0.0)) throw ConfigError("system.mod_scaling: must be positive");
    if (power_allocation != 1.0) {
      throw ConfigError("system.power_allocation: fixed at 1 (uniform power over frequency)");
    }
    if (integration_samples < 65 || integration_samples % 2 == 0) {
      throw ConfigError(
          "system.integration_samples: composite Simpson needs an odd point count of at "
          "least 65");
    }
    if (!(quadrature_rel_tol > 0.0)) {
      throw ConfigError("system.quadrature_rel_tol: must be positive");
    }
  }
};

/// Rates of both users and their difference, the secrecy capacity. secrecy
/// is stored as exactly rate_bob - rate_eve and may be negative.
struct RatePair {
  double rate_bob = 0.0;
  double rate_eve = 0.0;
  double secrecy = 0.0;
};

namespace detail {

/// SNR per squared watt of LED power: gamma(f) = snr_scale * P^2 * |Q(f)|^2.
inline double snr_scale_per_power_squared(const ChannelTaps& taps, const SystemParams& p) {
  return 2.0 * p.symbol_period_s * p.power_allocation * taps.responsivity * taps.responsivity /
         (p.gap_linear() * p.mod_scaling * p.mod_scaling * p.noise_psd);
}

/// Pulls the power-of-two exponent out of a positive normal double, leaving
/// the mantissa in [1, 2). Keeps the running product of the integrand terms
/// from ever overflowing.
inline void extract_exponent(double& mantissa, std::int64_t& exponent) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(mantissa);
  exponent += static_cast<std::int64_t>((bits >> 52) & 0x7FF) - 1023;
  bits = (bits & 0x800FFFFFFFFFFFFFULL) | (0x3FFULL << 52);
  mantissa = std::bit_cast<double>(bits);
}

/// Composite-Simpson weighted sum of log2(1 + snr_scale * |spec[i]|^2) over
/// an odd-length uniform grid. Evaluated as one running product of the
/// weighted terms with the binary exponent carried separately, so the whole
/// sum costs a single log2 call. Each term is >= 1, which keeps the running
/// mantissa normal and positive.
inline double simpson_log2_sum(std::span<const std::complex<double>> spec, double snr_scale) {
  const std::size_t n = spec.size();
  double mantissa = 1.0;
  std::int64_t exponent = 0;
  const auto term = [&](std::size_t i) { return 1.0 + snr_scale * std::norm(spec[i]); };

  mantissa *= term(0) * term(n - 1);
  extract_exponent(mantissa, exponent);
  for (std::size_t i = 1; i + 1 < n; i += 2) {
    const double t4 = term(i);
    const double sq = t4 * t4;
    mantissa *= sq * sq;
    extract_exponent(mantissa, exponent);
    if (i + 2 < n) {
      const double t2 = term(i + 1);
      mantissa *= t2 * t2;
      extract_exponent(mantissa, exponent);
    }
  }
  return static_cast<double>(exponent) + std::log2(mantissa);
}

}  // namespace detail

/// SNR at one frequency for the masked channel.
inline double snr_at(double f_hz, const ChannelTaps& taps, const AllocationVector& mask,
                     double led_power_w, const SystemParams& params) {
  return detail::snr_scale_per_power_squared(taps, params) * led_power_w * led_power_w *
         std::norm(cfr(taps, mask, f_hz));
}

/// SNR at one frequency with every element included.
inline double snr_at(double f_hz, const ChannelTaps& taps, double led_power_w,
                     const SystemParams& params) {
  return detail::snr_scale_per_power_squared(taps, params) * led_power_w * led_power_w *
         std::norm(cfr(taps, f_hz));
}

namespace detail {

inline double integrate_rate(std::span<const std::complex<double>> spec, double snr_scale,
                             double band_hz) {
  const double h = band_hz / static_cast<double>(spec.size() - 1);
  return h / 3.0 * simpson_log2_sum(spec, snr_scale);
}

template <typename SpectrumAt>
double rate_from_pointwise(const ChannelTaps& taps, double led_power_w,
                           const SystemParams& params, SpectrumAt&& q_at) {
  params.validate();
  const std::size_t n = static_cast<std::size_t>(params.integration_samples);
  const double band = params.band_hz();
  std::vector<std::complex<double>> spec(n);
  for (std::size_t i = 0; i < n; ++i) {
    spec[i] = q_at(band * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  const double scale =
      snr_scale_per_power_squared(taps, params) * led_power_w * led_power_w;
  return integrate_rate(spec, scale, band);
}

}  // namespace detail

/// Achievable DCO-OFDM rate in bit/s for the masked channel: the integral of
/// log2(1 + gamma(f)) over [0, 1/(2 T_s)] by composite Simpson quadrature.
inline double achievable_rate(const ChannelTaps& taps, const AllocationVector& mask,
                              double led_power_w, const SystemParams& params) {
  if (mask.size() != taps.element_count()) {
    throw ConfigError("achievable_rate: allocation length does not match the element count");
  }
  return detail::rate_from_pointwise(taps, led_power_w, params,
                                     [&](double f) { return cfr(taps, mask, f); });
}

/// Achievable rate with every element included.
inline double achievable_rate(const ChannelTaps& taps, double led_power_w,
                              const SystemParams& params) {
  return detail::rate_from_pointwise(taps, led_power_w, params,
                                     [&](double f) { return cfr(taps, f); });
}

/// achievable_rate plus a convergence check: recomputes with doubled
/// interval count and throws QuadratureError if the result moves by more
/// than params.quadrature_rel_tol relative. Returns the value at the
/// configured resolution.
inline double achievable_rate_checked(const ChannelTaps& taps, const AllocationVector& mask,
                                      double led_power_w, const SystemParams& params) {
  const double coarse = achievable_rate(taps, mask, led_power_w, params);
  SystemParams fine = params;
  fine.integration_samples = 2 * (params.integration_samples - 1) + 1;
  const double refined = achievable_rate(taps, mask, led_power_w, fine);
  if (std::abs(refined - coarse) > params.quadrature_rel_tol * std::abs(refined)) {
    throw QuadratureError(
        "achievable_rate: quadrature did not converge at integration_samples = " +
        std::to_string(params.integration_samples));
  }
  return coarse;
}

/// Both users' rates and the secrecy capacity for allocation s: Bob sees the
/// elements with bit 1, Eve the complement.
inline RatePair secrecy_capacity(const ChannelTaps& taps_bob, const ChannelTaps& taps_eve,
                                 const AllocationVector& s, double led_power_w,
                                 const SystemParams& params) {
  RatePair r;
  r.rate_bob = achievable_rate(taps_bob, s, led_power_w, params);
  r.rate_eve = achievable_rate(taps_eve, s.complement(), led_power_w, params);
  r.secrecy = r.rate_bob - r.rate_eve;
  return r;
}

/// Precomputed per-element phasor spectra for one user's taps, for repeated
/// masked-rate evaluations at many allocations and powers.
///
/// The LED power enters the SNR only through a scalar factor, so the tables
/// are power-independent: one build serves a whole power sweep. Masked
/// spectra are assembled from whichever of the LoS-only or all-elements
/// baseline needs fewer element rows touched.
class RateEvaluator {
 public:
  RateEvaluator(const ChannelTaps& taps, const SystemParams& params)
      : n_(taps.element_count()),
        npts_(static_cast<std::size_t>(params.integration_samples)),
        band_(params.band_hz()),
        scale_per_w2_(detail::snr_scale_per_power_squared(taps, params)),
        dead_(n_, false),
        los_(npts_),
        full_(npts_),
        rows_(n_ * npts_) {
    params.validate();
    fill_phasor_row(los_.data(), taps.los_gain, taps.los_delay);
    for (std::size_t i = 0; i < npts_; ++i) full_[i] = los_[i];
    for (std::size_t n = 0; n < n_; ++n) {
      std::complex<double>* row = rows_.data() + n * npts_;
      dead_[n] = taps.nlos_gains[n] == 0.0;
      fill_phasor_row(row, taps.nlos_gains[n], taps.nlos_delays[n]);
      if (!dead_[n]) {
        for (std::size_t i = 0; i < npts_; ++i) full_[i] += row[i];
      }
    }
  }

  std::size_t element_count() const { return n_; }
  std::size_t point_count() const { return npts_; }

  const std::vector<std::complex<double>>& los_spectrum() const { return los_; }
  const std::vector<std::complex<double>>& full_spectrum() const { return full_; }

  void add_element(std::vector<std::complex<double>>& spec, std::size_t n) const {
    if (dead_[n]) return;
    const std::complex<double>* row = rows_.data() + n * npts_;
    for (std::size_t i = 0; i < npts_; ++i) spec[i] += row[i];
  }

  void subtract_element(std::vector<std::complex<double>>& spec, std::size_t n) const {
    if (dead_[n]) return;
    const std::complex<double>* row = rows_.data() + n * npts_;
    for (std::size_t i = 0; i < npts_; ++i) spec[i] -= row[i];
  }

  /// Rate for an assembled spectrum at the given LED power.
  double integrate(std::span<const std::complex<double>> spec, double led_power_w) const {
    return detail::integrate_rate(spec, scale_per_w2_ * led_power_w * led_power_w, band_);
  }

  /// Rate for the masked channel.
  double rate(const AllocationVector& mask, double led_power_w) const {
    if (mask.size() != n_) {
      throw ConfigError("RateEvaluator: allocation length does not match the element count");
    }
    std::vector<std::complex<double>> spec;
    if (2 * mask.count() <= n_) {
      spec = los_;
      for (std::size_t n = 0; n < n_; ++n) {
        if (mask.test(n)) add_element(spec, n);
      }
    } else {
      spec = full_;
      for (std::size_t n = 0; n < n_; ++n) {
        if (!mask.test(n)) subtract_element(spec, n);
      }
    }
    return integrate(spec, led_power_w);
  }

  double rate_all_elements(double led_power_w) const { return integrate(full_, led_power_w); }

  double rate_los_only(double led_power_w) const { return integrate(los_, led_power_w); }

 private:
  /// row[i] = gain * exp(-j 2 pi f_i delay) over the uniform frequency grid,
  /// via the rotation recurrence, re-anchored with an exact evaluation every
  /// 256 points to stop drift.
  void fill_phasor_row(std::complex<double>* row, double gain, double delay) {
    const double df = band_ / static_cast<double>(npts_ - 1);
    const std::complex<double> step = std::polar(1.0, -2.0 * std::numbers::pi * df * delay);
    std::complex<double> z{gain, 0.0};
    for (std::size_t i = 0; i < npts_; ++i) {
      if ((i & 255u) == 0u) {
        z = gain * std::polar(1.0, -2.0 * std::numbers::pi *
                                       (df * static_cast<double>(i)) * delay);
      }
      row[i] = z;
      z *= step;
    }
  }

  std::size_t n_;
  std::size_t npts_;
  double band_;
  double scale_per_w2_;
  std::vector<bool> dead_;
  std::vector<std::complex<double>> los_;
  std::vector<std::complex<double>> full_;
  std::vector<std::complex<double>> rows_;
};

}  // namespace vlcsec
