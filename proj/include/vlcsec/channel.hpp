#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "vlcsec/allocation.hpp"
#include "vlcsec/error.hpp"
#include "vlcsec/geometry.hpp"

namespace vlcsec {

inline constexpr double speed_of_light_m_per_s = 299'792'458.0;

/// Lambertian order m of an LED with the given half-power semiangle:
/// m = -1 / log2(cos(semiangle)). 60 degrees gives exactly 1.
inline double lambertian_order(double half_power_semiangle_deg) {
  if (!(half_power_semiangle_deg > 0.0) || !(half_power_semiangle_deg < 90.0)) {
    throw DomainError("lambertian_order: semiangle must lie strictly between 0 and 90 degrees");
  }
  return -1.0 / std::log2(std::cos(deg_to_rad(half_power_semiangle_deg)));
}

/// Optical concentrator gain: refractive_index^2 / sin^2(fov) for incidence
/// angles within the field of view, 0 outside it.
inline double concentrator_gain(double incidence_deg, double fov_deg, double refractive_index) {
  if (incidence_deg < 0.0 || incidence_deg > fov_deg) return 0.0;
  const double s = std::sin(deg_to_rad(fov_deg));
  return refractive_index * refractive_index / (s * s);
}

namespace detail {

/// Shared tail of the Lambertian gain expressions: clamps the two cosines at
/// zero (a source behind a normal plane contributes nothing), applies the
/// receiver FoV cutoff, and assembles
///   (m+1) A / (2 pi d^2) * cos^m(phi) * cos(psi) * G_f * G_c(psi).
inline double lambertian_gain(double m, double path_length, double cos_phi, double cos_psi,
                              const Photodetector& pd) {
  cos_phi = std::max(0.0, cos_phi);
  cos_psi = std::max(0.0, std::min(1.0, cos_psi));
  const double incidence_deg = rad_to_deg(std::acos(cos_psi));
  const double gc = concentrator_gain(incidence_deg, pd.fov_deg, pd.refractive_index);
  if (gc == 0.0) return 0.0;
  return (m + 1.0) * pd.area_m2 / (2.0 * std::numbers::pi * path_length * path_length) *
         std::pow(cos_phi, m) * cos_psi * pd.filter_gain * gc;
}

}  // namespace detail

/// Line-of-sight Lambertian channel gain from the LED to the user's PD.
inline double los_gain(const Emitter& led, const UserTerminal& user) {
  const double d = distance(led.position, user.position);
  if (!(d > 0.0)) throw GeometryError("los_gain: LED and user positions coincide");
  const double m = lambertian_order(led.half_power_semiangle_deg);
  const double cos_phi = cos_angle(led.position, user.position, led.normal);
  const double cos_psi = cos_angle(user.position, led.position, user.pd.normal);
  return detail::lambertian_gain(m, d, cos_phi, cos_psi, user.pd);
}

/// Reflected-path gain via one IRS element, treated as ideally steered
/// toward the user: specular reflection with the LED-side irradiance angle
/// and the PD-side incidence angle computed purely from positions, and the
/// two path legs summed inside the inverse square.
///
/// The element normal enters only a front-side test (an endpoint strictly
/// behind the wall plane cannot be served); for points inside the room it
/// never triggers.
inline double nlos_gain(const Emitter& led, const Vec3& element_position,
                        const Vec3& element_normal, const UserTerminal& user,
                        double reflectivity) {
  const double d1 = distance(led.position, element_position);
  const double d2 = distance(element_position, user.position);
  if (!(d1 > 0.0) || !(d2 > 0.0)) {
    throw GeometryError("nlos_gain: element coincides with the LED or the user");
  }
  if (cos_angle(element_position, led.position, element_normal) <= 0.0 ||
      cos_angle(element_position, user.position, element_normal) <= 0.0) {
    return 0.0;
  }
  const double m = lambertian_order(led.half_power_semiangle_deg);
  const double cos_phi = cos_angle(led.position, element_position, led.normal);
  const double cos_psi = cos_angle(user.position, element_position, user.pd.normal);
  return reflectivity * detail::lambertian_gain(m, d1 + d2, cos_phi, cos_psi, user.pd);
}

/// Propagation delays: LoS distance over c, and per element the two-leg path
/// sum over c, in element index order.
inline std::pair<double, std::vector<double>> path_delays(const Emitter& led,
                                                          const std::vector<Vec3>& elements,
                                                          const UserTerminal& user) {
  const double los = distance(led.position, user.position) / speed_of_light_m_per_s;
  std::vector<double> nlos;
  nlos.reserve(elements.size());
  for (const Vec3& e : elements) {
    nlos.push_back((distance(led.position, e) + distance(e, user.position)) /
                   speed_of_light_m_per_s);
  }
  return {los, nlos};
}

/// Delay-resolved channel for one user: the CIR is
/// q(t) = los_gain * delta(t - los_delay) + sum_n nlos_gains[n] * delta(t - nlos_delays[n]).
/// The responsivity of the user's PD rides along so rate computations are
/// self-contained.
struct ChannelTaps {
  double los_gain = 0.0;
  double los_delay = 0.0;
  std::vector<double> nlos_gains;
  std::vector<double> nlos_delays;
  double responsivity = 0.6;

  std::size_t element_count() const { return nlos_gains.size(); }
};

/// Assembles the per-user taps from a validated scene.
inline ChannelTaps build_channel_taps(const Scene& scene, const UserTerminal& user) {
  ChannelTaps taps;
  taps.los_gain = los_gain(scene.led, user);
  taps.responsivity = user.pd.responsivity_a_per_w;
  auto [los_delay, nlos_delays] = path_delays(scene.led, scene.elements, user);
  taps.los_delay = los_delay;
  taps.nlos_delays = std::move(nlos_delays);
  taps.nlos_gains.reserve(scene.elements.size());
  const Vec3 n = scene.panel.normal();
  for (const Vec3& e : scene.elements) {
    taps.nlos_gains.push_back(nlos_gain(scene.led, e, n, user, scene.panel.reflectivity));
  }
  for (double tau : taps.nlos_delays) {
    if (tau < taps.los_delay) {
      throw GeometryError("build_channel_taps: reflected path shorter than line of sight");
    }
  }
  return taps;
}

/// Channel frequency response with every element included (the full CIR
/// Fourier transform).
inline std::complex<double> cfr(const ChannelTaps& taps, double f_hz) {
  const double w = -2.0 * std::numbers::pi * f_hz;
  std::complex<double> q = taps.los_gain * std::polar(1.0, w * taps.los_delay);
  for (std::size_t n = 0; n < taps.element_count(); ++n) {
    q += taps.nlos_gains[n] * std::polar(1.0, w * taps.nlos_delays[n]);
  }
  return q;
}

/// Channel frequency response restricted to the masked elements: the LoS tap
/// plus the reflected taps with mask bit 1. With Bob's allocation s this is
/// Bob's CFR; with the complement it is Eve's.
inline std::complex<double> cfr(const ChannelTaps& taps, const AllocationVector& mask,
                                double f_hz) {
  if (mask.size() != taps.element_count()) {
    throw ConfigError("cfr: allocation length does not match the element count");
  }
  const double w = -2.0 * std::numbers::pi * f_hz;
  std::complex<double> q = taps.los_gain * std::polar(1.0, w * taps.los_delay);
  for (std::size_t n = 0; n < taps.element_count(); ++n) {
    if (mask.test(n)) q += taps.nlos_gains[n] * std::polar(1.0, w * taps.nlos_delays[n]);
  }
  return q;
}

/// Two-path interference identity: with one LoS tap and one reflected tap at
/// delay offset delta_tau,
/// |Q(f)|^2 = g_los^2 + g_nlos^2 + 2 g_los g_nlos cos(2 pi f delta_tau).
/// Provided as an independent verification target for cfr.
inline double power_gain_two_path(double g_los, double g_nlos, double delta_tau_s, double f_hz) {
  return g_los * g_los + g_nlos * g_nlos +
         2.0 * g_los * g_nlos * std::cos(2.0 * std::numbers::pi * f_hz * delta_tau_s);
}

}  // namespace vlcsec
