#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vlcsec/error.hpp"
#include "vlcsec/rng.hpp"
#include "vlcsec/vec3.hpp"

namespace vlcsec {

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Rectangular room with one corner at the origin: x in [0, width],
/// y in [0, depth], z in [0, height].
struct Room {
  double width = 5.0;
  double depth = 5.0;
  double height = 3.0;

  bool contains(const Vec3& p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= depth && p.z >= 0.0 &&
           p.z <= height;
  }

  void validate() const {
    if (!(width > 0.0) || !(depth > 0.0) || !(height > 0.0)) {
      throw ConfigError("room: all dimensions must be strictly positive");
    }
  }
};

/// The LED transmitter.
struct Emitter {
  Vec3 position{2.5, 2.5, 3.0};
  Vec3 normal{0.0, 0.0, -1.0};
  double half_power_semiangle_deg = 60.0;
  double optical_power_w = 3.0;

  void validate() const {
    if (!(half_power_semiangle_deg > 0.0) || !(half_power_semiangle_deg < 90.0)) {
      throw ConfigError("led.half_power_semiangle_deg: must lie strictly between 0 and 90");
    }
    if (!(optical_power_w >= 0.0)) {
      throw ConfigError("led.optical_power_w: must be nonnegative");
    }
    if (std::abs(normal.norm() - 1.0) > 1e-12) {
      throw ConfigError("led.normal: must be a unit vector (tolerance 1e-12)");
    }
  }
};

/// Receiver optics and electro-optical conversion parameters.
struct Photodetector {
  double area_m2 = 1e-4;
  double responsivity_a_per_w = 0.6;
  double fov_deg = 90.0;
  double refractive_index = 1.5;
  double filter_gain = 1.0;
  Vec3 normal{0.0, 0.0, 1.0};

  void validate(const std::string& prefix = "pd") const {
    if (!(area_m2 > 0.0)) throw ConfigError(prefix + ".area_m2: must be positive");
    if (!(responsivity_a_per_w > 0.0)) {
      throw ConfigError(prefix + ".responsivity_a_per_w: must be positive");
    }
    if (!(fov_deg > 0.0) || !(fov_deg <= 90.0)) {
      throw ConfigError(prefix + ".fov_deg: must lie in (0, 90]");
    }
    if (!(refractive_index >= 1.0)) {
      throw ConfigError(prefix + ".refractive_index: must be at least 1");
    }
    if (!(filter_gain > 0.0)) throw ConfigError(prefix + ".filter_gain: must be positive");
    if (std::abs(normal.norm() - 1.0) > 1e-12) {
      throw ConfigError(prefix + ".normal: must be a unit vector (tolerance 1e-12)");
    }
  }
};

enum class UserRole { Bob, Eve };

inline const char* to_string(UserRole role) { return role == UserRole::Bob ? "bob" : "eve"; }

/// A receiver terminal: the legitimate user (Bob) or the eavesdropper (Eve).
struct UserTerminal {
  UserRole role = UserRole::Bob;
  Vec3 position{3.5, 2.5, 0.85};
  Photodetector pd{};
};

/// The four vertical walls of the room, named by the plane they lie in.
enum class Wall { XMin, XMax, YMin, YMax };

inline Vec3 wall_normal(Wall wall) {
  switch (wall) {
    case Wall::XMin: return {1.0, 0.0, 0.0};
    case Wall::XMax: return {-1.0, 0.0, 0.0};
    case Wall::YMin: return {0.0, 1.0, 0.0};
    default: return {0.0, -1.0, 0.0};
  }
}

/// Grid of passive reflecting elements mounted on one wall.
///
/// Elements are indexed row-major: index n = row * count_x + col, rows from
/// the lowest z level upward, columns in ascending order along the wall's
/// horizontal axis (x for the y-walls, y for the x-walls).
struct IrsPanel {
  Wall wall = Wall::YMin;
  int count_x = 12;
  int count_y = 12;
  double spacing_x_m = 0.3;
  double spacing_y_m = 0.3;
  double reflectivity = 1.0;
  Vec3 center{2.5, 0.0, 1.5};

  int element_count() const { return count_x * count_y; }

  Vec3 normal() const { return wall_normal(wall); }

  void validate() const {
    if (count_x < 1 || count_y < 1) {
      throw ConfigError("irs.count_x/count_y: element counts must be at least 1");
    }
    if (!(spacing_x_m > 0.0) || !(spacing_y_m > 0.0)) {
      throw ConfigError("irs.spacing_x_m/spacing_y_m: spacings must be positive");
    }
    if (!(reflectivity >= 0.0) || !(reflectivity <= 1.0)) {
      throw ConfigError("irs.reflectivity: must lie in [0, 1]");
    }
  }
};

enum class ZoneLabel { Inner, Outer };

/// Floor region relative to the LED's vertical projection: Inner is the disc
/// of horizontal radius radius_threshold, Outer is its complement. The
/// boundary itself classifies as Outer (strict inequality for Inner).
struct Zone {
  ZoneLabel label = ZoneLabel::Inner;
  double radius_threshold = 1.0;

  void validate() const {
    if (!(radius_threshold > 0.0)) {
      throw ConfigError("zone.radius_threshold: must be positive");
    }
  }
};

namespace detail {

/// Wall-plane bookkeeping: which coordinate is fixed, its value, and the
/// extent of the horizontal axis the panel columns run along.
struct WallFrame {
  double fixed_value = 0.0;
  double horizontal_extent = 0.0;
  bool fixed_is_x = false;

  static WallFrame of(Wall wall, const Room& room) {
    switch (wall) {
      case Wall::XMin: return {0.0, room.depth, true};
      case Wall::XMax: return {room.width, room.depth, true};
      case Wall::YMin: return {0.0, room.width, false};
      default: return {room.depth, room.width, false};
    }
  }

  double fixed_coord(const Vec3& p) const { return fixed_is_x ? p.x : p.y; }
  double horizontal_coord(const Vec3& p) const { return fixed_is_x ? p.y : p.x; }

  Vec3 point(double horizontal, double z) const {
    return fixed_is_x ? Vec3{fixed_value, horizontal, z} : Vec3{horizontal, fixed_value, z};
  }
};

}  // namespace detail

/// Effective vertical center-to-center spacing after the vertical-fit rule:
/// the configured spacing, shrunk so count_y rows span at most
/// height - 0.2 m (a 0.1 m margin at top and bottom).
inline double effective_vertical_spacing(const IrsPanel& panel, const Room& room) {
  if (panel.count_y < 2) return panel.spacing_y_m;
  return std::min(panel.spacing_y_m, (room.height - 0.2) / (panel.count_y - 1));
}

/// Element center positions for the panel, row-major from the bottom row up.
///
/// The grid is centered on panel.center. Horizontal spacing is used as
/// configured; vertical spacing passes through the vertical-fit rule. Throws
/// GeometryError if the panel center is off the wall plane or if the grid,
/// even after the vertical clamp, leaves the wall rectangle.
inline std::vector<Vec3> element_positions(const IrsPanel& panel, const Room& room) {
  panel.validate();
  room.validate();
  const auto frame = detail::WallFrame::of(panel.wall, room);
  if (std::abs(frame.fixed_coord(panel.center) - frame.fixed_value) > 1e-9) {
    throw GeometryError("irs panel center does not lie on the configured wall plane");
  }

  const double dz = effective_vertical_spacing(panel, room);
  const double dh = panel.spacing_x_m;
  const double center_h = frame.horizontal_coord(panel.center);
  const double half_h = 0.5 * dh * (panel.count_x - 1);
  const double half_z = 0.5 * dz * (panel.count_y - 1);

  const double eps = 1e-9;
  if (center_h - half_h < -eps || center_h + half_h > frame.horizontal_extent + eps ||
      panel.center.z - half_z < -eps || panel.center.z + half_z > room.height + eps) {
    throw GeometryError("irs panel does not fit inside the wall rectangle");
  }

  std::vector<Vec3> positions;
  positions.reserve(static_cast<std::size_t>(panel.element_count()));
  for (int row = 0; row < panel.count_y; ++row) {
    const double z = panel.center.z + (row - 0.5 * (panel.count_y - 1)) * dz;
    for (int col = 0; col < panel.count_x; ++col) {
      const double h = center_h + (col - 0.5 * (panel.count_x - 1)) * dh;
      positions.push_back(frame.point(h, z));
    }
  }
  return positions;
}

/// Cosine of the angle between the direction from -> to and the given unit
/// normal; in [-1, 1]. Throws GeometryError when from == to.
inline double cos_angle(const Vec3& from, const Vec3& to, const Vec3& normal) {
  const Vec3 d = to - from;
  const double len = d.norm();
  if (!(len > 0.0)) {
    throw GeometryError("cos_angle: zero-length direction (from == to)");
  }
  return d.dot(normal) / len;
}

/// Horizontal (x, y) distance between the user and the LED's vertical
/// projection; the quantity zone membership is decided on.
inline double horizontal_distance_to_emitter(const UserTerminal& user, const Emitter& led) {
  const double dx = user.position.x - led.position.x;
  const double dy = user.position.y - led.position.y;
  return std::hypot(dx, dy);
}

inline double horizontal_distance_to_emitter(const Vec3& position, const Emitter& led) {
  return std::hypot(position.x - led.position.x, position.y - led.position.y);
}

/// Uniform sample over the floor rectangle at the receiver height,
/// optionally restricted to a zone by rejection sampling. Inner keeps points
/// with horizontal distance strictly below the threshold, Outer the rest.
inline Vec3 sample_position(Rng& rng, const Room& room, const Emitter& led,
                            double receiver_height, const std::optional<Zone>& zone) {
  constexpr int kMaxAttempts = 1'000'000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vec3 p{rng.uniform(0.0, room.width), rng.uniform(0.0, room.depth), receiver_height};
    if (!zone) return p;
    const double r = horizontal_distance_to_emitter(p, led);
    const bool inner = r < zone->radius_threshold;
    if (inner == (zone->label == ZoneLabel::Inner)) return p;
  }
  throw GeometryError("sample_position: rejection sampling found no point in the zone");
}

/// Full simulation geometry. validate() checks every invariant and caches
/// the element positions; call it once after construction or mutation.
struct Scene {
  Room room{};
  Emitter led{};
  IrsPanel panel{};
  double receiver_height_m = 0.85;
  double zone_radius_m = 1.0;
  UserTerminal bob{UserRole::Bob, {3.5, 2.5, 0.85}, {}};
  UserTerminal eve{UserRole::Eve, {2.0, 2.5, 0.85}, {}};
  std::vector<Vec3> elements;

  void validate() {
    room.validate();
    led.validate();
    if (!room.contains(led.position)) {
      throw ConfigError("led.position_m: must lie inside the room");
    }
    if (!(receiver_height_m > 0.0) || !(receiver_height_m < room.height)) {
      throw ConfigError("receiver_height_m: must lie strictly between 0 and the room height");
    }
    if (!(zone_radius_m > 0.0)) {
      throw ConfigError("zone_radius_m: must be positive");
    }
    validate_user(bob, "users.bob_m");
    validate_user(eve, "users.eve_m");
    elements = element_positions(panel, room);
  }

  Zone zone(ZoneLabel label) const { return Zone{label, zone_radius_m}; }

 private:
  void validate_user(const UserTerminal& user, const std::string& field) const {
    user.pd.validate(field + ".pd");
    if (!room.contains(user.position)) {
      throw ConfigError(field + ": position must lie inside the room");
    }
    if (std::abs(user.position.z - receiver_height_m) > 1e-9) {
      throw ConfigError(field + ": position.z must equal the receiver-plane height");
    }
  }
};

}  // namespace vlcsec
