#include <cmath>
#include <optional>

#include <gtest/gtest.h>

#include "vlcsec/geometry.hpp"
#include "vlcsec/rng.hpp"

namespace vlcsec {
namespace {

TEST(Room, DefaultsAndValidation) {
  Room room;
  EXPECT_EQ(room.width, 5.0);
  EXPECT_EQ(room.depth, 5.0);
  EXPECT_EQ(room.height, 3.0);
  EXPECT_NO_THROW(room.validate());
  room.width = 0.0;
  EXPECT_THROW(room.validate(), ConfigError);
}

TEST(Emitter, ValidationRejectsBadFields) {
  Emitter led;
  EXPECT_NO_THROW(led.validate());
  Emitter wide = led;
  wide.half_power_semiangle_deg = 90.0;
  EXPECT_THROW(wide.validate(), ConfigError);
  Emitter tilted = led;
  tilted.half_power_semiangle_deg = 120.0;
  EXPECT_THROW(tilted.validate(), ConfigError);
  Emitter dark = led;
  dark.optical_power_w = -1.0;
  EXPECT_THROW(dark.validate(), ConfigError);
  Emitter skewed = led;
  skewed.normal = {0.0, 0.0, -2.0};
  EXPECT_THROW(skewed.validate(), ConfigError);
}

TEST(Photodetector, ValidationRejectsBadFields) {
  Photodetector pd;
  EXPECT_NO_THROW(pd.validate("pd"));
  Photodetector wide = pd;
  wide.fov_deg = 90.5;
  EXPECT_THROW(wide.validate("pd"), ConfigError);
  Photodetector flat = pd;
  flat.fov_deg = 0.0;
  EXPECT_THROW(flat.validate("pd"), ConfigError);
  Photodetector thin = pd;
  thin.refractive_index = 0.9;
  EXPECT_THROW(thin.validate("pd"), ConfigError);
  Photodetector tiny = pd;
  tiny.area_m2 = 0.0;
  EXPECT_THROW(tiny.validate("pd"), ConfigError);
}

TEST(ElementGrid, SingleElementIsTheCenter) {
  IrsPanel panel;
  panel.count_x = 1;
  panel.count_y = 1;
  const auto positions = element_positions(panel, Room{});
  ASSERT_EQ(positions.size(), 1u);
  EXPECT_EQ(positions[0], (Vec3{2.5, 0.0, 1.5}));
}

TEST(ElementGrid, TwoColumnsSitSymmetricAboutCenter) {
  IrsPanel panel;
  panel.count_x = 2;
  panel.count_y = 1;
  const auto positions = element_positions(panel, Room{});
  ASSERT_EQ(positions.size(), 2u);
  EXPECT_NEAR(positions[0].x, 2.35, 1e-12);
  EXPECT_NEAR(positions[1].x, 2.65, 1e-12);
  EXPECT_EQ(positions[0].z, 1.5);
  EXPECT_EQ(positions[1].z, 1.5);
}

TEST(ElementGrid, TwelveRowsClampToTheWallHeight) {
  IrsPanel panel;
  Room room;
  const double dz = effective_vertical_spacing(panel, room);
  EXPECT_NEAR(dz, 2.8 / 11.0, 1e-12);
  const auto positions = element_positions(panel, room);
  ASSERT_EQ(positions.size(), 144u);
  double z_min = positions[0].z;
  double z_max = positions[0].z;
  for (const Vec3& p : positions) {
    z_min = std::min(z_min, p.z);
    z_max = std::max(z_max, p.z);
    EXPECT_EQ(p.y, 0.0);
  }
  EXPECT_NEAR(z_min, 0.1, 1e-12);
  EXPECT_NEAR(z_max, 2.9, 1e-12);
  EXPECT_NEAR(positions[1].x - positions[0].x, 0.3, 1e-12);
  EXPECT_NEAR(positions[12].z - positions[0].z, dz, 1e-12);
}

TEST(ElementGrid, RepeatedCallsAreIdentical) {
  IrsPanel panel;
  Room room;
  EXPECT_EQ(element_positions(panel, room), element_positions(panel, room));
}

TEST(ElementGrid, RejectsOffPlaneCenterAndOverflow) {
  Room room;
  IrsPanel off;
  off.center = {2.5, 0.1, 1.5};
  EXPECT_THROW(element_positions(off, room), GeometryError);
  IrsPanel wide;
  wide.count_x = 20;
  EXPECT_THROW(element_positions(wide, room), GeometryError);
  IrsPanel shifted;
  shifted.center = {0.5, 0.0, 1.5};
  EXPECT_THROW(element_positions(shifted, room), GeometryError);
}

TEST(ElementGrid, VerticalSpacingKeepsConfiguredPitchWhenItFits) {
  IrsPanel panel;
  panel.count_y = 3;
  EXPECT_EQ(effective_vertical_spacing(panel, Room{}), 0.3);
  panel.count_y = 1;
  EXPECT_EQ(effective_vertical_spacing(panel, Room{}), 0.3);
}

TEST(CosAngle, AlignedOrthogonalAndFrozenCases) {
  const Vec3 led{2.5, 2.5, 3.0};
  const Vec3 down{0.0, 0.0, -1.0};
  EXPECT_NEAR(cos_angle(led, {2.5, 2.5, 0.85}, down), 1.0, 1e-15);
  EXPECT_NEAR(cos_angle(led, {4.0, 2.5, 3.0}, down), 0.0, 1e-15);
  EXPECT_NEAR(cos_angle(led, {2.5, 0.0, 1.5}, down), 0.5144957554275265, 1e-15);
  EXPECT_THROW(cos_angle(led, led, down), GeometryError);
}

TEST(CosAngle, InvariantUnderScalingOfTheDirection) {
  Rng rng(91);
  for (int i = 0; i < 200; ++i) {
    const Vec3 from{rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 3.0)};
    const Vec3 to{rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 3.0)};
    if (distance(from, to) < 1e-6) continue;
    Vec3 n{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    if (n.norm() < 1e-3) continue;
    n = n.normalized();
    const Vec3 farther = from + rng.uniform(0.5, 8.0) * (to - from);
    EXPECT_NEAR(cos_angle(from, to, n), cos_angle(from, farther, n), 1e-10);
  }
}

TEST(HorizontalDistance, FrozenCases) {
  const Emitter led;
  UserTerminal user{UserRole::Bob, {2.5, 2.5, 0.85}, {}};
  EXPECT_EQ(horizontal_distance_to_emitter(user, led), 0.0);
  user.position = {3.5, 2.5, 0.85};
  EXPECT_EQ(horizontal_distance_to_emitter(user, led), 1.0);
  user.position = {1.0, 1.0, 0.85};
  EXPECT_NEAR(horizontal_distance_to_emitter(user, led), 2.1213203435596424, 1e-15);
}

TEST(ZoneSampling, BoundaryDistanceClassifiesOuter) {
  Scene scene;
  scene.validate();
  // A point at exactly the threshold radius satisfies only the Outer
  // predicate used by the sampler.
  const double r = 1.0;
  const Zone inner = scene.zone(ZoneLabel::Inner);
  const Zone outer = scene.zone(ZoneLabel::Outer);
  EXPECT_FALSE(r < inner.radius_threshold);
  EXPECT_TRUE(r >= outer.radius_threshold);
}

TEST(ZoneSampling, SamplesRespectTheirZoneAndPartitionTheFloor) {
  Scene scene;
  scene.validate();
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const Vec3 a =
        sample_position(rng, scene.room, scene.led, scene.receiver_height_m,
                        scene.zone(ZoneLabel::Inner));
    const double ra = horizontal_distance_to_emitter(a, scene.led);
    EXPECT_LT(ra, 1.0);
    const Vec3 b =
        sample_position(rng, scene.room, scene.led, scene.receiver_height_m,
                        scene.zone(ZoneLabel::Outer));
    const double rb = horizontal_distance_to_emitter(b, scene.led);
    EXPECT_GE(rb, 1.0);
    EXPECT_FALSE(ra < 1.0 && ra >= 1.0);
    EXPECT_TRUE(scene.room.contains(a));
    EXPECT_TRUE(scene.room.contains(b));
  }
}

TEST(ZoneSampling, UnconstrainedMeanApproachesTheFloorCenter) {
  Scene scene;
  scene.validate();
  Rng rng(1234);
  double sx = 0.0;
  double sy = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vec3 p =
        sample_position(rng, scene.room, scene.led, scene.receiver_height_m, std::nullopt);
    sx += p.x;
    sy += p.y;
  }
  EXPECT_NEAR(sx / n, 2.5, 0.025);
  EXPECT_NEAR(sy / n, 2.5, 0.025);
}

TEST(SceneValidation, RejectsUsersOffTheReceiverPlane) {
  Scene scene;
  scene.bob.position = {3.5, 2.5, 1.2};
  EXPECT_THROW(scene.validate(), ConfigError);
  scene.bob.position = {3.5, 2.5, 0.85};
  scene.eve.position = {6.0, 2.5, 0.85};
  EXPECT_THROW(scene.validate(), ConfigError);
  scene.eve.position = {2.0, 2.5, 0.85};
  EXPECT_NO_THROW(scene.validate());
  EXPECT_EQ(scene.elements.size(), 144u);
}

TEST(SceneValidation, UsersMayShareAPosition) {
  Scene scene;
  scene.eve.position = scene.bob.position;
  EXPECT_NO_THROW(scene.validate());
}

TEST(Vec3Ops, BasicAlgebra) {
  const Vec3 a{1.0, 2.0, 3.0};
  const Vec3 b{4.0, -2.0, 0.5};
  EXPECT_EQ(a + b, (Vec3{5.0, 0.0, 3.5}));
  EXPECT_EQ(a - b, (Vec3{-3.0, 4.0, 2.5}));
  EXPECT_EQ(2.0 * a, (Vec3{2.0, 4.0, 6.0}));
  EXPECT_EQ(a.dot(b), 1.5);
  EXPECT_NEAR((Vec3{3.0, 4.0, 0.0}).norm(), 5.0, 1e-15);
  EXPECT_NEAR((Vec3{3.0, 4.0, 0.0}).normalized().norm(), 1e0, 1e-15);
  EXPECT_NEAR(distance(a, b), std::sqrt(9.0 + 16.0 + 6.25), 1e-15);
}

}  // namespace
}  // namespace vlcsec
