#include <cmath>

#include <gtest/gtest.h>

#include "lcuav/laser_harvest.hpp"

using namespace lcuav;

namespace {

constexpr double kNu1km = 0.903119859139342;
constexpr double kP0AtSource = 17.60176;
constexpr double kPsMaxAtSource = 605.5220940050662;
constexpr double kP0At3km = 81.6196642962942;

}  // namespace

TEST(LaserHarvest, Transmission) {
  const DlcParams p;
  EXPECT_DOUBLE_EQ(transmission_efficiency(0.0, p), 1.0);
  EXPECT_NEAR(transmission_efficiency(1000.0, p), kNu1km, 1e-15);
  double prev = 2.0;
  for (double d = 0.0; d <= 5000.0; d += 250.0) {
    const double nu = transmission_efficiency(d, p);
    EXPECT_LT(nu, prev);
    prev = nu;
  }
}

TEST(LaserHarvest, ReceivedPower) {
  const DlcParams p;
  EXPECT_NEAR(received_power(0.0, 100.0, p), kP0AtSource, 1e-12);
  EXPECT_NEAR(received_power(3000.0, 605.0, p), kP0At3km, 1e-10);
  // Below cut-in nothing is harvested.
  EXPECT_DOUBLE_EQ(received_power(0.0, 0.0, p), 0.0);
  EXPECT_DOUBLE_EQ(received_power(0.0, 3.0, p), 0.0);
}

TEST(LaserHarvest, Efficiency) {
  const DlcParams p;
  EXPECT_DOUBLE_EQ(harvesting_efficiency(0.0, 0.0, p), 0.0);
  EXPECT_NEAR(asymptotic_efficiency(0.0, p), p.a1 * p.a2, 1e-15);
  // Approaches a1 a2 nu from below as Ps grows (b1, b2 < 0).
  double prev = 0.0;
  for (double ps : {50.0, 100.0, 1000.0, 1e4, 1e6}) {
    const double z = harvesting_efficiency(500.0, ps, p);
    EXPECT_GT(z, prev);
    EXPECT_LT(z, asymptotic_efficiency(500.0, p));
    prev = z;
  }
  EXPECT_NEAR(prev, asymptotic_efficiency(500.0, p), 1e-5);
}

TEST(LaserHarvest, EfficiencyBandOverOneKilometre) {
  const DlcParams p;
  const KibamParams b;
  for (double d = 0.0; d <= 1000.0; d += 10.0) {
    const double z = harvesting_efficiency(d, source_power_at(d, b, p), p);
    EXPECT_GE(z, 0.16) << d;
    EXPECT_LE(z, 0.19) << d;
  }
}

TEST(LaserHarvest, SourcePowerCap) {
  const DlcParams p;
  const KibamParams b;
  EXPECT_NEAR(max_source_power(0.0, b, p), kPsMaxAtSource, 1e-9);
  for (double d : {0.0, 500.0, 1000.0, 2500.0}) {
    const double ps = max_source_power(d, b, p);
    EXPECT_NEAR(received_power(d, ps, p), b.i_ch_max * b.e_nom, 1e-9);
    EXPECT_NEAR(charge_current_from_power(received_power(d, ps, p), b), b.i_ch_max, 1e-12);
  }
  // Far enough out the hardware ceiling binds.
  EXPECT_DOUBLE_EQ(source_power_at(30000.0, b, p), p.p_s_limit);
  DlcParams fixed = p;
  fixed.power_mode = SourcePowerMode::fixed;
  EXPECT_DOUBLE_EQ(source_power_at(0.0, b, fixed), fixed.p_s);
}

TEST(LaserHarvest, HarvestedEnergy) {
  DlcParams p;
  p.p_s = 400.0;
  const double e = harvested_energy([](double) { return 700.0; }, 0.0, 20.0, p);
  EXPECT_NEAR(e, 20.0 * received_power(700.0, p), 1e-9);
  // Receding receiver: integral of an exponential in closed form.
  const double speed = 25.0;
  const double T = 40.0;
  const double k = p.alpha / 1000.0 * speed;
  const double expected = p.a2 * (p.a1 * p.p_s + p.b1) * (1.0 - std::exp(-k * T)) / k + p.b2 * T;
  EXPECT_NEAR(harvested_energy([&](double t) { return speed * t; }, 0.0, T, p), expected, 1e-6);
  EXPECT_THROW(harvested_energy([](double) { return 0.0; }, 1.0, 0.0, p), InvalidArgument);
}

TEST(LaserHarvest, Validation) {
  DlcParams p;
  EXPECT_TRUE(p.violations().empty());
  p.alpha = -1.0;
  ASSERT_EQ(p.violations().size(), 1u);
  EXPECT_NE(p.violations()[0].find("source.alpha"), std::string::npos);
}
