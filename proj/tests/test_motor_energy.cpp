#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "lcuav/motor_energy.hpp"

using namespace lcuav;

namespace {

// Reference values from tests/oracles/derive_values.py.
constexpr double kC1 = 2.9701785568588335;
constexpr double kIdleCurrent = 3.8536856104635944;
constexpr double kCurrentAt911 = 23.227652781452356;
constexpr double kHoverSpeed = 911.8575220129723;
constexpr double kHoverVoltage = 14.110302779760739;
constexpr double kMaxForce = 17.2157992;
constexpr double kHoverEnergy100 = 131099.360619521;
constexpr double kDisplacement1s = 1746.7440907800096;
constexpr double kOrientation1s = 892.6637372989783;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(MotorEnergy, ConstantsMatchHandEvaluation) {
  const QuadrotorParams p;
  const auto c = derive_constants(p);
  EXPECT_NEAR(c.c1, kC1, 1e-12 * kC1);
  EXPECT_NEAR(c.c4 / c.c2, p.kappa_0 / p.T_f, 1e-12 * p.kappa_0 / p.T_f);
  EXPECT_NEAR(c.c5, p.kappa_0 * p.kappa_0 / (p.T_f * p.T_f) * c.c1, 1e-12 * c.c5);
  EXPECT_NEAR(c.c6, 2.0 * p.J / p.T_f * c.c1, 1e-12 * c.c6);
  EXPECT_NEAR(c.c7, p.J * p.J / (p.T_f * p.T_f) * c.c1, 1e-12 * c.c7);
  EXPECT_NEAR(c.c8, p.J / p.T_f * c.c2, 1e-12 * c.c8);
  EXPECT_NEAR(c.c9, p.kappa_T / p.T_f * c.c6, 1e-12 * c.c9);
  for (double ci : {c.c1, c.c2, c.c3, c.c4, c.c5, c.c6, c.c7, c.c8, c.c9}) EXPECT_GT(ci, 0.0);
}

TEST(MotorEnergy, DoublingResistanceDoublesC1) {
  QuadrotorParams p;
  const double base = derive_constants(p).c1;
  p.R *= 2.0;
  EXPECT_NEAR(derive_constants(p).c1, 2.0 * base, 1e-12 * base);
}

TEST(MotorEnergy, CurrentTerms) {
  const QuadrotorParams p;
  EXPECT_NEAR(motor_current(0.0, 0.0, p), kIdleCurrent, 1e-12);
  EXPECT_NEAR(motor_current(911.86, 0.0, p), kCurrentAt911, 1e-10);
  EXPECT_NEAR(motor_current(0.0, 1000.0, p) - motor_current(0.0, 0.0, p), p.J * 1000.0 / p.kappa_T, 1e-12);
  EXPECT_DOUBLE_EQ(motor_voltage(0.0, 0.0, p), 0.0);
}

TEST(MotorEnergy, HoverSpeedAndVoltage) {
  const QuadrotorParams p;
  const auto g = ExternalForce::gravity_only(p);
  EXPECT_NEAR(g.magnitude(), 12.74, 1e-12);
  const double v = hover_rotor_speed(g, p);
  EXPECT_NEAR(v, kHoverSpeed, 1e-9);
  const double e = motor_voltage(motor_current(v, 0.0, p), v, p);
  EXPECT_NEAR(e, kHoverVoltage, 1e-9);
  EXPECT_GE(e, 14.0);
  EXPECT_LE(e, 14.5);
  EXPECT_DOUBLE_EQ(hover_rotor_speed({0, 0, 0}, p), 0.0);
}

TEST(MotorEnergy, HoverBoundary) {
  const QuadrotorParams p;
  EXPECT_NEAR(max_tolerable_force(p), kMaxForce, 1e-9);
  EXPECT_DOUBLE_EQ(hover_rotor_speed({0, 0, -max_tolerable_force(p)}, p), p.v_max);
  EXPECT_THROW(hover_rotor_speed({0, 0, -1.0001 * max_tolerable_force(p)}, p), HoverInfeasible);
}

TEST(MotorEnergy, HoverEnergy) {
  const QuadrotorParams p;
  const auto c = derive_constants(p);
  const auto g = ExternalForce::gravity_only(p);
  EXPECT_DOUBLE_EQ(hover_energy(0.0, g, c, p), 0.0);
  EXPECT_LT(rel(hover_energy(100.0, g, c, p), kHoverEnergy100), 1e-10);
  // Cross-check against 4 e_r i_r over 100 s.
  const double v = hover_rotor_speed(g, p);
  const double i = motor_current(v, 0.0, p);
  EXPECT_LT(rel(hover_energy(100.0, g, c, p), 400.0 * motor_voltage(i, v, p) * i), 1e-10);
}

TEST(MotorEnergy, HoverEnergyDependsOnMagnitudeOnly) {
  const QuadrotorParams p;
  const auto c = derive_constants(p);
  EXPECT_DOUBLE_EQ(hover_energy(100.0, ExternalForce::from_wind({5, 0, 0}, p), c, p),
                   hover_energy(100.0, ExternalForce::from_wind({-5, 0, 0}, p), c, p));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  for (int k = 0; k < 50; ++k) {
    const double mag = 15.0;
    const double th = angle(rng), ph = angle(rng) / 2.0;
    const ExternalForce f{mag * std::sin(ph) * std::cos(th), mag * std::sin(ph) * std::sin(th), mag * std::cos(ph)};
    EXPECT_NEAR(hover_energy(10.0, f, c, p), hover_energy(10.0, {0, 0, -mag}, c, p), 1e-9);
  }
}

TEST(MotorEnergy, HoverEnergyIncreasesWithForce) {
  const QuadrotorParams p;
  const auto c = derive_constants(p);
  double prev = -1.0;
  for (double f = 0.0; f <= max_tolerable_force(p); f += 0.25) {
    const double e = hover_energy(1.0, {0, 0, -f}, c, p);
    EXPECT_GT(e, prev);
    prev = e;
  }
}

TEST(MotorEnergy, StageEnergies) {
  const QuadrotorParams p;
  const auto c = derive_constants(p);
  EXPECT_DOUBLE_EQ(stage_energy(StageKind::displacement, 0.0, p.v_max, c), 0.0);
  EXPECT_LT(rel(stage_energy(StageKind::displacement, 1.0, p.v_max, c), kDisplacement1s), 1e-12);
  EXPECT_LT(rel(stage_energy(StageKind::orientation, 1.0, p.v_max, c), kOrientation1s), 1e-12);
  EXPECT_LT(stage_energy(StageKind::orientation, 3.0, p.v_max, c), stage_energy(StageKind::displacement, 3.0, p.v_max, c));
  // Linear in duration.
  EXPECT_NEAR(stage_energy(StageKind::orientation, 7.5, p.v_max, c),
              7.5 * stage_energy(StageKind::orientation, 1.0, p.v_max, c), 1e-9);
}

TEST(MotorEnergy, TravelEnergyAdditive) {
  const QuadrotorParams p;
  const auto c = derive_constants(p);
  StagePlan plan;
  for (std::size_t k = 0; k < 5; ++k) {
    plan.stages[k] = {StagePlan::kind_of(k), 0.0, p.v_max};
  }
  EXPECT_DOUBLE_EQ(travel_energy(plan, c), 0.0);
  plan.stages[1].duration = 12.0;
  EXPECT_DOUBLE_EQ(travel_energy(plan, c), stage_energy(StageKind::displacement, 12.0, p.v_max, c));
}

TEST(MotorEnergy, TravelEnergyMatchesQuadrature) {
  const QuadrotorParams p;
  const auto c = derive_constants(p);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-500.0, 500.0);
  const KinematicsConfig kin{1.0, 0.02};
  for (int k = 0; k < 40; ++k) {
    const Vec3 a{coord(rng), coord(rng), 50.0 + coord(rng) / 10.0};
    const Vec3 b{coord(rng), coord(rng), 50.0 + coord(rng) / 10.0};
    const auto plan = plan_stages(a, b, kin, p.v_max);
    ASSERT_TRUE(plan.valid(p.v_max));
    const double closed = travel_energy(plan, c);
    const double quad = integrate_energy(RotorProfile::from_stage_plan(plan), 0.0, plan.duration(), c);
    EXPECT_LT(rel(quad, closed), 1e-6);
  }
}

TEST(MotorEnergy, IntegratorConstantAndZeroProfiles) {
  const QuadrotorParams p;
  const auto c = derive_constants(p);
  ProfileSegment seg;
  seg.t_begin = 2.0;
  seg.t_end = 5.0;
  seg.v_begin.fill(700.0);
  seg.v_end.fill(700.0);
  EXPECT_LT(rel(integrate_energy(RotorProfile({seg}), 2.0, 5.0, c), 3.0 * uniform_rotor_power(700.0, c)), 1e-9);
  seg.v_begin.fill(0.0);
  seg.v_end.fill(0.0);
  EXPECT_LT(rel(integrate_energy(RotorProfile({seg}), 2.0, 5.0, c), 3.0 * 4.0 * c.c1), 1e-9);
  EXPECT_THROW(integrate_energy(RotorProfile({seg}), 0.0, 5.0, c), InvalidArgument);
}

TEST(MotorEnergy, RampAgreesWithGaussKronrod) {
  const QuadrotorParams p;
  const auto c = derive_constants(p);
  ProfileSegment seg;
  seg.t_begin = 0.0;
  seg.t_end = 1.0;
  seg.v_begin.fill(0.0);
  seg.v_end.fill(p.v_max);
  const double ours = integrate_energy(RotorProfile({seg}), 0.0, 1.0, c);
  const double gk = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double t) { return power_integrand(seg, t, c); }, 0.0, 1.0, 10, 1e-13);
  EXPECT_LT(rel(ours, gk), 1e-6);
}

TEST(MotorEnergy, StagePlanGeometry) {
  const KinematicsConfig kin{1.0, 10.0 / 1060.0};
  const auto flat = plan_stages({0, 0, 50}, {2000, 0, 50}, kin, 1060.0);
  EXPECT_NEAR(flat.stages[3].duration, 200.0, 1e-9);
  EXPECT_DOUBLE_EQ(flat.stages[0].duration, 0.0);
  EXPECT_DOUBLE_EQ(flat.stages[2].duration, 1.0);
  EXPECT_DOUBLE_EQ(flat.stages[4].duration, 1.0);
  const auto none = plan_stages({1, 2, 3}, {1, 2, 3}, kin, 1060.0);
  EXPECT_DOUBLE_EQ(none.duration(), 0.0);
  const auto climb = plan_stages({0, 0, 50}, {0, 0, 80}, kin, 1060.0);
  EXPECT_NEAR(climb.stages[1].duration, 3.0, 1e-12);
  EXPECT_EQ(orientation_stage_count({0, 0, 50}, {0, 0, 80}), 2);
  EXPECT_EQ(orientation_stage_count({0, 0, 50}, {3, 4, 80}), 3);
}

TEST(MotorEnergy, ValidationNamesFields) {
  QuadrotorParams p;
  p.R = -1.0;
  p.mass = 0.0;
  const auto v = p.violations();
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NE(v[0].find("quad.R"), std::string::npos);
  EXPECT_NE(v[1].find("quad.mass"), std::string::npos);
}
