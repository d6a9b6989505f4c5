// Copyright 2026 The mfc-pathtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mfc/vehicle.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "gtest/gtest.h"

namespace mfc {
namespace {

const VehicleParams kParams;

double max_diff(const VehicleState& a, const VehicleState& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.psi - b.psi),
                   std::abs(a.vx - b.vx), std::abs(a.vy - b.vy),
                   std::abs(a.psi_dot - b.psi_dot)});
}

TEST(VehicleParamsTest, DefaultsAreValid) {
  EXPECT_TRUE(kParams.violations().empty());
  VehicleParams bad;
  bad.m = 0;
  bad.f2 = -1;
  bad.limits.delta_max = 0;
  EXPECT_EQ(bad.violations().size(), 3u);
}

TEST(DerivativesTest, StraightRunningForceBalance) {
  VehicleState s;
  s.vx = 20.0;
  const double t_w = kParams.rw * (kParams.f0 + kParams.f2 * 400.0);
  EXPECT_DOUBLE_EQ(equilibrium_torque(20.0, kParams), t_w);
  const StateRate r = derivatives(s, {t_w, 0.0}, kParams);
  EXPECT_NEAR(r.vx, 0.0, 1e-12);
  EXPECT_EQ(r.vy, 0.0);
  EXPECT_EQ(r.psi_dot, 0.0);
  EXPECT_DOUBLE_EQ(r.x, 20.0);
  EXPECT_EQ(r.y, 0.0);
}

TEST(DerivativesTest, LateralVelocityIsRestored) {
  VehicleState s;
  s.vx = 20.0;
  s.vy = 1.0;
  const StateRate r = derivatives(s, {0.0, 0.0}, kParams);
  const double fyf = -kParams.cf / 20.0;
  const double fyr = -kParams.cr / 20.0;
  EXPECT_NEAR(r.vy, (fyf + fyr) / kParams.m, 1e-12);
  EXPECT_NEAR(r.psi_dot, (kParams.lf * fyf - kParams.lr * fyr) / kParams.iz, 1e-12);
  EXPECT_LT(r.vy, 0.0);
}

TEST(DerivativesTest, LowSpeedFreezesLateralDynamics) {
  VehicleState s;
  s.vx = 0.2;
  s.vy = 0.1;
  s.psi_dot = 0.3;
  const StateRate r = derivatives(s, {100.0, 0.3}, kParams);
  EXPECT_EQ(r.vy, 0.0);
  EXPECT_EQ(r.psi_dot, 0.0);
}

TEST(DerivativesTest, RejectsNonFiniteState) {
  VehicleState s;
  s.vx = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(derivatives(s, {}, kParams), PlantError);
  EXPECT_THROW(derivatives(VehicleState{0, 0, 0, 10, 0, 0}, {INFINITY, 0}, kParams), PlantError);
}

// Closed-form steady state of the linear single-track model:
// r = vx * delta / (L + Kus * vx^2), Kus = m (lr cr - lf cf) / (cf cr L).
TEST(DerivativesTest, SteadyStateYawRate) {
  const double l = kParams.lf + kParams.lr;
  const double kus = kParams.m * (kParams.lr * kParams.cr - kParams.lf * kParams.cf) /
                     (kParams.cf * kParams.cr * l);
  EXPECT_NEAR(kParams.understeer_gradient(), kus, 1e-15);
  for (double vx : {10.0, 20.0, 30.0}) {
    const double delta = 0.01;
    VehicleState s;
    s.vx = vx;
    for (int k = 0; k < 20000; ++k) {
      s = rk4_step(s, {0.0, delta}, kParams, 1e-3);
      s.vx = vx;  // speed held, only the lateral modes evolve
    }
    const double expected = vx * delta / (l + kus * vx * vx);
    EXPECT_NEAR(s.psi_dot, expected, 1e-3 * expected) << vx;
  }
}

TEST(Rk4Test, ZeroFieldIsFixedPoint) {
  VehicleParams p;
  p.f0 = 0.0;
  const VehicleState s{3.0, -2.0, 0.4, 0.0, 0.0, 0.0};
  const VehicleState n = rk4_step(s, {0.0, 0.1}, p, 0.01);
  EXPECT_EQ(max_diff(s, n), 0.0);
}

TEST(Rk4Test, ConstantVelocityIntegration) {
  VehicleState s;
  s.vx = 20.0;
  const ActuationInput in{equilibrium_torque(20.0, kParams), 0.0};
  for (int k = 0; k < 1000; ++k) s = rk4_step(s, in, kParams, 1e-3);
  EXPECT_NEAR(s.x, 20.0, 1e-9);
  EXPECT_NEAR(s.y, 0.0, 1e-12);
}

VehicleState integrate_sine_steer(double h, double t_end, VehicleState s) {
  const int n = static_cast<int>(std::lround(t_end / h));
  const double t_w = equilibrium_torque(20.0, kParams);
  for (int k = 0; k < n; ++k) {
    const double t0 = k * h;
    s = rk4_step(s, [&](double tau) { return ActuationInput{t_w, 0.05 * std::sin(2.0 * (t0 + tau))}; },
                 kParams, h);
  }
  return s;
}

TEST(Rk4Test, FourthOrderRichardsonRatio) {
  VehicleState s0;
  s0.vx = 20.0;
  const double h = 0.02;
  const VehicleState ref = integrate_sine_steer(h / 8, 2.0, s0);
  const double e1 = max_diff(integrate_sine_steer(h, 2.0, s0), ref);
  const double e2 = max_diff(integrate_sine_steer(h / 2, 2.0, s0), ref);
  const double ratio = e1 / e2;
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(VehiclePropertiesTest, CoastingLosesKineticEnergy) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-1, 1);
  const auto energy = [](const VehicleState& s) {
    return 0.5 * kParams.m * (s.vx * s.vx + s.vy * s.vy) +
           0.5 * kParams.iz * s.psi_dot * s.psi_dot;
  };
  for (int trial = 0; trial < 50; ++trial) {
    VehicleState s{uni(rng) * 100, uni(rng) * 100, uni(rng) * 3, 15 + 10 * uni(rng),
                   0.5 * uni(rng), 0.3 * uni(rng)};
    for (int k = 0; k < 2000; ++k) {
      const VehicleState n = rk4_step(s, {0.0, 0.0}, kParams, 1e-3);
      ASSERT_LE(energy(n), energy(s) + 1e-9);
      s = n;
    }
  }
  VehicleState straight{0, 0, 0, 25, 0, 0};
  for (int k = 0; k < 5000; ++k) {
    const VehicleState n = rk4_step(straight, {0.0, 0.0}, kParams, 1e-3);
    ASSERT_LE(n.vx, straight.vx);
    straight = n;
  }
}

TEST(VehiclePropertiesTest, FrameInvariance) {
  VehicleState s0{5.0, -3.0, 0.3, 18.0, 0.2, 0.05};
  for (double theta : {0.7, -2.1, 3.0}) {
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    VehicleState a = s0;
    VehicleState b = s0;
    b.x = c * s0.x - sn * s0.y;
    b.y = sn * s0.x + c * s0.y;
    b.psi = s0.psi + theta;
    for (int k = 0; k < 2000; ++k) {
      const ActuationInput in{200.0, 0.03 * std::sin(k * 1e-3 * 3.0)};
      a = rk4_step(a, in, kParams, 1e-3);
      b = rk4_step(b, in, kParams, 1e-3);
    }
    VehicleState back = b;
    back.x = c * b.x + sn * b.y;
    back.y = -sn * b.x + c * b.y;
    back.psi = b.psi - theta;
    EXPECT_LT(max_diff(a, back), 1e-9) << theta;
  }
}

TEST(ApplyLimitsTest, Examples) {
  ActuatorLimits lim;
  const double dt = 0.01;
  const ActuationInput prev{100.0, 0.001};
  const ActuationInput inside{120.0, 0.002};
  const ActuationInput out = apply_limits(inside, prev, lim, dt);
  EXPECT_EQ(out.t_w, inside.t_w);
  EXPECT_EQ(out.delta, inside.delta);

  ActuatorLimits permissive = lim;
  permissive.delta_rate = 1e9;
  EXPECT_EQ(apply_limits({0, 2 * lim.delta_max}, {}, permissive, dt).delta, lim.delta_max);
  EXPECT_EQ(apply_limits({0, -2 * lim.delta_max}, {}, permissive, dt).delta, -lim.delta_max);

  ActuatorLimits slew = lim;
  slew.torque_rate = lim.t_max / 10 / dt;
  EXPECT_NEAR(apply_limits({lim.t_max, 0}, {}, slew, dt).t_w, lim.t_max / 10, 1e-9);
}

TEST(ApplyLimitsTest, Idempotent) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(-1, 1);
  const ActuatorLimits lim;
  for (int i = 0; i < 1000; ++i) {
    const ActuationInput prev{uni(rng) * 4000, uni(rng) * 0.5};
    const ActuationInput raw{uni(rng) * 9000, uni(rng) * 1.2};
    const ActuationInput once = apply_limits(raw, prev, lim, 0.01);
    const ActuationInput twice = apply_limits(once, prev, lim, 0.01);
    EXPECT_EQ(once.t_w, twice.t_w);
    EXPECT_EQ(once.delta, twice.delta);
    EXPECT_LE(std::abs(once.t_w), lim.t_max);
    EXPECT_LE(std::abs(once.delta - prev.delta), lim.delta_rate * 0.01 + 1e-15);
  }
}

}  // namespace
}  // namespace mfc
