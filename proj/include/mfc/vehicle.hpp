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

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfc {

/// Raised when the plant state or its derivative stops being finite.
class PlantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActuatorLimits {
  double t_max = 5000.0;        // N.m
  double delta_max = 0.6;       // rad
  double torque_rate = 50000.0; // N.m/s
  double delta_rate = 1.0;      // rad/s
};

/// Single-track vehicle parameters. Defaults describe a mid-size sedan.
struct VehicleParams {
  double m = 1500.0;      // kg
  double iz = 2600.0;     // kg.m^2
  double lf = 1.2;        // m
  double lr = 1.4;        // m
  double cf = 100000.0;   // N/rad, front axle
  double cr = 120000.0;   // N/rad, rear axle
  double rw = 0.31;       // m
  double f0 = 220.725;    // N, rolling resistance (0.015 * m * g)
  double f2 = 0.42;       // N.s^2/m^2
  double g = 9.81;        // m/s^2
  double v_eps = 0.5;     // m/s, below this the lateral dynamics are frozen
  ActuatorLimits limits;

  double wheelbase() const { return lf + lr; }

  /// Understeer gradient m (lr cr - lf cf) / (cf cr L), rad per m/s^2.
  double understeer_gradient() const;

  /// Returns every violated constraint; empty when valid.
  std::vector<std::string> violations() const;
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double psi_dot = 0.0;
};

/// Time derivative of VehicleState; fields mirror the state.
struct StateRate {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double psi_dot = 0.0;
};

struct ActuationInput {
  double t_w = 0.0;    // drive (+) / brake (-) torque, N.m
  double delta = 0.0;  // road-wheel steering angle, rad
};

/// External force along the body x axis, opposing motion when positive.
struct Disturbance {
  double drag_n = 0.0;
};

/// Longitudinal tire force t_w / rw minus rolling and aerodynamic resistance.
double longitudinal_force(double t_w, double vx, const VehicleParams& params);

/// Torque that holds a constant speed vx on a straight, level road.
double equilibrium_torque(double vx, const VehicleParams& params);

StateRate derivatives(const VehicleState& state, const ActuationInput& input,
                      const VehicleParams& params, const Disturbance& dist = {});

/// Classical RK4 step with the input held over dt.
VehicleState rk4_step(const VehicleState& state, const ActuationInput& input,
                      const VehicleParams& params, double dt,
                      const Disturbance& dist = {});

/// RK4 with a time-varying input; `input` receives the time since the start
/// of the step, in [0, dt].
VehicleState rk4_step(const VehicleState& state,
                      const std::function<ActuationInput(double)>& input,
                      const VehicleParams& params, double dt,
                      const Disturbance& dist = {});

/// Magnitude clamp, then slew clamp to +-rate * dt around prev.
ActuationInput apply_limits(const ActuationInput& raw, const ActuationInput& prev,
                            const ActuatorLimits& limits, double dt);

inline ActuationInput apply_limits(const ActuationInput& raw,
                                   const ActuationInput& prev,
                                   const VehicleParams& params, double dt) {
  return apply_limits(raw, prev, params.limits, dt);
}

}  // namespace mfc
