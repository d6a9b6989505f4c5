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

#include <algorithm>
#include <cmath>
#include <functional>

namespace mfc {
namespace {

bool finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.psi) &&
         std::isfinite(s.vx) && std::isfinite(s.vy) && std::isfinite(s.psi_dot);
}

VehicleState advance(const VehicleState& s, const StateRate& k, double h) {
  return {s.x + h * k.x,   s.y + h * k.y,   s.psi + h * k.psi,
          s.vx + h * k.vx, s.vy + h * k.vy, s.psi_dot + h * k.psi_dot};
}

}  // namespace

double VehicleParams::understeer_gradient() const {
  return m * (lr * cr - lf * cf) / (cf * cr * wheelbase());
}

std::vector<std::string> VehicleParams::violations() const {
  std::vector<std::string> out;
  auto positive = [&out](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be > 0");
  };
  auto non_negative = [&out](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be >= 0");
  };
  positive(m, "vehicle.m");
  positive(iz, "vehicle.iz");
  positive(lf, "vehicle.lf");
  positive(lr, "vehicle.lr");
  positive(cf, "vehicle.cf");
  positive(cr, "vehicle.cr");
  positive(rw, "vehicle.rw");
  non_negative(f0, "vehicle.f0");
  non_negative(f2, "vehicle.f2");
  positive(g, "vehicle.g");
  positive(v_eps, "vehicle.v_eps");
  positive(limits.t_max, "vehicle.t_max");
  positive(limits.delta_max, "vehicle.delta_max");
  positive(limits.torque_rate, "vehicle.torque_rate");
  positive(limits.delta_rate, "vehicle.delta_rate");
  return out;
}

double longitudinal_force(double t_w, double vx, const VehicleParams& params) {
  return t_w / params.rw - params.f0 - params.f2 * vx * vx;
}

double equilibrium_torque(double vx, const VehicleParams& params) {
  return params.rw * (params.f0 + params.f2 * vx * vx);
}

StateRate derivatives(const VehicleState& s, const ActuationInput& in,
                      const VehicleParams& p, const Disturbance& dist) {
  if (!finite(s) || !std::isfinite(in.t_w) || !std::isfinite(in.delta)) {
    throw PlantError("vehicle plant: non-finite state or input");
  }
  const double fx = longitudinal_force(in.t_w, s.vx, p) - dist.drag_n;
  const double sin_d = std::sin(in.delta);
  const double cos_d = std::cos(in.delta);

  StateRate r;
  r.x = s.vx * std::cos(s.psi) - s.vy * std::sin(s.psi);
  r.y = s.vx * std::sin(s.psi) + s.vy * std::cos(s.psi);
  r.psi = s.psi_dot;

  if (s.vx >= p.v_eps) {
    const double slip_f = in.delta - (s.vy + p.lf * s.psi_dot) / s.vx;
    const double slip_r = -(s.vy - p.lr * s.psi_dot) / s.vx;
    const double fyf = p.cf * slip_f;
    const double fyr = p.cr * slip_r;
    r.vx = s.psi_dot * s.vy + (fx - fyf * sin_d) / p.m;
    r.vy = -s.psi_dot * s.vx + (fyf * cos_d + fyr) / p.m;
    r.psi_dot = (p.lf * fyf * cos_d - p.lr * fyr) / p.iz;
  } else {
    r.vx = s.psi_dot * s.vy + fx / p.m;
    r.vy = 0.0;
    r.psi_dot = 0.0;
  }
  return r;
}

VehicleState rk4_step(const VehicleState& s,
                      const std::function<ActuationInput(double)>& input,
                      const VehicleParams& p, double dt, const Disturbance& dist) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
  const ActuationInput in0 = input(0.0);
  const ActuationInput in_mid = input(0.5 * dt);
  const ActuationInput in1 = input(dt);
  const StateRate k1 = derivatives(s, in0, p, dist);
  const StateRate k2 = derivatives(advance(s, k1, 0.5 * dt), in_mid, p, dist);
  const StateRate k3 = derivatives(advance(s, k2, 0.5 * dt), in_mid, p, dist);
  const StateRate k4 = derivatives(advance(s, k3, dt), in1, p, dist);
  StateRate k;
  k.x = (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x) / 6.0;
  k.y = (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y) / 6.0;
  k.psi = (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi) / 6.0;
  k.vx = (k1.vx + 2.0 * k2.vx + 2.0 * k3.vx + k4.vx) / 6.0;
  k.vy = (k1.vy + 2.0 * k2.vy + 2.0 * k3.vy + k4.vy) / 6.0;
  k.psi_dot =
      (k1.psi_dot + 2.0 * k2.psi_dot + 2.0 * k3.psi_dot + k4.psi_dot) / 6.0;
  VehicleState next = advance(s, k, dt);
  if (!finite(next)) throw PlantError("vehicle plant: integration blew up");
  return next;
}

VehicleState rk4_step(const VehicleState& s, const ActuationInput& in,
                      const VehicleParams& p, double dt, const Disturbance& dist) {
  return rk4_step(s, [&in](double) { return in; }, p, dt, dist);
}

ActuationInput apply_limits(const ActuationInput& raw, const ActuationInput& prev,
                            const ActuatorLimits& lim, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("apply_limits: dt must be > 0");
  ActuationInput out;
  out.t_w = std::clamp(raw.t_w, -lim.t_max, lim.t_max);
  out.delta = std::clamp(raw.delta, -lim.delta_max, lim.delta_max);

  const double dt_w = lim.torque_rate * dt;
  const double d_delta = lim.delta_rate * dt;
  out.t_w = std::clamp(out.t_w, prev.t_w - dt_w, prev.t_w + dt_w);
  out.delta = std::clamp(out.delta, prev.delta - d_delta, prev.delta + d_delta);
  return out;
}

}  // namespace mfc
