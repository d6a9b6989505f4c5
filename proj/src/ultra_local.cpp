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

#include "mfc/ultra_local.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mfc {
namespace {

void require_finite(std::initializer_list<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("intelligent controller: non-finite input");
    }
  }
}

void require_alpha(double alpha) {
  if (alpha == 0.0) {
    throw std::invalid_argument("intelligent controller: alpha must be nonzero");
  }
}

}  // namespace

void UltraLocalConfig::validate() const {
  if (nu != 1 && nu != 2) {
    throw std::invalid_argument("ultra-local model: nu must be 1 or 2, got " +
                                std::to_string(nu));
  }
  if (!std::isfinite(alpha) || alpha == 0.0) {
    throw std::invalid_argument("ultra-local model: alpha must be finite and nonzero");
  }
}

void GainSet::validate(int nu) const {
  if (!(kp > 0.0)) throw std::invalid_argument("gains: kp must be > 0");
  if (!(ki >= 0.0)) throw std::invalid_argument("gains: ki must be >= 0");
  if (!(kd >= 0.0)) throw std::invalid_argument("gains: kd must be >= 0");
  if (nu == 1 && kd != 0.0) {
    throw std::invalid_argument("gains: kd must be 0 on a first-order loop");
  }
}

double ip_control(double f_est, double ydot_ref, double e, const GainSet& gains,
                  double alpha) {
  require_alpha(alpha);
  require_finite({f_est, ydot_ref, e, gains.kp, alpha});
  return -(f_est - ydot_ref + gains.kp * e) / alpha;
}

double ipi_control(double f_est, double ydot_ref, double e, double int_e,
                   const GainSet& gains, double alpha) {
  require_alpha(alpha);
  require_finite({f_est, ydot_ref, e, int_e, gains.kp, gains.ki, alpha});
  return -(f_est - ydot_ref + gains.kp * e + gains.ki * int_e) / alpha;
}

double ipd_control(double f_est, double yddot_ref, double e, double edot,
                   const GainSet& gains, double alpha) {
  require_alpha(alpha);
  require_finite({f_est, yddot_ref, e, edot, gains.kp, gains.kd, alpha});
  return -(f_est - yddot_ref + gains.kp * e + gains.kd * edot) / alpha;
}

double ipid_control(double f_est, double yddot_ref, double e, double int_e,
                    double edot, const GainSet& gains, double alpha) {
  require_alpha(alpha);
  require_finite(
      {f_est, yddot_ref, e, int_e, edot, gains.kp, gains.ki, gains.kd, alpha});
  return -(f_est - yddot_ref + gains.kp * e + gains.ki * int_e +
           gains.kd * edot) /
         alpha;
}

LoopState step_loop(LoopState state, double e, double dt, double cutoff_hz,
                    std::optional<double> integral_bound) {
  if (!(dt > 0.0) || !(cutoff_hz > 0.0)) {
    throw std::invalid_argument("step_loop: dt and cutoff must be > 0");
  }
  const double prev = state.primed ? state.prev_e : e;
  state.integral_e += 0.5 * (prev + e) * dt;
  if (integral_bound) {
    const double b = std::abs(*integral_bound);
    state.integral_e = std::clamp(state.integral_e, -b, b);
  }

  const double raw = (e - prev) / dt;
  const double rc = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  const double a = dt / (dt + rc);
  state.edot_filtered += a * (raw - state.edot_filtered);

  state.prev_e = e;
  state.primed = true;
  state.warmup_remaining = std::max(0.0, state.warmup_remaining - dt);
  return state;
}

}  // namespace mfc
