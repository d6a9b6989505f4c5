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

#include <optional>

namespace mfc {

/**
 * Ultra-local model y^(nu) = F + alpha * u.
 *
 * The lumped term F is not stored here: it absorbs everything the model
 * leaves out (unmodeled dynamics, couplings, disturbances) and is re-estimated
 * at every control step from the measured (u, y) history.
 */
struct UltraLocalConfig {
  int nu = 1;          // derivation order, 1 or 2
  double alpha = 1.0;  // input scaling, nonzero

  /// Throws std::invalid_argument when nu is not 1 or 2, or alpha is zero
  /// or non-finite.
  void validate() const;
};

struct GainSet {
  double kp = 1.0;
  double ki = 0.0;
  double kd = 0.0;

  /// Checks signs, and that kd is zero on a first-order loop.
  void validate(int nu) const;
};

/// Per-loop memory for the integral and derivative of the tracking error.
struct LoopState {
  double integral_e = 0.0;
  double prev_e = 0.0;
  double edot_filtered = 0.0;
  double warmup_remaining = 0.0;
  bool primed = false;  // false until the first error sample has been seen
};

// Intelligent controllers. Each returns the control input u and throws
// std::invalid_argument on alpha == 0 or any non-finite argument.

/// iP: u = -(F - ydot_ref + kp e) / alpha.
double ip_control(double f_est, double ydot_ref, double e, const GainSet& gains,
                  double alpha);

/// iPI: u = -(F - ydot_ref + kp e + ki int_e) / alpha.
double ipi_control(double f_est, double ydot_ref, double e, double int_e,
                   const GainSet& gains, double alpha);

/// iPD: u = -(F - yddot_ref + kp e + kd edot) / alpha.
double ipd_control(double f_est, double yddot_ref, double e, double edot,
                   const GainSet& gains, double alpha);

/// iPID: u = -(F - yddot_ref + kp e + ki int_e + kd edot) / alpha.
double ipid_control(double f_est, double yddot_ref, double e, double int_e,
                    double edot, const GainSet& gains, double alpha);

/**
 * Advances the error bookkeeping by one control period.
 *
 * The integral uses the trapezoid rule; the derivative is the backward
 * difference (e - prev_e) / dt passed through a first-order low-pass with the
 * given cutoff. On the first call prev_e is taken equal to e, so the raw
 * derivative is zero and the integral grows by e * dt.
 *
 * When integral_bound is set, integral_e is clamped to [-bound, +bound].
 */
LoopState step_loop(LoopState state, double e, double dt, double cutoff_hz,
                    std::optional<double> integral_bound = std::nullopt);

}  // namespace mfc
