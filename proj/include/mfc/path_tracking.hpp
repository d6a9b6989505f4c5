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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "mfc/f_estimator.hpp"
#include "mfc/ref_path.hpp"
#include "mfc/ultra_local.hpp"
#include "mfc/vehicle.hpp"

namespace mfc {

/// Converts integer microseconds to seconds; both sides of a split session
/// use this so that timestamps agree bit for bit.
inline double to_seconds(std::int64_t t_us) { return static_cast<double>(t_us) / 1e6; }

/// Raised when a run must stop: plant blow-up or the vehicle leaving the path.
class RunAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Controller side

struct LoopConfig {
  UltraLocalConfig model;
  GainSet gains;
  double tau = 0.5;  // estimator window, s
  std::optional<double> integral_bound;
  QuadratureRule quadrature = QuadratureRule::kPiecewiseLinear;
};

struct TrackerConfig {
  // Speed loop: y1 = vx, u1 = wheel torque, first-order model closed by an iP.
  LoopConfig longitudinal{{1, 1.0 / (1500.0 * 0.31)}, {1.0, 0.0, 0.0}, 0.5, {}};
  // Lateral loop: y2 = lateral deviation, u2 = steering, second-order model
  // closed by an iPD.
  LoopConfig lateral{{2, 30.0}, {4.0, 0.0, 4.0}, 0.1, {}};
  double derivative_cutoff_hz = 10.0;
  double lateral_offset_ref = 0.0;  // y2d, m
  ActuatorLimits limits;

  void validate() const;
};

/// One intelligent-controller loop with its estimator window and error memory.
struct Loop {
  UltraLocalConfig model;
  GainSet gains;
  EstimatorConfig estimator;
  LoopState state;
  SampleWindow window;
  std::optional<double> integral_bound;

  explicit Loop(const LoopConfig& config);
};

struct LoopPair {
  Loop longitudinal;
  Loop lateral;

  /// Throws std::invalid_argument unless the longitudinal loop is first order
  /// and the lateral loop second order.
  explicit LoopPair(const TrackerConfig& config);
};

/// What the controller receives each period: the measured state and the
/// observer's projection onto the path.
struct SensorReading {
  std::int64_t seq = 0;
  std::int64_t t_us = 0;
  VehicleState state;
  double d = 0.0;
  double s_star = 0.0;
};

struct ControlOutput {
  ActuationInput raw;
  ActuationInput applied;
  double f1_est = 0.0;
  double f2_est = 0.0;
  bool f1_ready = false;
  bool f2_ready = false;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual ControlOutput step(const SensorReading& sensor) = 0;
};

/**
 * Two-loop model-free path tracker.
 *
 * Holds the reference path only for its speed profile; lateral geometry
 * arrives pre-projected in the SensorReading. Estimator windows are fed with
 * the limited inputs actually applied to the plant, which the tracker
 * reproduces with the same actuator limits the plant uses.
 */
class PathTracker : public Controller {
 public:
  PathTracker(const TrackerConfig& config, RefPath path, double control_period);

  ControlOutput step(const SensorReading& sensor) override;

  const LoopPair& loops() const { return loops_; }
  const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  RefPath path_;
  double dt_;
  LoopPair loops_;
  ActuationInput prev_applied_;
};

/// Always commands zero torque and zero steering.
class ZeroController : public Controller {
 public:
  ControlOutput step(const SensorReading&) override { return {}; }
};

/// Plant-side observer: projects a (measured) state onto the path.
SensorReading observe(const RefPath& path, const VehicleState& state, std::int64_t seq,
                      std::int64_t t_us, std::optional<double> hint_s = std::nullopt);

/// Projection followed by one tracker step; returns the raw command.
ActuationInput control_step(PathTracker& tracker, const VehicleState& measurement,
                            const RefPath& path, std::int64_t seq, std::int64_t t_us,
                            std::optional<double> hint_s = std::nullopt);

// ---------------------------------------------------------------------------
// Plant side

struct NoiseSpec {
  double vx = 0.0;
  double vy = 0.0;
  double psi = 0.0;
  double psi_dot = 0.0;
  double x = 0.0;
  double y = 0.0;

  bool any() const { return vx > 0 || vy > 0 || psi > 0 || psi_dot > 0 || x > 0 || y > 0; }
};

/// Extra longitudinal drag switched on at a given time.
struct DragStep {
  double t_start = 0.0;
  double force_n = 0.0;
};

struct PlantConfig {
  VehicleParams params;
  std::int64_t period_us = 10000;
  std::int64_t substep_us = 1000;
  double horizon = 120.0;
  NoiseSpec noise;
  std::uint64_t seed = 1;
  std::optional<DragStep> drag_step;
  double initial_offset = 0.0;               // lateral, m, left positive
  std::optional<double> initial_speed;       // defaults to v_ref(0)
  double max_offpath = 20.0;                 // m
  double end_margin = 1.0;                   // stop this far before the path end

  double period() const { return to_seconds(period_us); }
  std::int64_t steps() const;
};

struct TraceRow {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double x_ref = 0.0;
  double y_ref = 0.0;
  double vx = 0.0;
  double v_ref = 0.0;
  double e_v = 0.0;
  double d = 0.0;
  double e_psi = 0.0;
  double t_w_raw = 0.0;
  double t_w_applied = 0.0;
  double delta_raw = 0.0;
  double delta_applied = 0.0;
  double f1_est = 0.0;
  double f2_est = 0.0;
  double s_star = 0.0;  // not part of the CSV
};

/// Column names of the trace CSV, in order.
const std::vector<const char*>& trace_columns();

/// Values of one row in trace_columns() order.
std::vector<double> trace_values(const TraceRow& row);

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

/**
 * The simulated vehicle plus its observer. One control period is
 * sense() -> [controller] -> actuate(); actuate() applies the actuator limits,
 * appends a trace row and integrates the plant over the period in substeps.
 */
class PlantSession {
 public:
  PlantSession(PlantConfig config, RefPath path);

  /// True once the horizon is reached or the vehicle is at the path end.
  bool finished() const;

  /// Measurement for the current period (with noise, if configured).
  SensorReading sense();

  /// Applies a raw command. Estimates are recorded in the trace only.
  void actuate(const ActuationInput& raw, double f1_est, double f2_est);

  std::int64_t step_index() const { return k_; }
  std::int64_t t_us() const { return k_ * config_.period_us; }
  const VehicleState& state() const { return state_; }
  const std::vector<TraceRow>& trace() const { return trace_; }
  const RefPath& path() const { return path_; }
  const PlantConfig& config() const { return config_; }

 private:
  void update_projection();

  PlantConfig config_;
  RefPath path_;
  VehicleState state_;
  Projection truth_;
  std::optional<double> sensor_hint_;
  ActuationInput prev_applied_;
  std::int64_t k_ = 0;
  std::int64_t n_steps_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<TraceRow> trace_;
};

struct TrackingMetrics {
  double e_y_max = 0.0;
  double e_y_rms = 0.0;
  double e_v_max = 0.0;
  double e_v_rms = 0.0;
  double e_psi_max = 0.0;
  std::size_t samples = 0;
};

/// Metrics over rows with t >= exclude_before.
TrackingMetrics compute_metrics(const std::vector<TraceRow>& trace, double exclude_before);

struct RunResult {
  std::vector<TraceRow> trace;
  TrackingMetrics metrics;
};

/// Runs plant and controller in lockstep in one process. Throws RunAbort on
/// plant blow-up or loss of the path.
RunResult run_closed_loop(const PlantConfig& plant, const RefPath& path,
                          Controller& controller, double metrics_exclude_before);

}  // namespace mfc
