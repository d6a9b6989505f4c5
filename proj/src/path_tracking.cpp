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

#include "mfc/path_tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace mfc {

void TrackerConfig::validate() const {
  longitudinal.model.validate();
  lateral.model.validate();
  if (longitudinal.model.nu != 1) {
    throw std::invalid_argument("tracker: longitudinal loop must have nu = 1");
  }
  if (lateral.model.nu != 2) {
    throw std::invalid_argument("tracker: lateral loop must have nu = 2");
  }
  longitudinal.gains.validate(1);
  lateral.gains.validate(2);
  if (!(longitudinal.tau > 0.0) || !(lateral.tau > 0.0)) {
    throw std::invalid_argument("tracker: estimator windows must be > 0");
  }
  if (!(derivative_cutoff_hz > 0.0)) {
    throw std::invalid_argument("tracker: derivative cutoff must be > 0");
  }
}

Loop::Loop(const LoopConfig& config)
    : model(config.model),
      gains(config.gains),
      estimator{config.model.nu, config.model.alpha, config.tau, config.quadrature},
      window(config.tau),
      integral_bound(config.integral_bound) {
  model.validate();
  gains.validate(model.nu);
  state.warmup_remaining = config.tau;
}

LoopPair::LoopPair(const TrackerConfig& config)
    : longitudinal(config.longitudinal), lateral(config.lateral) {
  if (longitudinal.model.nu != 1 || lateral.model.nu != 2) {
    throw std::invalid_argument("loop pair: expected nu = 1 (longitudinal) and nu = 2 (lateral)");
  }
}

PathTracker::PathTracker(const TrackerConfig& config, RefPath path, double control_period)
    : config_(config), path_(std::move(path)), dt_(control_period), loops_(config) {
  config_.validate();
  if (!(dt_ > 0.0)) throw std::invalid_argument("tracker: control period must be > 0");
  if (path_.empty()) throw std::invalid_argument("tracker: empty reference path");
}

namespace {

double estimate_or_zero(const Loop& loop, bool& ready) {
  const auto f = estimate_f(loop.window, loop.estimator);
  ready = f.has_value();
  return f.value_or(0.0);
}

}  // namespace

ControlOutput PathTracker::step(const SensorReading& sensor) {
  const double t = to_seconds(sensor.t_us);
  const VehicleState& m = sensor.state;
  ControlOutput out;

  // Speed loop.
  Loop& lon = loops_.longitudinal;
  const double v_ref = path_.v_ref_at(sensor.s_star);
  const double v_ref_dot = path_.dv_ref_ds_at(sensor.s_star) * m.vx;
  const double e1 = m.vx - v_ref;
  lon.window.push(t, m.vx, prev_applied_.t_w);
  out.f1_est = estimate_or_zero(lon, out.f1_ready);
  lon.state = step_loop(lon.state, e1, dt_, config_.derivative_cutoff_hz, lon.integral_bound);
  out.raw.t_w = lon.gains.ki > 0.0
                    ? ipi_control(out.f1_est, v_ref_dot, e1, lon.state.integral_e, lon.gains,
                                  lon.model.alpha)
                    : ip_control(out.f1_est, v_ref_dot, e1, lon.gains, lon.model.alpha);

  // Lateral loop, centerline (or constant offset) reference: y2d' = y2d'' = 0.
  Loop& lat = loops_.lateral;
  const double e2 = sensor.d - config_.lateral_offset_ref;
  lat.window.push(t, sensor.d, prev_applied_.delta);
  out.f2_est = estimate_or_zero(lat, out.f2_ready);
  lat.state = step_loop(lat.state, e2, dt_, config_.derivative_cutoff_hz, lat.integral_bound);
  out.raw.delta = lat.gains.ki > 0.0
                      ? ipid_control(out.f2_est, 0.0, e2, lat.state.integral_e,
                                     lat.state.edot_filtered, lat.gains, lat.model.alpha)
                      : ipd_control(out.f2_est, 0.0, e2, lat.state.edot_filtered, lat.gains,
                                    lat.model.alpha);

  out.applied = apply_limits(out.raw, prev_applied_, config_.limits, dt_);
  prev_applied_ = out.applied;
  return out;
}

SensorReading observe(const RefPath& path, const VehicleState& state, std::int64_t seq,
                      std::int64_t t_us, std::optional<double> hint_s) {
  const Projection p = project(path, state.x, state.y, hint_s);
  SensorReading r;
  r.seq = seq;
  r.t_us = t_us;
  r.state = state;
  r.d = p.d;
  r.s_star = p.s_star;
  return r;
}

ActuationInput control_step(PathTracker& tracker, const VehicleState& measurement,
                            const RefPath& path, std::int64_t seq, std::int64_t t_us,
                            std::optional<double> hint_s) {
  return tracker.step(observe(path, measurement, seq, t_us, hint_s)).raw;
}

// ---------------------------------------------------------------------------

std::int64_t PlantConfig::steps() const {
  if (period_us <= 0) return 0;
  const auto horizon_us = static_cast<std::int64_t>(std::llround(horizon * 1e6));
  return std::max<std::int64_t>(0, horizon_us / period_us);
}

const std::vector<const char*>& trace_columns() {
  static const std::vector<const char*> cols = {
      "t",         "x",           "y",           "x_ref",     "y_ref",     "vx",
      "v_ref",     "e_v",         "d",           "e_psi",     "t_w_raw",   "t_w_applied",
      "delta_raw", "delta_applied", "f1_est",    "f2_est"};
  return cols;
}

std::vector<double> trace_values(const TraceRow& r) {
  return {r.t,     r.x,       r.y,           r.x_ref,     r.y_ref,         r.vx,
          r.v_ref, r.e_v,     r.d,           r.e_psi,     r.t_w_raw,       r.t_w_applied,
          r.delta_raw, r.delta_applied, r.f1_est, r.f2_est};
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
  const auto& cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  char buf[32];
  for (const TraceRow& r : trace) {
    const auto vals = trace_values(r);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", vals[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

PlantSession::PlantSession(PlantConfig config, RefPath path)
    : config_(std::move(config)), path_(std::move(path)), rng_(config_.seed) {
  if (path_.size() < 2) throw std::invalid_argument("plant: reference path needs >= 2 points");
  if (config_.period_us <= 0 || config_.substep_us <= 0 ||
      config_.period_us % config_.substep_us != 0) {
    throw std::invalid_argument("plant: control period must be a positive multiple of the substep");
  }
  n_steps_ = config_.steps();

  const PathPoint start = path_.at(0.0);
  state_.x = start.x - config_.initial_offset * std::sin(start.heading);
  state_.y = start.y + config_.initial_offset * std::cos(start.heading);
  state_.psi = start.heading;
  state_.vx = config_.initial_speed.value_or(start.v_ref);
  update_projection();
}

void PlantSession::update_projection() {
  truth_ = project(path_, state_.x, state_.y,
                   k_ == 0 ? std::optional<double>(0.0) : std::optional<double>(truth_.s_star));
  if (truth_.distance > config_.max_offpath) {
    throw RunAbort("vehicle lost the path: " + std::to_string(truth_.distance) +
                   " m off at t = " + std::to_string(to_seconds(t_us())) + " s");
  }
}

bool PlantSession::finished() const {
  return k_ >= n_steps_ || truth_.s_star >= path_.length() - config_.end_margin;
}

SensorReading PlantSession::sense() {
  if (!config_.noise.any()) {
    SensorReading r;
    r.seq = k_;
    r.t_us = t_us();
    r.state = state_;
    r.d = truth_.d;
    r.s_star = truth_.s_star;
    return r;
  }
  const NoiseSpec& n = config_.noise;
  VehicleState m = state_;
  m.vx += n.vx * normal_(rng_);
  m.vy += n.vy * normal_(rng_);
  m.psi += n.psi * normal_(rng_);
  m.psi_dot += n.psi_dot * normal_(rng_);
  m.x += n.x * normal_(rng_);
  m.y += n.y * normal_(rng_);
  SensorReading r = observe(path_, m, k_, t_us(), sensor_hint_.value_or(truth_.s_star));
  sensor_hint_ = r.s_star;
  return r;
}

void PlantSession::actuate(const ActuationInput& raw, double f1_est, double f2_est) {
  const double dt = config_.period();
  const ActuationInput applied = apply_limits(raw, prev_applied_, config_.params, dt);

  const PathPoint ref = path_.at(truth_.s_star);
  TraceRow row;
  row.t = to_seconds(t_us());
  row.x = state_.x;
  row.y = state_.y;
  row.x_ref = ref.x;
  row.y_ref = ref.y;
  row.vx = state_.vx;
  row.v_ref = ref.v_ref;
  row.e_v = state_.vx - ref.v_ref;
  row.d = truth_.d;
  row.e_psi = wrap_angle(state_.psi - truth_.heading);
  row.t_w_raw = raw.t_w;
  row.t_w_applied = applied.t_w;
  row.delta_raw = raw.delta;
  row.delta_applied = applied.delta;
  row.f1_est = f1_est;
  row.f2_est = f2_est;
  row.s_star = truth_.s_star;
  trace_.push_back(row);

  const std::int64_t n_sub = config_.period_us / config_.substep_us;
  const double h = to_seconds(config_.substep_us);
  try {
    for (std::int64_t j = 0; j < n_sub; ++j) {
      Disturbance dist;
      const double t_sub = to_seconds(t_us() + j * config_.substep_us);
      if (config_.drag_step && t_sub >= config_.drag_step->t_start) {
        dist.drag_n = config_.drag_step->force_n;
      }
      state_ = rk4_step(state_, applied, config_.params, h, dist);
    }
  } catch (const PlantError& e) {
    throw RunAbort(std::string(e.what()) + " at t = " + std::to_string(row.t) + " s");
  }
  prev_applied_ = applied;
  ++k_;
  update_projection();
}

TrackingMetrics compute_metrics(const std::vector<TraceRow>& trace, double exclude_before) {
  TrackingMetrics m;
  double sum_y = 0.0;
  double sum_v = 0.0;
  for (const TraceRow& r : trace) {
    if (r.t < exclude_before) continue;
    m.e_y_max = std::max(m.e_y_max, std::abs(r.d));
    m.e_v_max = std::max(m.e_v_max, std::abs(r.e_v));
    m.e_psi_max = std::max(m.e_psi_max, std::abs(r.e_psi));
    sum_y += r.d * r.d;
    sum_v += r.e_v * r.e_v;
    ++m.samples;
  }
  if (m.samples > 0) {
    m.e_y_rms = std::sqrt(sum_y / static_cast<double>(m.samples));
    m.e_v_rms = std::sqrt(sum_v / static_cast<double>(m.samples));
  }
  return m;
}

RunResult run_closed_loop(const PlantConfig& plant_config, const RefPath& path,
                          Controller& controller, double metrics_exclude_before) {
  PlantSession plant(plant_config, path);
  while (!plant.finished()) {
    const SensorReading sensor = plant.sense();
    const ControlOutput out = controller.step(sensor);
    plant.actuate(out.raw, out.f1_est, out.f2_est);
  }
  RunResult result;
  result.trace = plant.trace();
  result.metrics = compute_metrics(result.trace, metrics_exclude_before);
  return result;
}

}  // namespace mfc
