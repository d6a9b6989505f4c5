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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <future>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mfc/cosim.hpp"
#include "mfc/f_estimator.hpp"
#include "mfc/path_tracking.hpp"
#include "mfc/ref_path.hpp"
#include "mfc/scenario.hpp"
#include "mfc/ultra_local.hpp"
#include "mfc/vehicle.hpp"

namespace mfc {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kKmh = 1.0 / 3.6;

// Criterion tolerances.
constexpr double kEstimatorRelTol = 1e-6;
constexpr double kEstimatorBudgetS = 1.0;
constexpr double kAnnihilatorTol = 1e-9;
constexpr double kNormalizationTol = 1e-6;
constexpr double kIdealDynamicsTol = 1e-4;
constexpr double kSpeedTol = 0.2 * kKmh;
constexpr double kBreakpointWindowS = 2.0;
constexpr double kRunBudgetS = 10.0;
constexpr double kLateralTol = 0.05;
constexpr double kGentleLateralTol = 0.02;
constexpr double kGentleYawTol = 0.5 * std::numbers::pi / 180.0;
constexpr double kSplitTol = 1e-9;
constexpr double kRk4RatioLo = 12.0;
constexpr double kRk4RatioHi = 20.0;
constexpr double kTrapRatioLo = 3.5;
constexpr double kTrapRatioHi = 4.5;
constexpr double kDragStepN = 500.0;
constexpr double kDragStepT = 30.0;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SampleWindow fill(double tau, double h, const std::function<double(double)>& y,
                  const std::function<double(double)>& u) {
  SampleWindow w(tau, 1 << 16);
  const int n = static_cast<int>(std::lround(tau / h));
  for (int k = 0; k <= n; ++k) w.push(k * h, y(k * h), u(k * h));
  return w;
}

void criterion1() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double big_f = uni(rng);
    const double alpha = uni(rng);
    const double u0 = uni(rng);
    const double c = uni(rng);
    const auto w = fill(0.5, 1e-3, [&](double t) { return (big_f + alpha * u0) * t + c; },
                        [&](double) { return u0; });
    const double est = estimate_f_order1(w, alpha, 0.5).value();
    worst = std::max(worst, std::abs(est - big_f) / std::abs(big_f));
  }
  const double elapsed = seconds_since(start);
  report(1, "estimator exactness", worst < kEstimatorRelTol && elapsed < kEstimatorBudgetS,
         fmt("max relative error %.3g (< %g) over 100 draws, %.3f s (< %g s)", worst,
             kEstimatorRelTol, elapsed, kEstimatorBudgetS));
}

void criterion2() {
  std::mt19937_64 rng(2027);
  std::uniform_real_distribution<double> uni(-10.0, 10.0);
  const auto y = [](double s) { return std::sin(7 * s) + s * s * s; };
  const auto u = [](double s) { return std::cos(s); };
  const double base = estimate_f_order2(fill(0.3, 1e-3, y, u), 2.0, 0.3).value();
  double drift = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double y0 = uni(rng);
    const double y1 = uni(rng);
    const auto w = fill(0.3, 1e-3, [&](double s) { return y(s) + y0 + y1 * s; }, u);
    drift = std::max(drift, std::abs(estimate_f_order2(w, 2.0, 0.3).value() - base));
  }
  const auto norm_w = fill(1.0, 1e-3, [](double s) { return s * s / 2; }, [](double) { return 0.0; });
  const double norm = estimate_f_order2(norm_w, 1.0, 1.0).value();
  report(2, "second-order annihilator",
         drift < kAnnihilatorTol && std::abs(norm - 1.0) < kNormalizationTol,
         fmt("affine drift %.3g (< %g), normalization %.12g (|x-1| < %g)", drift, kAnnihilatorTol,
             norm, kNormalizationTol));
}

// Exact ultra-local plants closed with the true F, integrated by RK4 with the
// control law inside the right-hand side.
void criterion3() {
  const std::vector<std::function<double(double)>> fs = {
      [](double t) { return 3.0 * std::sin(5 * t); },
      [](double t) { return -20.0 + 4.0 * std::tanh(t - 2.0); },
      [](double t) { return 7.0 * std::exp(-t) * std::cos(11 * t); },
  };
  const double h = 1e-3;

  double ip_worst = 0.0;
  for (const auto& f : fs) {
    const double kp = 2.0;
    const double alpha = 0.3;
    const double e0 = 0.8;
    const auto rhs = [&](double t, double y) {
      return f(t) + alpha * ip_control(f(t), std::cos(t), y - std::sin(t), {kp, 0, 0}, alpha);
    };
    double y = e0;
    for (int k = 0; k < 5000; ++k) {
      const double t = k * h;
      const double k1 = rhs(t, y);
      const double k2 = rhs(t + h / 2, y + h / 2 * k1);
      const double k3 = rhs(t + h / 2, y + h / 2 * k2);
      const double k4 = rhs(t + h, y + h * k3);
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      const double tn = (k + 1) * h;
      ip_worst = std::max(ip_worst, std::abs(y - std::sin(tn) - e0 * std::exp(-kp * tn)) / e0);
    }
  }

  // e'' + 4 e' + 4 e = 0 has the solution (e0 + (v0 + 2 e0) t) exp(-2 t).
  double ipd_worst = 0.0;
  for (const auto& f : fs) {
    const double alpha = 30.0;
    const double e0 = 0.2;
    const double v0 = -0.1;
    const auto acc = [&](double t, double y, double v) {
      return f(t) + alpha * ipd_control(f(t), 0, y, v, {4.0, 0, 4.0}, alpha);
    };
    double y = e0;
    double v = v0;
    for (int k = 0; k < 5000; ++k) {
      const double t = k * h;
      const double a1 = acc(t, y, v);
      const double a2 = acc(t + h / 2, y + h / 2 * v, v + h / 2 * a1);
      const double a3 = acc(t + h / 2, y + h / 2 * (v + h / 2 * a1), v + h / 2 * a2);
      const double a4 = acc(t + h, y + h * (v + h / 2 * a2), v + h * a3);
      y += h * v + h * h / 6 * (a1 + a2 + a3);
      v += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
      const double tn = (k + 1) * h;
      ipd_worst = std::max(ipd_worst,
                           std::abs(y - (e0 + (v0 + 2 * e0) * tn) * std::exp(-2 * tn)) / e0);
    }
  }
  report(3, "ideal error dynamics", ip_worst < kIdealDynamicsTol && ipd_worst < kIdealDynamicsTol,
         fmt("iP max |e - e0 exp(-kp t)|/|e0| %.3g, iPD max residual/|e0| %.3g (< %g), 3 F(t) each",
             ip_worst, ipd_worst, kIdealDynamicsTol));
}

Scenario scenario_with(const json& patch) {
  json doc = default_scenario_json();
  doc.merge_patch(patch);
  return parse_scenario(doc);
}

RunResult run_in_process(const Scenario& sc, const RefPath& path) {
  PathTracker tracker(tracker_config(sc), path, sc.control_period);
  return run_closed_loop(plant_config(sc), path, tracker, sc.warmup_exclusion());
}

// Times at which the vehicle crosses each speed-profile breakpoint.
std::vector<double> breakpoint_times(const RefPath& path, const std::vector<TraceRow>& trace) {
  std::vector<double> times;
  for (const double s_b : path.speed_breakpoints()) {
    const auto it = std::find_if(trace.begin(), trace.end(),
                                 [&](const TraceRow& r) { return r.s_star >= s_b; });
    if (it != trace.end()) times.push_back(it->t);
  }
  return times;
}

bool near_any(double t, const std::vector<double>& times, double half_width) {
  return std::any_of(times.begin(), times.end(),
                     [&](double tb) { return std::abs(t - tb) <= half_width; });
}

void criterion4(const Scenario& sc, const RefPath& path) {
  const auto start = Clock::now();
  const RunResult r = run_in_process(sc, path);
  const double elapsed = seconds_since(start);
  const auto bps = breakpoint_times(path, r.trace);
  double worst = 0.0;
  double worst_t = 0.0;
  for (const TraceRow& row : r.trace) {
    if (row.t < sc.warmup_exclusion() || near_any(row.t, bps, kBreakpointWindowS)) continue;
    if (std::abs(row.e_v) > worst) {
      worst = std::abs(row.e_v);
      worst_t = row.t;
    }
  }
  const double simulated = r.trace.empty() ? 0.0 : r.trace.back().t + sc.control_period;
  report(4, "speed tracking", worst <= kSpeedTol && elapsed < kRunBudgetS,
         fmt("max |e_v| %.4f km/h at t = %.2f s (<= 0.2) outside %zu breakpoint windows; "
             "%.1f s simulated in %.2f s (< %g s)",
             worst / kKmh, worst_t, bps.size(), simulated, elapsed, kRunBudgetS));
}

void criterion5(const Scenario& sc, const RefPath& path) {
  const RunResult mini = run_in_process(sc, path);
  const Scenario gentle = scenario_with({{"track", {{"preset", "satory-mini-gentle"}}}});
  const RunResult g = run_in_process(gentle, build_path(gentle));
  report(5, "lateral tracking",
         mini.metrics.e_y_max <= kLateralTol && g.metrics.e_y_max <= kGentleLateralTol &&
             g.metrics.e_psi_max <= kGentleYawTol,
         fmt("satory-mini max |d| %.2f mm (<= 50); gentle max |d| %.2f mm (<= 20), "
             "max yaw error %.3f deg (<= 0.5)",
             mini.metrics.e_y_max * 1e3, g.metrics.e_y_max * 1e3,
             g.metrics.e_psi_max * 180.0 / std::numbers::pi));
}

void criterion6(const Scenario& sc, const RefPath& path) {
  const RunResult ref = run_in_process(sc, path);

  std::promise<std::uint16_t> port;
  ServeOptions so;
  so.endpoint.port = 0;
  so.digest = scenario_digest(sc);
  so.on_listening = [&](std::uint16_t p) { port.set_value(p); };
  auto server = std::async(std::launch::async, [&] { return plant_serve(plant_config(sc), path, so); });
  DriveOptions d;
  d.endpoint.port = port.get_future().get();
  d.digest = so.digest;
  d.period_us = sc.period_us();
  PathTracker tracker(tracker_config(sc), path, sc.control_period);
  const DriveResult drive = controller_drive(tracker, d);
  const ServeResult serve = server.get();

  bool same_length = serve.trace.size() == ref.trace.size() && drive.rows.size() == ref.trace.size();
  double worst = same_length ? 0.0 : std::numeric_limits<double>::infinity();
  const std::size_t plant_cols = trace_columns().size() - 2;
  for (std::size_t i = 0; same_length && i < ref.trace.size(); ++i) {
    const auto a = trace_values(ref.trace[i]);
    const auto b = trace_values(serve.trace[i]);
    for (std::size_t c = 0; c < plant_cols; ++c) worst = std::max(worst, std::abs(a[c] - b[c]));
    const ControllerTraceRow& k = drive.rows[i];
    worst = std::max({worst, std::abs(k.f1_est - ref.trace[i].f1_est),
                      std::abs(k.f2_est - ref.trace[i].f2_est),
                      std::abs(k.t_w_raw - ref.trace[i].t_w_raw),
                      std::abs(k.delta_raw - ref.trace[i].delta_raw)});
  }
  const bool alternating =
      strictly_alternating(serve.transcript) && strictly_alternating(drive.transcript);
  report(6, "split-process equivalence", worst < kSplitTol && alternating,
         fmt("%zu periods, max per-column difference %.3g (< %g), strict alternation %s",
             serve.trace.size(), worst, kSplitTol, alternating ? "yes" : "no"));
}

double state_diff(const VehicleState& a, const VehicleState& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.psi - b.psi),
                   std::abs(a.vx - b.vx), std::abs(a.vy - b.vy), std::abs(a.psi_dot - b.psi_dot)});
}

void criterion7() {
  const VehicleParams p;
  const double t_w = equilibrium_torque(20.0, p);
  const auto integrate = [&](double h) {
    VehicleState s;
    s.vx = 20.0;
    const int n = static_cast<int>(std::lround(2.0 / h));
    for (int k = 0; k < n; ++k) {
      const double t0 = k * h;
      s = rk4_step(
          s, [&](double dt) { return ActuationInput{t_w, 0.05 * std::sin(2.0 * (t0 + dt))}; }, p, h);
    }
    return s;
  };
  const VehicleState fine = integrate(0.02 / 8);
  const double rk4_ratio = state_diff(integrate(0.02), fine) / state_diff(integrate(0.01), fine);

  const auto trap_err = [](int n) {
    std::vector<double> t;
    std::vector<double> f;
    for (int k = 0; k <= n; ++k) {
      t.push_back(static_cast<double>(k) / n);
      f.push_back(std::exp(t.back()));
    }
    return std::abs(trapezoid(t, f) - (std::exp(1.0) - 1.0));
  };
  const double trap_ratio = trap_err(20) / trap_err(40);

  std::vector<PathPoint> pts;
  for (int i = 0; i <= 200; ++i) pts.push_back({i * 0.5, i * 0.5, 0.0, 0.0, 0.0, 10.0});
  const RefPath line(pts);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 100.0);
  std::uniform_real_distribution<double> uy(-5.0, 5.0);
  int flips = 0;
  for (int i = 0; i < 10000; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    const Projection a = project(line, x, y);
    const Projection b = project(line, x, -y);
    if (a.d == -b.d && a.s_star == b.s_star) ++flips;
  }
  report(7, "numerical integrity",
         rk4_ratio >= kRk4RatioLo && rk4_ratio <= kRk4RatioHi && trap_ratio >= kTrapRatioLo &&
             trap_ratio <= kTrapRatioHi && flips == 10000,
         fmt("RK4 ratio %.3f in [12, 20], trapezoid ratio %.4f in [3.5, 4.5], exact sign flips "
             "%d/10000",
             rk4_ratio, trap_ratio, flips));
}

void criterion8() {
  const Scenario sc = scenario_with(
      {{"disturbance", {{"drag_step_time_s", kDragStepT}, {"drag_step_n", kDragStepN}}}});
  const RefPath path = build_path(sc);
  const RunResult r = run_in_process(sc, path);
  const double kp1 = sc.tracker.longitudinal.gains.kp;
  const double deadline = kDragStepT + 5.0 / kp1;
  const auto bps = breakpoint_times(path, r.trace);

  // Recovery: the last sample at or after the step whose error exceeds the
  // bound, ignoring speed-profile breakpoint windows, plus one period.
  double peak = 0.0;
  double recovered_at = kDragStepT;
  bool any_after_deadline = false;
  for (const TraceRow& row : r.trace) {
    if (row.t < kDragStepT || near_any(row.t, bps, kBreakpointWindowS)) continue;
    peak = std::max(peak, std::abs(row.e_v));
    if (std::abs(row.e_v) > kSpeedTol) recovered_at = row.t + sc.control_period;
    any_after_deadline = any_after_deadline || row.t > deadline;
  }
  const bool overlap = near_any(kDragStepT, bps, kBreakpointWindowS);
  report(8, "drag step rejection", recovered_at <= deadline && any_after_deadline,
         fmt("+%g N at %g s: peak |e_v| %.3f km/h, back below 0.2 km/h at %.2f s "
             "(deadline %.2f s = step + 5/kp1)%s",
             kDragStepN, kDragStepT, peak / kKmh, recovered_at, deadline,
             overlap ? ", step inside a breakpoint window" : ""));
}

template <typename F>
void guarded(int id, const char* name, F f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace
}  // namespace mfc

int main() {
  using namespace mfc;
  guarded(1, "estimator exactness", criterion1);
  guarded(2, "second-order annihilator", criterion2);
  guarded(3, "ideal error dynamics", criterion3);
  const Scenario mini = parse_scenario(default_scenario_json());
  const RefPath mini_path = build_path(mini);
  guarded(4, "speed tracking", [&] { criterion4(mini, mini_path); });
  guarded(5, "lateral tracking", [&] { criterion5(mini, mini_path); });
  guarded(6, "split-process equivalence", [&] { criterion6(mini, mini_path); });
  guarded(7, "numerical integrity", criterion7);
  guarded(8, "drag step rejection", criterion8);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
