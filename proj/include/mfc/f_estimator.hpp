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

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>

namespace mfc {

/// Raised when a sample is pushed with a timestamp not after the last one.
class TimestampError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Sample {
  double t = 0.0;
  double y = 0.0;
  double u = 0.0;
};

/**
 * Sliding window of (t, y, u) samples feeding the algebraic estimator.
 *
 * Keeps at most one sample at or before t_latest - tau, so that a full window
 * covers [t_latest - tau, t_latest] and spans less than tau plus one sample
 * period.
 */
class SampleWindow {
 public:
  explicit SampleWindow(double tau, std::size_t capacity = 4096);

  /// Appends a sample and evicts stale ones. Throws TimestampError if t is not
  /// strictly greater than the last stored timestamp.
  void push(double t, double y, double u);

  void clear() { samples_.clear(); }

  double tau() const { return tau_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double span() const;
  const std::deque<Sample>& samples() const { return samples_; }

  /// True once the window covers tau and holds enough samples to estimate.
  bool ready() const { return covers(tau_); }

  /// True when the window holds enough samples and spans at least `tau`.
  bool covers(double tau) const;

  static constexpr std::size_t kMinSamples = 8;

 private:
  double tau_;
  std::size_t capacity_;
  std::deque<Sample> samples_;
};

enum class QuadratureRule {
  // Composite trapezoid with the kernel evaluated at the sample times.
  kTrapezoid,
  // Kernel integrated exactly against the piecewise-linear interpolant of the
  // samples (3-point Gauss-Legendre per interval). Exact whenever y and u are
  // affine in time; second order otherwise.
  kPiecewiseLinear,
};

struct EstimatorConfig {
  int nu = 1;
  double alpha = 1.0;
  double tau = 0.5;
  QuadratureRule quadrature = QuadratureRule::kPiecewiseLinear;

  void validate() const;
};

/// Composite trapezoid rule on a possibly non-uniform grid.
double trapezoid(std::span<const double> t, std::span<const double> f);

/**
 * Integrates kernel(sigma, y, u) over the last tau seconds of the window,
 * with sigma the window-local time in [0, tau]. A sample older than the
 * window start is replaced by the linear interpolation at sigma = 0.
 */
double integrate_window(
    const SampleWindow& window, double tau,
    const std::function<double(double sigma, double y, double u)>& kernel,
    QuadratureRule rule = QuadratureRule::kPiecewiseLinear);

/**
 * First-order estimate
 *   F = -(6/tau^3) * int_0^tau [(tau - 2s) y(s) + alpha s (tau - s) u(s)] ds.
 *
 * Returns std::nullopt while the window is warming up.
 */
std::optional<double> estimate_f_order1(
    const SampleWindow& window, double alpha, double tau,
    QuadratureRule rule = QuadratureRule::kPiecewiseLinear);

/**
 * Second-order estimate, obtained by annihilating y(0) and y'(0) with
 * d^2/ds^2 and smoothing with s^-3:
 *   F = (60/tau^5) * int_0^tau [(tau^2 - 6 tau s + 6 s^2) y(s)
 *                               - (alpha/2) s^2 (tau - s)^2 u(s)] ds.
 */
std::optional<double> estimate_f_order2(
    const SampleWindow& window, double alpha, double tau,
    QuadratureRule rule = QuadratureRule::kPiecewiseLinear);

/// Dispatches on config.nu.
std::optional<double> estimate_f(const SampleWindow& window,
                                 const EstimatorConfig& config);

}  // namespace mfc
