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

#include "mfc/f_estimator.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mfc {
namespace {

// Slack on timestamp comparisons so that uniform grids built as k * dt land
// exactly on the window boundary.
double time_slack(double tau) { return 1e-9 * tau; }

}  // namespace

SampleWindow::SampleWindow(double tau, std::size_t capacity)
    : tau_(tau), capacity_(capacity) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("sample window: tau must be > 0");
  }
  if (capacity < 2) {
    throw std::invalid_argument("sample window: capacity must be >= 2");
  }
}

void SampleWindow::push(double t, double y, double u) {
  if (!samples_.empty() && !(t > samples_.back().t)) {
    throw TimestampError("sample window: timestamp " + std::to_string(t) +
                         " not after " + std::to_string(samples_.back().t));
  }
  samples_.push_back({t, y, u});

  const double cutoff = t - tau_ + time_slack(tau_);
  while (samples_.size() >= 2 && samples_[1].t <= cutoff) {
    samples_.pop_front();
  }
  while (samples_.size() > capacity_) samples_.pop_front();
}

double SampleWindow::span() const {
  return samples_.size() < 2 ? 0.0 : samples_.back().t - samples_.front().t;
}

bool SampleWindow::covers(double tau) const {
  return samples_.size() >= kMinSamples && span() >= tau - time_slack(tau);
}

void EstimatorConfig::validate() const {
  if (nu != 1 && nu != 2) throw std::invalid_argument("estimator: nu must be 1 or 2");
  if (!std::isfinite(alpha) || alpha == 0.0) {
    throw std::invalid_argument("estimator: alpha must be finite and nonzero");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("estimator: tau must be > 0");
  }
}

double trapezoid(std::span<const double> t, std::span<const double> f) {
  if (t.size() != f.size()) {
    throw std::invalid_argument("trapezoid: size mismatch");
  }
  if (t.size() < 2) throw std::invalid_argument("trapezoid: need >= 2 nodes");
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    sum += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
  }
  return sum;
}

double integrate_window(
    const SampleWindow& window, double tau,
    const std::function<double(double, double, double)>& kernel, QuadratureRule rule) {
  const auto& samples = window.samples();
  if (samples.size() < 2) throw std::invalid_argument("integrate_window: need >= 2 samples");

  const double t_start = samples.back().t - tau;
  std::vector<Sample> nodes;  // t holds sigma
  nodes.reserve(samples.size());
  std::size_t first = 0;
  const Sample& s0 = samples[0];
  if (s0.t < t_start && samples[1].t > t_start) {
    const Sample& s1 = samples[1];
    const double w = (t_start - s0.t) / (s1.t - s0.t);
    nodes.push_back({0.0, s0.y + w * (s1.y - s0.y), s0.u + w * (s1.u - s0.u)});
    first = 1;
  }
  for (std::size_t i = first; i < samples.size(); ++i) {
    nodes.push_back({samples[i].t - t_start, samples[i].y, samples[i].u});
  }

  if (rule == QuadratureRule::kTrapezoid) {
    std::vector<double> sigma;
    std::vector<double> f;
    sigma.reserve(nodes.size());
    f.reserve(nodes.size());
    for (const Sample& n : nodes) {
      sigma.push_back(n.t);
      f.push_back(kernel(n.t, n.y, n.u));
    }
    return trapezoid(sigma, f);
  }

  static const double kNode = std::sqrt(0.6);
  static constexpr double kOuter = 5.0 / 9.0;
  static constexpr double kInner = 8.0 / 9.0;
  double sum = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const Sample& a = nodes[i - 1];
    const Sample& b = nodes[i];
    const double half = 0.5 * (b.t - a.t);
    const auto at = [&](double x) {  // x in [-1, 1]
      const double w = 0.5 * (x + 1.0);
      return kernel(a.t + half * (x + 1.0), a.y + w * (b.y - a.y), a.u + w * (b.u - a.u));
    };
    sum += half * (kOuter * (at(-kNode) + at(kNode)) + kInner * at(0.0));
  }
  return sum;
}

std::optional<double> estimate_f_order1(const SampleWindow& window, double alpha,
                                        double tau, QuadratureRule rule) {
  if (alpha == 0.0) throw std::invalid_argument("estimator: alpha must be nonzero");
  if (!window.covers(tau)) return std::nullopt;
  const double integral =
      integrate_window(window, tau, [tau, alpha](double s, double y, double u) {
        return (tau - 2.0 * s) * y + alpha * s * (tau - s) * u;
      }, rule);
  return -6.0 / (tau * tau * tau) * integral;
}

std::optional<double> estimate_f_order2(const SampleWindow& window, double alpha,
                                        double tau, QuadratureRule rule) {
  if (alpha == 0.0) throw std::invalid_argument("estimator: alpha must be nonzero");
  if (!window.covers(tau)) return std::nullopt;
  const double integral =
      integrate_window(window, tau, [tau, alpha](double s, double y, double u) {
        const double r = tau - s;
        return (tau * tau - 6.0 * tau * s + 6.0 * s * s) * y -
               0.5 * alpha * s * s * r * r * u;
      }, rule);
  const double tau2 = tau * tau;
  return 60.0 / (tau2 * tau2 * tau) * integral;
}

std::optional<double> estimate_f(const SampleWindow& window,
                                 const EstimatorConfig& config) {
  return config.nu == 1
             ? estimate_f_order1(window, config.alpha, config.tau, config.quadrature)
             : estimate_f_order2(window, config.alpha, config.tau, config.quadrature);
}

}  // namespace mfc
