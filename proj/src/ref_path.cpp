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

#include "mfc/ref_path.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mfc {

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

RefPath::RefPath(std::vector<PathPoint> points) : points_(std::move(points)) {
  if (points_.empty()) return;
  if (points_.front().s != 0.0) throw PathError("path: arc length must start at 0");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const PathPoint& p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.heading) ||
        !std::isfinite(p.curvature)) {
      throw PathError("path: non-finite value at point " + std::to_string(i));
    }
    if (!(p.v_ref > 0.0)) {
      throw PathError("path: v_ref must be > 0 at point " + std::to_string(i));
    }
    if (i > 0 && !(p.s > points_[i - 1].s)) {
      throw PathError("path: arc length not strictly increasing at point " +
                      std::to_string(i));
    }
  }

  const std::size_t n = points_.size();
  dv_ds_.assign(n, 0.0);
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
      dv_ds_[i] = (points_[hi].v_ref - points_[lo].v_ref) /
                  (points_[hi].s - points_[lo].s);
    }
  }
}

std::size_t RefPath::segment_index(double s) const {
  if (points_.size() < 2) return 0;
  auto it = std::upper_bound(points_.begin(), points_.end(), s,
                             [](double v, const PathPoint& p) { return v < p.s; });
  std::size_t i = it == points_.begin() ? 0 : static_cast<std::size_t>(it - points_.begin()) - 1;
  return std::min(i, points_.size() - 2);
}

PathPoint RefPath::at(double s) const {
  if (points_.empty()) throw PathError("path: empty");
  if (points_.size() == 1) return points_.front();
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_index(s);
  const PathPoint& a = points_[i];
  const PathPoint& b = points_[i + 1];
  const double w = (s - a.s) / (b.s - a.s);
  PathPoint p;
  p.s = s;
  p.x = a.x + w * (b.x - a.x);
  p.y = a.y + w * (b.y - a.y);
  p.heading = wrap_angle(a.heading + w * wrap_angle(b.heading - a.heading));
  p.curvature = a.curvature + w * (b.curvature - a.curvature);
  p.v_ref = a.v_ref + w * (b.v_ref - a.v_ref);
  p.psi_ref = a.psi_ref + w * (b.psi_ref - a.psi_ref);
  return p;
}

double RefPath::v_ref_at(double s) const { return at(s).v_ref; }

double RefPath::dv_ref_ds_at(double s) const {
  if (points_.size() < 2) return 0.0;
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_index(s);
  const double w = (s - points_[i].s) / (points_[i + 1].s - points_[i].s);
  return dv_ds_[i] + w * (dv_ds_[i + 1] - dv_ds_[i]);
}

std::vector<double> RefPath::speed_breakpoints(double tol) const {
  std::vector<double> out;
  if (points_.size() < 3) return out;
  std::vector<double> kinks;
  double prev_slope = (points_[1].v_ref - points_[0].v_ref) / (points_[1].s - points_[0].s);
  for (std::size_t i = 1; i + 1 < points_.size(); ++i) {
    const double slope = (points_[i + 1].v_ref - points_[i].v_ref) /
                         (points_[i + 1].s - points_[i].s);
    if (std::abs(slope - prev_slope) > tol) kinks.push_back(points_[i].s);
    prev_slope = slope;
  }
  // A knot between grid points shows up as two adjacent kinks.
  const double spacing = length() / static_cast<double>(points_.size() - 1);
  for (std::size_t i = 0; i < kinks.size();) {
    std::size_t j = i + 1;
    while (j < kinks.size() && kinks[j] - kinks[j - 1] <= 1.5 * spacing) ++j;
    out.push_back(0.5 * (kinks[i] + kinks[j - 1]));
    i = j;
  }
  return out;
}

ConsistencyReport check_consistency(const RefPath& path) {
  ConsistencyReport r;
  const auto& p = path.points();
  if (p.size() < 3) return r;
  double k_scale = 0.0;
  for (const auto& q : p) k_scale = std::max(k_scale, std::abs(q.curvature));
  if (k_scale == 0.0) k_scale = 1.0;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const double h = std::atan2(p[i + 1].y - p[i - 1].y, p[i + 1].x - p[i - 1].x);
    r.heading_error = std::max(r.heading_error, std::abs(wrap_angle(h - p[i].heading)));
    const double k = wrap_angle(p[i + 1].heading - p[i - 1].heading) /
                     (p[i + 1].s - p[i - 1].s);
    r.curvature_error = std::max(r.curvature_error, std::abs(k - p[i].curvature) / k_scale);
  }
  return r;
}

namespace {

struct Candidate {
  double dist2 = std::numeric_limits<double>::infinity();
  std::size_t seg = 0;
  double w = 0.0;
};

Candidate closest_in(const std::vector<PathPoint>& p, std::size_t lo, std::size_t hi,
                     double x, double y) {
  Candidate best;
  for (std::size_t i = lo; i < hi; ++i) {
    const double ex = p[i + 1].x - p[i].x;
    const double ey = p[i + 1].y - p[i].y;
    const double len2 = ex * ex + ey * ey;
    double w = len2 > 0.0 ? ((x - p[i].x) * ex + (y - p[i].y) * ey) / len2 : 0.0;
    w = std::clamp(w, 0.0, 1.0);
    const double fx = p[i].x + w * ex - x;
    const double fy = p[i].y + w * ey - y;
    const double d2 = fx * fx + fy * fy;
    if (d2 < best.dist2) best = {d2, i, w};
  }
  return best;
}

}  // namespace

Projection project(const RefPath& path, double x, double y, std::optional<double> hint_s) {
  if (path.empty()) throw PathError("project: empty path");
  const auto& p = path.points();
  if (p.size() == 1) {
    return {0.0, 0.0, p[0].heading, std::hypot(x - p[0].x, y - p[0].y)};
  }
  const std::size_t n_seg = p.size() - 1;

  Candidate best;
  bool found = false;
  if (hint_s && *hint_s >= 0.0 && *hint_s <= path.length()) {
    constexpr double kBehind = 10.0;
    constexpr double kAhead = 30.0;
    const std::size_t lo = path.segment_index(*hint_s - kBehind);
    const std::size_t hi = std::min(n_seg, path.segment_index(*hint_s + kAhead) + 1);
    best = closest_in(p, lo, hi, x, y);
    const bool at_lo_edge = best.seg == lo && best.w == 0.0 && lo > 0;
    const bool at_hi_edge = best.seg + 1 == hi && best.w == 1.0 && hi < n_seg;
    found = !(at_lo_edge || at_hi_edge);
  }
  if (!found) best = closest_in(p, 0, n_seg, x, y);

  const PathPoint& a = p[best.seg];
  const PathPoint& b = p[best.seg + 1];
  const double ex = b.x - a.x;
  const double ey = b.y - a.y;
  const double len = std::hypot(ex, ey);
  const double fx = a.x + best.w * ex;
  const double fy = a.y + best.w * ey;

  Projection out;
  out.s_star = a.s + best.w * (b.s - a.s);
  out.d = len > 0.0 ? (ex * (y - fy) - ey * (x - fx)) / len : 0.0;
  out.heading = path.at(out.s_star).heading;
  out.distance = std::sqrt(best.dist2);
  return out;
}

}  // namespace mfc
