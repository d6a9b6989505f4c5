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
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mfc {

class PathError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PathPoint {
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double curvature = 0.0;
  double v_ref = 0.0;
  // Recorded yaw from a track file, kept for reference only (NaN if absent).
  double psi_ref = std::numeric_limits<double>::quiet_NaN();
};

/// Reference path parameterized by arc length, interpolated linearly.
class RefPath {
 public:
  RefPath() = default;

  /// Throws PathError unless s starts at 0 and strictly increases, and every
  /// v_ref is positive.
  explicit RefPath(std::vector<PathPoint> points);

  const std::vector<PathPoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  double length() const { return points_.empty() ? 0.0 : points_.back().s; }

  /// Point interpolated at arc length s (clamped to the path); the heading is
  /// interpolated along the shortest angular arc.
  PathPoint at(double s) const;
  double v_ref_at(double s) const;

  /// Slope of the speed profile, by central differences on the point grid.
  double dv_ref_ds_at(double s) const;

  /// Arc lengths where the speed profile changes slope.
  std::vector<double> speed_breakpoints(double tol = 1e-6) const;

  /// Index i of the grid interval [s_i, s_i+1] containing s.
  std::size_t segment_index(double s) const;

 private:
  std::vector<PathPoint> points_;
  std::vector<double> dv_ds_;
};

/// Largest disagreement between the stored heading/curvature and central
/// finite differences of (x, y) / heading. Curvature error is relative to the
/// largest curvature magnitude on the path (absolute on straight paths).
struct ConsistencyReport {
  double heading_error = 0.0;    // rad
  double curvature_error = 0.0;  // relative
};
ConsistencyReport check_consistency(const RefPath& path);

struct Projection {
  double s_star = 0.0;
  double d = 0.0;  // signed lateral deviation, positive to the left
  double heading = 0.0;
  double distance = 0.0;
};

/**
 * Closest point on the polyline to (x, y).
 *
 * With a hint, searches the grid intervals within [hint - 10 m, hint + 30 m]
 * first and falls back to a global search when the local minimum sits on the
 * edge of that window. Throws PathError on an empty path.
 */
Projection project(const RefPath& path, double x, double y,
                   std::optional<double> hint_s = std::nullopt);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace mfc
