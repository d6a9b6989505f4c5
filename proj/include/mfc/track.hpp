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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "mfc/ref_path.hpp"

namespace mfc {

enum class Turn { kLeft, kRight };

struct StraightSegment {
  double length = 0.0;
};

struct ArcSegment {
  double radius = 0.0;
  double angle = 0.0;  // rad, > 0
  Turn direction = Turn::kLeft;
};

/// Curvature varies linearly from k_from to k_to (signed, left positive).
struct ClothoidSegment {
  double length = 0.0;
  double k_from = 0.0;
  double k_to = 0.0;
};

using TrackSegment = std::variant<StraightSegment, ArcSegment, ClothoidSegment>;

struct SpeedKnot {
  double s = 0.0;  // m
  double v = 0.0;  // m/s
};

struct TrackSpec {
  std::vector<TrackSegment> segments;
  std::vector<SpeedKnot> speed_profile;  // piecewise linear v_ref(s)
  double spacing = 0.5;                  // output grid, m

  /// Invalid lengths, radii, curvature jumps at clothoid ends, bad speed
  /// profile. Empty when valid.
  std::vector<std::string> violations() const;
};

struct GeneratedTrack {
  RefPath path;
  std::vector<std::string> warnings;
};

double segment_length(const TrackSegment& seg);

/// Integrates the heading ODE theta' = kappa(s) and the position with RK4 on
/// a grid of `spec.spacing`. Throws PathError on an invalid spec; curvature
/// jumps between non-clothoid segments are reported as warnings.
GeneratedTrack generate_track(const TrackSpec& spec);

/// Desk-scale test track with tight bends and 90/40/55 km/h speed zones.
TrackSpec satory_mini();

/// Variant of satory_mini with every radius >= 200 m.
TrackSpec satory_mini_gentle();

/// Straight track of constant reference speed.
TrackSpec straight_track(double length, double v);

class TrackFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Reads a track CSV with header `x_m,y_m,v_mps` (optional 4th column
 * `psi_rad`) and at least 10 rows, fits a cubic spline through the points and
 * resamples it at uniform arc length. Heading and curvature come from central
 * finite differences on the resampled polyline.
 *
 * Throws TrackFileError naming the row on any format problem.
 */
RefPath load_track(const std::filesystem::path& file, double spacing = 0.5);
RefPath load_track(std::istream& in, double spacing = 0.5);

/// Writes x_m,y_m,v_mps,psi_rad with round-trip precision.
void write_track_csv(const RefPath& path, std::ostream& out);

}  // namespace mfc
