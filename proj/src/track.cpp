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

#include "mfc/track.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

namespace mfc {
namespace {

constexpr double kCurvatureTol = 1e-9;

double start_curvature(const TrackSegment& seg) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, StraightSegment>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, ArcSegment>) {
          return (s.direction == Turn::kLeft ? 1.0 : -1.0) / s.radius;
        } else {
          return s.k_from;
        }
      },
      seg);
}

double end_curvature(const TrackSegment& seg) {
  if (const auto* c = std::get_if<ClothoidSegment>(&seg)) return c->k_to;
  return start_curvature(seg);
}

/// Curvature at local arc length u within the segment.
double curvature_in(const TrackSegment& seg, double u) {
  if (const auto* c = std::get_if<ClothoidSegment>(&seg)) {
    return c->k_from + (c->k_to - c->k_from) * (u / c->length);
  }
  return start_curvature(seg);
}

double interp_speed(const std::vector<SpeedKnot>& knots, double s) {
  if (s <= knots.front().s) return knots.front().v;
  if (s >= knots.back().s) return knots.back().v;
  auto it = std::upper_bound(knots.begin(), knots.end(), s,
                             [](double v, const SpeedKnot& k) { return v < k.s; });
  const SpeedKnot& b = *it;
  const SpeedKnot& a = *(it - 1);
  return a.v + (b.v - a.v) * (s - a.s) / (b.s - a.s);
}

// Uniform grid over [0, total] whose last node is exactly `total`.
std::vector<double> uniform_grid(double total, double spacing) {
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor(total / spacing + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) * spacing);
  if (total - grid.back() > 1e-3 * spacing) {
    grid.push_back(total);
  } else {
    grid.back() = total;
  }
  return grid;
}

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

Pose rk4_pose(const Pose& p, const TrackSegment& seg, double u, double h) {
  auto f = [&seg](const Pose& q, double uu) {
    return Pose{std::cos(q.theta), std::sin(q.theta), curvature_in(seg, uu)};
  };
  auto add = [](const Pose& q, const Pose& k, double w) {
    return Pose{q.x + w * k.x, q.y + w * k.y, q.theta + w * k.theta};
  };
  const Pose k1 = f(p, u);
  const Pose k2 = f(add(p, k1, 0.5 * h), u + 0.5 * h);
  const Pose k3 = f(add(p, k2, 0.5 * h), u + 0.5 * h);
  const Pose k4 = f(add(p, k3, h), u + h);
  return {p.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          p.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
          p.theta + h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta)};
}

class SpecBuilder {
 public:
  void add(TrackSegment seg, std::optional<double> v) {
    const double len = segment_length(seg);
    if (v) {
      knot(s_, *v);
      knot(s_ + len, *v);
    }
    s_ += len;
    spec_.segments.push_back(seg);
  }
  TrackSpec build() { return spec_; }

 private:
  void knot(double s, double v) {
    auto& k = spec_.speed_profile;
    if (!k.empty() && std::abs(k.back().s - s) < 1e-12) return;
    k.push_back({s, v});
  }
  TrackSpec spec_;
  double s_ = 0.0;
};

constexpr double kmh(double v) { return v / 3.6; }
constexpr double deg(double a) { return a * std::numbers::pi / 180.0; }

}  // namespace

double segment_length(const TrackSegment& seg) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ArcSegment>) {
          return s.radius * s.angle;
        } else {
          return s.length;
        }
      },
      seg);
}

std::vector<std::string> TrackSpec::violations() const {
  std::vector<std::string> out;
  if (segments.empty()) out.push_back("track: no segments");
  if (!(spacing > 0.0)) out.push_back("track: spacing must be > 0");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::string where = "track segment " + std::to_string(i);
    const TrackSegment& seg = segments[i];
    if (const auto* s = std::get_if<StraightSegment>(&seg)) {
      if (!(s->length > 0.0)) out.push_back(where + ": length must be > 0");
    } else if (const auto* a = std::get_if<ArcSegment>(&seg)) {
      if (!(a->radius > 0.0)) out.push_back(where + ": radius must be > 0");
      if (!(a->angle > 0.0)) out.push_back(where + ": angle must be > 0");
    } else if (const auto* c = std::get_if<ClothoidSegment>(&seg)) {
      if (!(c->length > 0.0)) out.push_back(where + ": length must be > 0");
      if (i > 0 && std::abs(end_curvature(segments[i - 1]) - c->k_from) > kCurvatureTol) {
        out.push_back(where + ": clothoid start curvature does not match previous segment");
      }
      if (i + 1 < segments.size() &&
          !std::holds_alternative<ClothoidSegment>(segments[i + 1]) &&
          std::abs(start_curvature(segments[i + 1]) - c->k_to) > kCurvatureTol) {
        out.push_back(where + ": clothoid end curvature does not match next segment");
      }
    }
  }
  if (speed_profile.empty()) out.push_back("track: empty speed profile");
  for (std::size_t i = 0; i < speed_profile.size(); ++i) {
    if (!(speed_profile[i].v > 0.0)) {
      out.push_back("track: speed knot " + std::to_string(i) + " must have v > 0");
    }
    if (i > 0 && !(speed_profile[i].s > speed_profile[i - 1].s)) {
      out.push_back("track: speed knots must have increasing s (knot " +
                    std::to_string(i) + ")");
    }
  }
  return out;
}

GeneratedTrack generate_track(const TrackSpec& spec) {
  const auto problems = spec.violations();
  if (!problems.empty()) {
    std::string msg = "invalid track spec:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw PathError(msg);
  }

  GeneratedTrack out;
  const std::size_t n_seg = spec.segments.size();
  std::vector<double> seg_start(n_seg + 1, 0.0);
  for (std::size_t k = 0; k < n_seg; ++k) {
    seg_start[k + 1] = seg_start[k] + segment_length(spec.segments[k]);
    if (k + 1 < n_seg) {
      const TrackSegment& a = spec.segments[k];
      const TrackSegment& b = spec.segments[k + 1];
      if (!std::holds_alternative<ClothoidSegment>(a) &&
          !std::holds_alternative<ClothoidSegment>(b) &&
          std::abs(end_curvature(a) - start_curvature(b)) > kCurvatureTol) {
        out.warnings.push_back("curvature jump between segments " + std::to_string(k) +
                               " and " + std::to_string(k + 1) + " at s = " +
                               std::to_string(seg_start[k + 1]));
      }
    }
  }
  const double total = seg_start[n_seg];
  const std::vector<double> grid = uniform_grid(total, spec.spacing);

  auto segment_at = [&](double s) {
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(seg_start.begin(), seg_start.end(), s) - seg_start.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, n_seg - 1);
  };

  constexpr double kMaxStep = 0.1;
  std::vector<PathPoint> points;
  points.reserve(grid.size());
  Pose pose;
  double cur = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double target = grid[i];
    while (cur < target) {
      const std::size_t k = segment_at(cur);
      const double end = std::min(target, seg_start[k + 1]);
      if (end <= cur) {
        // cur sits on a boundary that upper_bound attributed to segment k.
        cur = seg_start[k + 1];
        continue;
      }
      const int m = std::max(1, static_cast<int>(std::ceil((end - cur) / kMaxStep)));
      const double h = (end - cur) / m;
      for (int j = 0; j < m; ++j) {
        pose = rk4_pose(pose, spec.segments[k], cur - seg_start[k] + j * h, h);
      }
      cur = end;
    }
    const std::size_t k = segment_at(target);
    PathPoint p;
    p.s = target;
    p.x = pose.x;
    p.y = pose.y;
    p.heading = wrap_angle(pose.theta);
    p.curvature = curvature_in(spec.segments[k], target - seg_start[k]);
    p.v_ref = interp_speed(spec.speed_profile, target);
    points.push_back(p);
  }
  out.path = RefPath(std::move(points));
  return out;
}

TrackSpec satory_mini() {
  constexpr double kStraight = kmh(90.0);
  SpecBuilder b;
  b.add(StraightSegment{200.0}, kStraight);
  b.add(ClothoidSegment{40.0, 0.0, 1.0 / 50.0}, std::nullopt);
  b.add(ArcSegment{50.0, deg(90.0), Turn::kLeft}, kmh(40.0));
  b.add(ClothoidSegment{40.0, 1.0 / 50.0, 0.0}, std::nullopt);
  b.add(StraightSegment{150.0}, kStraight);
  b.add(ClothoidSegment{40.0, 0.0, -1.0 / 80.0}, std::nullopt);
  b.add(ArcSegment{80.0, deg(120.0), Turn::kRight}, kmh(55.0));
  b.add(ClothoidSegment{40.0, -1.0 / 80.0, 0.0}, std::nullopt);
  b.add(StraightSegment{2000.0}, kStraight);
  return b.build();
}

TrackSpec satory_mini_gentle() {
  constexpr double kStraight = kmh(72.0);
  constexpr double kArc = kmh(60.0);
  SpecBuilder b;
  b.add(StraightSegment{150.0}, kStraight);
  b.add(ClothoidSegment{60.0, 0.0, 1.0 / 250.0}, std::nullopt);
  b.add(ArcSegment{250.0, deg(45.0), Turn::kLeft}, kArc);
  b.add(ClothoidSegment{60.0, 1.0 / 250.0, 0.0}, std::nullopt);
  b.add(StraightSegment{150.0}, kStraight);
  b.add(ClothoidSegment{60.0, 0.0, -1.0 / 200.0}, std::nullopt);
  b.add(ArcSegment{200.0, deg(60.0), Turn::kRight}, kArc);
  b.add(ClothoidSegment{60.0, -1.0 / 200.0, 0.0}, std::nullopt);
  b.add(StraightSegment{1600.0}, kStraight);
  return b.build();
}

TrackSpec straight_track(double length, double v) {
  SpecBuilder b;
  b.add(StraightSegment{length}, v);
  return b.build();
}

// ---------------------------------------------------------------------------
// CSV loading

namespace {

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

// Cubic spline with end slopes taken from the parabola through the first and
// last three nodes.
class Spline {
 public:
  Spline(std::vector<double> u, std::vector<double> f) : u_(std::move(u)), f_(std::move(f)) {
    const std::size_t n = u_.size() - 1;
    std::vector<double> h(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = u_[i + 1] - u_[i];
      d[i] = (f_[i + 1] - f_[i]) / h[i];
    }
    const double s0 = d[0] - h[0] * (d[1] - d[0]) / (h[0] + h[1]);
    const double sn = d[n - 1] + h[n - 1] * (d[n - 1] - d[n - 2]) / (h[n - 2] + h[n - 1]);

    std::vector<double> a(n + 1), b(n + 1), c(n + 1), r(n + 1);
    b[0] = 2.0 * h[0];
    c[0] = h[0];
    r[0] = 6.0 * (d[0] - s0);
    for (std::size_t i = 1; i < n; ++i) {
      a[i] = h[i - 1];
      b[i] = 2.0 * (h[i - 1] + h[i]);
      c[i] = h[i];
      r[i] = 6.0 * (d[i] - d[i - 1]);
    }
    a[n] = h[n - 1];
    b[n] = 2.0 * h[n - 1];
    r[n] = 6.0 * (sn - d[n - 1]);

    // Thomas algorithm.
    for (std::size_t i = 1; i <= n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      r[i] -= w * r[i - 1];
    }
    m_.assign(n + 1, 0.0);
    m_[n] = r[n] / b[n];
    for (std::size_t i = n; i-- > 0;) m_[i] = (r[i] - c[i] * m_[i + 1]) / b[i];
  }

  double operator()(double u) const {
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(u_.begin(), u_.end(), u) - u_.begin());
    i = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, u_.size() - 2);
    const double h = u_[i + 1] - u_[i];
    const double A = (u_[i + 1] - u) / h;
    const double B = (u - u_[i]) / h;
    return A * f_[i] + B * f_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> u_;
  std::vector<double> f_;
  std::vector<double> m_;
};

double lerp_rows(const std::vector<double>& u, const std::vector<double>& f, double x) {
  std::size_t i = static_cast<std::size_t>(std::upper_bound(u.begin(), u.end(), x) - u.begin());
  i = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, u.size() - 2);
  const double w = (x - u[i]) / (u[i + 1] - u[i]);
  return f[i] + w * (f[i + 1] - f[i]);
}

}  // namespace

RefPath load_track(const std::filesystem::path& file, double spacing) {
  std::ifstream in(file);
  if (!in) throw TrackFileError("cannot open track file: " + file.string());
  try {
    return load_track(in, spacing);
  } catch (const TrackFileError& e) {
    throw TrackFileError(file.string() + ": " + e.what());
  }
}

RefPath load_track(std::istream& in, double spacing) {
  if (!(spacing > 0.0)) throw TrackFileError("resampling spacing must be > 0");
  std::string line;
  if (!std::getline(in, line)) throw TrackFileError("line 1: missing header");
  line = trim(line);
  bool has_psi = false;
  if (line == "x_m,y_m,v_mps,psi_rad") {
    has_psi = true;
  } else if (line != "x_m,y_m,v_mps") {
    throw TrackFileError("line 1: header must be x_m,y_m,v_mps[,psi_rad], got '" + line + "'");
  }
  const std::size_t n_cols = has_psi ? 4 : 3;

  std::vector<double> xs, ys, vs, psis;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != n_cols) {
      throw TrackFileError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(n_cols) + " columns, got " +
                           std::to_string(cells.size()));
    }
    double vals[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t c = 0; c < n_cols; ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) {
        throw TrackFileError("line " + std::to_string(line_no) + ": non-numeric cell '" +
                             cells[c] + "'");
      }
      vals[c] = *v;
    }
    if (!(vals[2] > 0.0)) {
      throw TrackFileError("line " + std::to_string(line_no) + ": v_mps must be > 0");
    }
    if (!xs.empty() && xs.back() == vals[0] && ys.back() == vals[1]) {
      throw TrackFileError("line " + std::to_string(line_no) +
                           ": duplicate of the previous point");
    }
    xs.push_back(vals[0]);
    ys.push_back(vals[1]);
    vs.push_back(vals[2]);
    psis.push_back(has_psi ? vals[3] : std::numeric_limits<double>::quiet_NaN());
  }
  if (xs.size() < 10) {
    throw TrackFileError("need at least 10 rows, got " + std::to_string(xs.size()));
  }

  // Chord-length parameterization.
  std::vector<double> u(xs.size(), 0.0);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    u[i] = u[i - 1] + std::hypot(xs[i] - xs[i - 1], ys[i] - ys[i - 1]);
  }
  const Spline sx(u, xs);
  const Spline sy(u, ys);

  // Arc-length table on a dense sampling of the spline.
  constexpr int kSub = 16;
  std::vector<double> table_u{0.0};
  std::vector<double> table_s{0.0};
  double px = sx(0.0);
  double py = sy(0.0);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    for (int j = 1; j <= kSub; ++j) {
      const double uu = u[i] + (u[i + 1] - u[i]) * j / kSub;
      const double qx = sx(uu);
      const double qy = sy(uu);
      table_u.push_back(uu);
      table_s.push_back(table_s.back() + std::hypot(qx - px, qy - py));
      px = qx;
      py = qy;
    }
  }

  const std::vector<double> grid = uniform_grid(table_s.back(), spacing);
  std::vector<PathPoint> pts(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double uu = lerp_rows(table_s, table_u, grid[k]);
    pts[k].s = grid[k];
    pts[k].x = sx(uu);
    pts[k].y = sy(uu);
    pts[k].v_ref = lerp_rows(u, vs, uu);
    pts[k].psi_ref = has_psi ? lerp_rows(u, psis, uu) : std::numeric_limits<double>::quiet_NaN();
  }

  const std::size_t n = pts.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 == n ? n - 1 : k + 1;
    pts[k].heading = std::atan2(pts[hi].y - pts[lo].y, pts[hi].x - pts[lo].x);
  }
  // Signed three-point (Menger) curvature.
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double ax = pts[k].x - pts[k - 1].x, ay = pts[k].y - pts[k - 1].y;
    const double bx = pts[k + 1].x - pts[k].x, by = pts[k + 1].y - pts[k].y;
    const double cx = pts[k + 1].x - pts[k - 1].x, cy = pts[k + 1].y - pts[k - 1].y;
    const double denom = std::hypot(ax, ay) * std::hypot(bx, by) * std::hypot(cx, cy);
    pts[k].curvature = denom > 0.0 ? 2.0 * (ax * by - ay * bx) / denom : 0.0;
  }
  if (n >= 3) {
    pts[0].curvature = pts[1].curvature;
    pts[n - 1].curvature = pts[n - 2].curvature;
  }
  return RefPath(std::move(pts));
}

void write_track_csv(const RefPath& path, std::ostream& out) {
  out << "x_m,y_m,v_mps,psi_rad\n";
  char buf[128];
  for (const PathPoint& p : path.points()) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", p.x, p.y, p.v_ref, p.heading);
    out << buf;
  }
}

}  // namespace mfc
