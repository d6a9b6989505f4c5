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

#include "mfc/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mfc {
namespace {

using nlohmann::json;

std::string join_problems(const std::vector<std::string>& problems) {
  std::string msg = "invalid scenario:";
  for (const auto& p : problems) msg += "\n  - " + p;
  return msg;
}

/// Typed access to one JSON object that records type errors and unknown keys.
class Fields {
 public:
  Fields(const json* obj, std::string prefix, std::vector<std::string>& errors)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {
    if (obj_ != nullptr && !obj_->is_object()) {
      errors_.push_back(name("") + " must be an object");
      obj_ = nullptr;
    }
  }

  double num(const char* key, double def) { return opt_num(key).value_or(def); }

  std::optional<double> opt_num(const char* key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) {
      errors_.push_back(name(key) + " must be a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      errors_.push_back(name(key) + " must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::string> opt_str(const char* key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) {
      errors_.push_back(name(key) + " must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::uint64_t> opt_uint(const char* key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
      errors_.push_back(name(key) + " must be a non-negative integer");
      return std::nullopt;
    }
    return v->get<std::uint64_t>();
  }

  const json* sub(const char* key) { return find(key); }

  /// Reports keys that were never asked for.
  void done() {
    if (obj_ == nullptr) return;
    for (const auto& [k, v] : obj_->items()) {
      if (!seen_.count(k)) errors_.push_back(name(k) + ": unknown key");
    }
  }

  std::string name(const std::string& key) const {
    if (prefix_.empty()) return key;
    return key.empty() ? prefix_ : prefix_ + "." + key;
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    if (obj_ == nullptr) return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }

  const json* obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void read_loop(Fields f, LoopConfig& loop, int nu, std::vector<std::string>& errors) {
  loop.model.nu = nu;
  loop.model.alpha = f.num("alpha", loop.model.alpha);
  loop.gains.kp = f.num("kp", loop.gains.kp);
  loop.gains.ki = f.num("ki", loop.gains.ki);
  loop.gains.kd = f.num("kd", loop.gains.kd);
  loop.tau = f.num("tau", loop.tau);
  if (auto b = f.opt_num("integral_bound")) loop.integral_bound = *b;
  if (auto q = f.opt_str("quadrature")) {
    if (*q == "trapezoid") {
      loop.quadrature = QuadratureRule::kTrapezoid;
    } else if (*q == "piecewise_linear") {
      loop.quadrature = QuadratureRule::kPiecewiseLinear;
    } else {
      errors.push_back(f.name("quadrature") + " must be trapezoid or piecewise_linear");
    }
  }
  f.done();

  if (loop.model.alpha == 0.0) errors.push_back(f.name("alpha") + " must be nonzero");
  if (!(loop.gains.kp > 0.0)) errors.push_back(f.name("kp") + " must be > 0");
  if (!(loop.gains.ki >= 0.0)) errors.push_back(f.name("ki") + " must be >= 0");
  if (!(loop.gains.kd >= 0.0)) errors.push_back(f.name("kd") + " must be >= 0");
  if (nu == 1 && loop.gains.kd != 0.0) {
    errors.push_back(f.name("kd") + " must be 0 on the first-order loop");
  }
  if (!(loop.tau > 0.0)) errors.push_back(f.name("tau") + " must be > 0");
  if (loop.integral_bound && !(*loop.integral_bound > 0.0)) {
    errors.push_back(f.name("integral_bound") + " must be > 0");
  }
}

std::optional<TrackSegment> read_segment(const json& j, const std::string& where,
                                         std::vector<std::string>& errors) {
  Fields f(&j, where, errors);
  const auto type = f.opt_str("type");
  std::optional<TrackSegment> out;
  if (!type) {
    errors.push_back(where + ".type is required");
  } else if (*type == "straight") {
    out = StraightSegment{f.num("length", 0.0)};
  } else if (*type == "arc") {
    ArcSegment a;
    a.radius = f.num("radius", 0.0);
    a.angle = f.num("angle", 0.0);
    const auto dir = f.opt_str("direction").value_or("left");
    if (dir == "left") {
      a.direction = Turn::kLeft;
    } else if (dir == "right") {
      a.direction = Turn::kRight;
    } else {
      errors.push_back(where + ".direction must be left or right");
    }
    out = a;
  } else if (*type == "clothoid") {
    out = ClothoidSegment{f.num("length", 0.0), f.num("k_from", 0.0), f.num("k_to", 0.0)};
  } else {
    errors.push_back(where + ".type '" + *type + "' is not straight, arc or clothoid");
  }
  f.done();
  return out;
}

void read_track(Fields f, TrackSource& track, const std::filesystem::path& base_dir,
                std::vector<std::string>& errors) {
  const auto preset = f.opt_str("preset");
  const auto file = f.opt_str("file");
  const json* segments = f.sub("segments");
  const json* profile = f.sub("speed_profile");
  track.spacing = f.num("spacing", track.spacing);
  f.done();
  if (!(track.spacing > 0.0)) errors.push_back("track.spacing must be > 0");

  const int sources = (preset ? 1 : 0) + (file ? 1 : 0) + (segments ? 1 : 0);
  if (sources > 1) {
    errors.push_back("track: give exactly one of preset, file, segments");
    return;
  }
  if (file) {
    track.kind = TrackSource::Kind::kFile;
    track.file = base_dir.empty() ? std::filesystem::path(*file) : base_dir / *file;
    if (!std::filesystem::is_regular_file(track.file)) {
      errors.push_back("track.file not found: " + track.file.string());
    }
  } else if (segments) {
    track.kind = TrackSource::Kind::kSegments;
    track.spec = TrackSpec{};
    track.spec.spacing = track.spacing;
    if (!segments->is_array()) {
      errors.push_back("track.segments must be an array");
    } else {
      for (std::size_t i = 0; i < segments->size(); ++i) {
        auto seg = read_segment((*segments)[i], "track.segments[" + std::to_string(i) + "]",
                                errors);
        if (seg) track.spec.segments.push_back(*seg);
      }
    }
    if (profile == nullptr || !profile->is_array()) {
      errors.push_back("track.speed_profile must be an array of {s, v}");
    } else {
      for (std::size_t i = 0; i < profile->size(); ++i) {
        Fields k(&(*profile)[i], "track.speed_profile[" + std::to_string(i) + "]", errors);
        track.spec.speed_profile.push_back({k.num("s", 0.0), k.num("v", 0.0)});
        k.done();
      }
    }
    for (const auto& v : track.spec.violations()) errors.push_back(v);
  } else {
    track.kind = TrackSource::Kind::kPreset;
    track.preset = preset.value_or("satory-mini");
    if (track.preset != "satory-mini" && track.preset != "satory-mini-gentle") {
      errors.push_back("track.preset '" + track.preset +
                       "' is not satory-mini or satory-mini-gentle");
    }
  }
  if (profile != nullptr && segments == nullptr) {
    errors.push_back("track.speed_profile is only valid with track.segments");
  }
}

std::optional<std::int64_t> to_micros(double seconds) {
  const double us = seconds * 1e6;
  const double r = std::round(us);
  if (std::abs(us - r) > 1e-6 * std::max(1.0, std::abs(us))) return std::nullopt;
  return static_cast<std::int64_t>(r);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

std::int64_t Scenario::period_us() const { return to_micros(control_period).value_or(0); }
std::int64_t Scenario::substep_us() const { return to_micros(plant_substep).value_or(0); }

double Scenario::warmup_exclusion() const {
  if (metrics_warmup) return *metrics_warmup;
  return std::max(tracker.longitudinal.tau, tracker.lateral.tau) + 1.0;
}

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  std::vector<std::string> errors;
  Scenario sc;
  if (!doc.is_object()) throw ScenarioError({"scenario must be a JSON object"});

  Fields top(&doc, "", errors);

  {
    Fields v(top.sub("vehicle"), "vehicle", errors);
    VehicleParams& p = sc.vehicle;
    p.m = v.num("m", p.m);
    p.iz = v.num("iz", p.iz);
    p.lf = v.num("lf", p.lf);
    p.lr = v.num("lr", p.lr);
    p.cf = v.num("cf", p.cf);
    p.cr = v.num("cr", p.cr);
    p.rw = v.num("rw", p.rw);
    p.f0 = v.num("f0", p.f0);
    p.f2 = v.num("f2", p.f2);
    p.g = v.num("g", p.g);
    p.v_eps = v.num("v_eps", p.v_eps);
    p.limits.t_max = v.num("t_max", p.limits.t_max);
    p.limits.delta_max = v.num("delta_max", p.limits.delta_max);
    p.limits.torque_rate = v.num("torque_rate", p.limits.torque_rate);
    p.limits.delta_rate = v.num("delta_rate", p.limits.delta_rate);
    v.done();
    for (auto& e : p.violations()) errors.push_back(e);
  }

  read_loop(Fields(top.sub("longitudinal"), "longitudinal", errors), sc.tracker.longitudinal, 1,
            errors);
  read_loop(Fields(top.sub("lateral"), "lateral", errors), sc.tracker.lateral, 2, errors);
  sc.tracker.derivative_cutoff_hz =
      top.num("derivative_cutoff_hz", sc.tracker.derivative_cutoff_hz);
  if (!(sc.tracker.derivative_cutoff_hz > 0.0)) {
    errors.push_back("derivative_cutoff_hz must be > 0");
  }
  sc.tracker.lateral_offset_ref = top.num("lateral_offset_ref_m", 0.0);

  sc.control_period = top.num("control_period_s", sc.control_period);
  sc.plant_substep = top.num("plant_substep_s", sc.plant_substep);
  sc.horizon = top.num("horizon_s", sc.horizon);
  sc.metrics_warmup = top.opt_num("metrics_warmup_s");
  if (auto seed = top.opt_uint("seed")) sc.seed = *seed;
  if (auto out = top.opt_str("output_dir")) sc.output_dir = *out;

  const auto period_us = to_micros(sc.control_period);
  const auto substep_us = to_micros(sc.plant_substep);
  if (!(sc.control_period > 0.0) || !period_us || *period_us <= 0) {
    errors.push_back("control_period_s must be a positive whole number of microseconds");
  }
  if (!(sc.plant_substep > 0.0) || !substep_us || *substep_us <= 0) {
    errors.push_back("plant_substep_s must be a positive whole number of microseconds");
  }
  if (period_us && substep_us && *period_us > 0 && *substep_us > 0 &&
      *period_us % *substep_us != 0) {
    errors.push_back("control_period_s must be an integer multiple of plant_substep_s");
  }
  if (sc.metrics_warmup && !(*sc.metrics_warmup >= 0.0)) {
    errors.push_back("metrics_warmup_s must be >= 0");
  }
  if (!(sc.horizon > sc.warmup_exclusion())) {
    errors.push_back("horizon_s must exceed the metrics warm-up (" +
                     std::to_string(sc.warmup_exclusion()) + " s)");
  }

  read_track(Fields(top.sub("track"), "track", errors), sc.track, base_dir, errors);

  {
    Fields n(top.sub("noise"), "noise", errors);
    NoiseSpec& ns = sc.noise;
    ns.vx = n.num("vx", 0.0);
    ns.vy = n.num("vy", 0.0);
    ns.psi = n.num("psi", 0.0);
    ns.psi_dot = n.num("psi_dot", 0.0);
    ns.x = n.num("x", 0.0);
    ns.y = n.num("y", 0.0);
    n.done();
    for (double s : {ns.vx, ns.vy, ns.psi, ns.psi_dot, ns.x, ns.y}) {
      if (!(s >= 0.0)) {
        errors.push_back("noise standard deviations must be >= 0");
        break;
      }
    }
  }
  {
    Fields i(top.sub("initial"), "initial", errors);
    sc.initial_offset = i.num("lateral_offset", 0.0);
    sc.initial_speed = i.opt_num("speed");
    i.done();
    if (sc.initial_speed && !(*sc.initial_speed >= sc.vehicle.v_eps)) {
      errors.push_back("initial.speed must be >= vehicle.v_eps");
    }
  }
  {
    Fields d(top.sub("disturbance"), "disturbance", errors);
    const auto t = d.opt_num("drag_step_time_s");
    const auto f = d.opt_num("drag_step_n");
    d.done();
    if (t.has_value() != f.has_value()) {
      errors.push_back("disturbance needs both drag_step_time_s and drag_step_n");
    } else if (t) {
      if (!(*t >= 0.0)) errors.push_back("disturbance.drag_step_time_s must be >= 0");
      sc.drag_step = DragStep{*t, *f};
    }
  }
  top.done();

  if (!errors.empty()) throw ScenarioError(std::move(errors));

  json canon = doc;
  canon.erase("output_dir");
  sc.canonical = canon.dump();
  if (sc.track.kind == TrackSource::Kind::kFile) sc.canonical += "\n" + read_file(sc.track.file);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file,
                       std::optional<std::uint64_t> seed_override) {
  std::ifstream in(file);
  if (!in) throw ScenarioError({"cannot open scenario file: " + file.string()});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError({file.string() + ": " + e.what()});
  }
  if (seed_override && doc.is_object()) doc["seed"] = *seed_override;
  return parse_scenario(doc, file.parent_path());
}

std::string scenario_digest(const Scenario& scenario) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(scenario.canonical.data(), scenario.canonical.size(), md, &len, EVP_sha256(),
             nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xF]);
  }
  return hex;
}

RefPath build_path(const Scenario& sc, std::vector<std::string>* warnings) {
  switch (sc.track.kind) {
    case TrackSource::Kind::kFile:
      return load_track(sc.track.file, sc.track.spacing);
    case TrackSource::Kind::kSegments: {
      auto g = generate_track(sc.track.spec);
      if (warnings) warnings->insert(warnings->end(), g.warnings.begin(), g.warnings.end());
      return std::move(g.path);
    }
    case TrackSource::Kind::kPreset:
    default: {
      TrackSpec spec = sc.track.preset == "satory-mini-gentle" ? satory_mini_gentle() : satory_mini();
      spec.spacing = sc.track.spacing;
      auto g = generate_track(spec);
      if (warnings) warnings->insert(warnings->end(), g.warnings.begin(), g.warnings.end());
      return std::move(g.path);
    }
  }
}

PlantConfig plant_config(const Scenario& sc) {
  PlantConfig pc;
  pc.params = sc.vehicle;
  pc.period_us = sc.period_us();
  pc.substep_us = sc.substep_us();
  pc.horizon = sc.horizon;
  pc.noise = sc.noise;
  pc.seed = sc.seed;
  pc.drag_step = sc.drag_step;
  pc.initial_offset = sc.initial_offset;
  pc.initial_speed = sc.initial_speed;
  return pc;
}

TrackerConfig tracker_config(const Scenario& sc) {
  TrackerConfig tc = sc.tracker;
  tc.limits = sc.vehicle.limits;
  return tc;
}

nlohmann::json default_scenario_json() {
  const VehicleParams v;
  const TrackerConfig t;
  json doc;
  doc["vehicle"] = {{"m", v.m},
                    {"iz", v.iz},
                    {"lf", v.lf},
                    {"lr", v.lr},
                    {"cf", v.cf},
                    {"cr", v.cr},
                    {"rw", v.rw},
                    {"f0", v.f0},
                    {"f2", v.f2},
                    {"g", v.g},
                    {"t_max", v.limits.t_max},
                    {"delta_max", v.limits.delta_max},
                    {"torque_rate", v.limits.torque_rate},
                    {"delta_rate", v.limits.delta_rate}};
  doc["longitudinal"] = {{"alpha", 1.0 / (v.m * v.rw)},
                         {"kp", t.longitudinal.gains.kp},
                         {"tau", t.longitudinal.tau}};
  doc["lateral"] = {{"alpha", t.lateral.model.alpha},
                    {"kp", t.lateral.gains.kp},
                    {"kd", t.lateral.gains.kd},
                    {"tau", t.lateral.tau}};
  doc["derivative_cutoff_hz"] = t.derivative_cutoff_hz;
  doc["control_period_s"] = 0.01;
  doc["plant_substep_s"] = 0.001;
  doc["horizon_s"] = 120.0;
  doc["track"] = {{"preset", "satory-mini"}};
  doc["seed"] = 1;
  doc["output_dir"] = "out";
  return doc;
}

}  // namespace mfc
