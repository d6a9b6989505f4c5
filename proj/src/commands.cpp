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

#include "mfc/commands.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "mfc/cosim.hpp"
#include "mfc/scenario.hpp"
#include "mfc/track.hpp"

namespace mfc {
namespace {

struct Loaded {
  Scenario scenario;
  std::string digest;
  RefPath path;
  std::filesystem::path out_dir;
};

/// Loads scenario and track. Returns nullopt after reporting to `log`.
std::optional<Loaded> load(const CommandOptions& options, std::ostream& log, bool required) {
  try {
    Scenario sc;
    if (options.scenario) {
      sc = load_scenario(*options.scenario, options.seed);
    } else if (required) {
      log << "error: --scenario is required\n";
      return std::nullopt;
    } else {
      auto doc = default_scenario_json();
      if (options.seed) doc["seed"] = *options.seed;
      sc = parse_scenario(doc);
    }
    std::vector<std::string> warnings;
    RefPath path = build_path(sc, &warnings);
    for (const auto& w : warnings) log << "warning: " << w << '\n';
    std::string digest = scenario_digest(sc);
    std::filesystem::path out = options.out.value_or(sc.output_dir);
    return Loaded{std::move(sc), std::move(digest), std::move(path), std::move(out)};
  } catch (const ScenarioError& e) {
    log << "error: invalid scenario\n";
    for (const auto& p : e.problems()) log << "  - " << p << '\n';
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
  }
  return std::nullopt;
}

std::optional<Endpoint> endpoint_of(const CommandOptions& options, std::ostream& log) {
  try {
    return options.endpoint ? Endpoint::parse(*options.endpoint) : Endpoint{};
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
  }
  return std::nullopt;
}

std::ofstream open_output(const std::filesystem::path& dir, const char* name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

void write_results(const Loaded& l, const std::vector<TraceRow>& trace, const std::string& status) {
  const TrackingMetrics m = compute_metrics(trace, l.scenario.warmup_exclusion());
  auto mf = open_output(l.out_dir, "metrics.json");
  write_metrics_json(m, l.scenario.warmup_exclusion(), l.digest, status, mf);
  auto tf = open_output(l.out_dir, "trace.csv");
  write_trace_csv(trace, tf);
}

int cosim_exit(const CosimError& e) {
  switch (e.kind()) {
    case CosimError::Kind::kProtocol:
      return kExitProtocol;
    case CosimError::Kind::kDigestMismatch:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

}  // namespace

void write_metrics_json(const TrackingMetrics& m, double warmup_exclusion, const std::string& digest,
                        const std::string& status, std::ostream& out) {
  char buf[64];
  const auto num = [&](const char* key, double v, bool last = false) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << "  \"" << key << "\": " << buf << (last ? "\n" : ",\n");
  };
  out << "{\n";
  out << "  \"status\": \"" << status << "\",\n";
  out << "  \"scenario_digest\": \"" << digest << "\",\n";
  num("warmup_exclusion_s", warmup_exclusion);
  out << "  \"samples\": " << m.samples << ",\n";
  num("e_y_max_m", m.e_y_max);
  num("e_y_rms_m", m.e_y_rms);
  num("e_v_max_mps", m.e_v_max);
  num("e_v_rms_mps", m.e_v_rms);
  num("e_psi_max_rad", m.e_psi_max, true);
  out << "}\n";
}

int cmd_run(const CommandOptions& options, std::ostream& log) {
  auto l = load(options, log, true);
  if (!l) return kExitValidation;
  try {
    PathTracker tracker(tracker_config(l->scenario), l->path, l->scenario.control_period);
    const RunResult r = run_closed_loop(plant_config(l->scenario), l->path, tracker,
                                        l->scenario.warmup_exclusion());
    write_results(*l, r.trace, "ok");
    log << "run: " << r.trace.size() << " steps, e_y_max " << r.metrics.e_y_max << " m, e_v_max "
        << r.metrics.e_v_max << " m/s -> " << l->out_dir.string() << '\n';
    return kExitOk;
  } catch (const RunAbort& e) {
    log << "abort: " << e.what() << '\n';
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
  }
  return kExitRuntime;
}

int cmd_serve(const CommandOptions& options, std::ostream& log) {
  auto l = load(options, log, true);
  const auto endpoint = endpoint_of(options, log);
  if (!l || !endpoint) return kExitValidation;
  try {
    ServeOptions so;
    so.endpoint = *endpoint;
    so.digest = l->digest;
    so.on_listening = [&](std::uint16_t port) {
      log << "serve: listening on " << so.endpoint.host << ":" << port << std::endl;
    };
    const ServeResult r = plant_serve(plant_config(l->scenario), l->path, so);
    write_results(*l, r.trace, "ok");
    log << "serve: " << r.trace.size() << " steps, ended: " << r.end_reason << '\n';
    return kExitOk;
  } catch (const CosimError& e) {
    log << "error: " << e.what() << '\n';
    return cosim_exit(e);
  } catch (const RunAbort& e) {
    log << "abort: " << e.what() << '\n';
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
  }
  return kExitRuntime;
}

int cmd_drive(const CommandOptions& options, std::ostream& log) {
  auto l = load(options, log, true);
  const auto endpoint = endpoint_of(options, log);
  if (!l || !endpoint) return kExitValidation;
  try {
    PathTracker tracker(tracker_config(l->scenario), l->path, l->scenario.control_period);
    DriveOptions d;
    d.endpoint = *endpoint;
    d.digest = l->digest;
    d.period_us = l->scenario.period_us();
    const DriveResult r = controller_drive(tracker, d);
    auto f = open_output(l->out_dir, "controller_trace.csv");
    write_controller_trace_csv(r.rows, f);
    log << "drive: " << r.rows.size() << " steps, ended: " << r.end_reason << '\n';
    return kExitOk;
  } catch (const CosimError& e) {
    log << "error: " << e.what() << '\n';
    return cosim_exit(e);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
  }
  return kExitRuntime;
}

int cmd_gen_track(const CommandOptions& options, std::ostream& log) {
  auto l = load(options, log, false);
  if (!l) return kExitValidation;
  try {
    auto f = open_output(l->out_dir, "track.csv");
    write_track_csv(l->path, f);
    log << "gen-track: " << l->path.size() << " points, " << l->path.length() << " m -> "
        << (l->out_dir / "track.csv").string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
  }
  return kExitRuntime;
}

int cmd_validate(const CommandOptions& options, std::ostream& log) {
  auto l = load(options, log, true);
  if (!l) return kExitValidation;
  const ConsistencyReport c = check_consistency(l->path);
  log << "valid: track " << l->path.length() << " m, " << l->path.size() << " points, heading "
      << "consistency " << c.heading_error << " rad\n";
  log << "digest: " << l->digest << '\n';
  return kExitOk;
}

}  // namespace mfc
