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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfc/path_tracking.hpp"
#include "mfc/track.hpp"

namespace mfc {

/// Carries every problem found while validating a scenario.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct TrackSource {
  enum class Kind { kPreset, kFile, kSegments };
  Kind kind = Kind::kPreset;
  std::string preset = "satory-mini";
  std::filesystem::path file;  // resolved against the scenario directory
  TrackSpec spec;
  double spacing = 0.5;
};

/**
 * Everything needed to reproduce one run. Loaded from a JSON file with
 * sections `vehicle`, `longitudinal`, `lateral`, `track`, `noise`,
 * `initial`, `disturbance` and top-level timing keys; absent keys take the
 * defaults below, unknown keys are rejected.
 */
struct Scenario {
  VehicleParams vehicle;
  TrackerConfig tracker;
  double control_period = 0.01;  // s
  double plant_substep = 0.001;  // s
  double horizon = 120.0;        // s
  std::optional<double> metrics_warmup;
  TrackSource track;
  NoiseSpec noise;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  double initial_offset = 0.0;
  std::optional<double> initial_speed;
  std::optional<DragStep> drag_step;

  /// Sorted-key compact JSON of the scenario minus output_dir, followed by
  /// the track file bytes when the track comes from a file.
  std::string canonical;

  std::int64_t period_us() const;
  std::int64_t substep_us() const;

  /// Metrics exclusion prefix: metrics_warmup, else max(tau1, tau2) + 1 s.
  double warmup_exclusion() const;
};

/// Parses and validates. Relative track paths resolve against base_dir.
/// Throws ScenarioError listing every violated constraint.
Scenario parse_scenario(const nlohmann::json& doc,
                        const std::filesystem::path& base_dir = {});

/// Reads a scenario file; seed_override replaces the file's seed before
/// validation and digesting.
Scenario load_scenario(const std::filesystem::path& file,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

/// Hex SHA-256 of Scenario::canonical.
std::string scenario_digest(const Scenario& scenario);

/// Builds the reference path; generator warnings are appended to `warnings`.
RefPath build_path(const Scenario& scenario, std::vector<std::string>* warnings = nullptr);

PlantConfig plant_config(const Scenario& scenario);

/// Tracker configuration with actuator limits taken from the vehicle section.
TrackerConfig tracker_config(const Scenario& scenario);

/// Default scenario document (satory-mini, default gains), as written by
/// the CLI and used in tests.
nlohmann::json default_scenario_json();

}  // namespace mfc
