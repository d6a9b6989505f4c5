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
#include <iosfwd>
#include <optional>
#include <string>

#include "mfc/path_tracking.hpp"

namespace mfc {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
  kExitProtocol = 3,
};

struct CommandOptions {
  std::optional<std::filesystem::path> scenario;
  std::optional<std::string> endpoint;
  std::optional<std::filesystem::path> out;  // overrides the scenario's output_dir
  std::optional<std::uint64_t> seed;         // overrides the scenario's seed
};

/// Writes metrics as one flat JSON object; numbers use 17 significant digits.
void write_metrics_json(const TrackingMetrics& metrics, double warmup_exclusion,
                        const std::string& digest, const std::string& status, std::ostream& out);

/// In-process closed loop; writes metrics.json and trace.csv.
int cmd_run(const CommandOptions& options, std::ostream& log);

/// Plant side of a split run; writes metrics.json and trace.csv.
int cmd_serve(const CommandOptions& options, std::ostream& log);

/// Controller side of a split run; writes controller_trace.csv.
int cmd_drive(const CommandOptions& options, std::ostream& log);

/// Writes the scenario's reference path as track.csv.
int cmd_gen_track(const CommandOptions& options, std::ostream& log);

/// Validates the scenario and its track, printing the digest.
int cmd_validate(const CommandOptions& options, std::ostream& log);

}  // namespace mfc
