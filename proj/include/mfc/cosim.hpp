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

#include <chrono>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mfc/frame.hpp"
#include "mfc/path_tracking.hpp"

namespace mfc {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7707;

  /// Parses "host:port", "[v6]:port" or ":port". Throws std::invalid_argument.
  static Endpoint parse(std::string_view text);
  std::string str() const;
};

class CosimError : public std::runtime_error {
 public:
  enum class Kind {
    kBind,            // endpoint could not be bound or resolved
    kTimeout,         // accept, connect or frame deadline expired
    kConnection,      // peer closed or socket failure mid-session
    kProtocol,        // well-formed bytes in the wrong order, or bad frames
    kDigestMismatch,  // peers disagree on the scenario
  };

  CosimError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct TranscriptEntry {
  bool sent = false;  // from this side's point of view
  std::string type;
  std::int64_t seq = -1;  // sensor and actuation frames only
};

/// True when the entries follow hello, config, (sensor actuation)*, bye as
/// seen from either side.
bool strictly_alternating(const std::vector<TranscriptEntry>& transcript);

struct SessionStats {
  std::int64_t frames_sent = 0;
  std::int64_t frames_received = 0;
  double max_round_trip = 0.0;  // s, sensor sent to actuation received
};

struct ServeOptions {
  Endpoint endpoint;
  std::string digest;
  std::chrono::milliseconds accept_timeout{30000};
  std::chrono::milliseconds actuation_timeout{5000};
  /// Called once the socket listens, with the bound port (useful with port 0).
  std::function<void(std::uint16_t)> on_listening;
};

struct ServeResult {
  std::vector<TraceRow> trace;  // f1_est and f2_est are NaN: they stay on the controller
  std::vector<TranscriptEntry> transcript;
  SessionStats stats;
  std::string end_reason;
};

/**
 * Plant side of a split session. Accepts one client, performs the handshake,
 * then per control period sends a sensor frame and blocks for the matching
 * actuation frame before advancing the plant. Throws CosimError, or RunAbort
 * when the plant itself fails (a bye frame is sent first in both cases).
 */
ServeResult plant_serve(const PlantConfig& config, const RefPath& path,
                        const ServeOptions& options);

struct ControllerTraceRow {
  double t = 0.0;
  std::int64_t seq = 0;
  double t_w_raw = 0.0;
  double delta_raw = 0.0;
  double f1_est = 0.0;
  double f2_est = 0.0;
};

void write_controller_trace_csv(const std::vector<ControllerTraceRow>& rows, std::ostream& out);

struct DriveOptions {
  Endpoint endpoint;
  std::string digest;
  std::int64_t period_us = 10000;
  std::chrono::milliseconds connect_timeout{10000};
  std::chrono::milliseconds frame_timeout{30000};
};

struct DriveResult {
  std::vector<ControllerTraceRow> rows;
  std::vector<TranscriptEntry> transcript;
  SessionStats stats;
  std::string end_reason;
};

/// Controller side: connects, checks the scenario digest and answers every
/// sensor frame with one actuation frame computed by `controller`.
DriveResult controller_drive(Controller& controller, const DriveOptions& options);

}  // namespace mfc
