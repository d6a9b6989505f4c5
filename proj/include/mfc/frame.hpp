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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace mfc {

inline constexpr int kProtocolVersion = 1;

struct HelloFrame {
  int version = kProtocolVersion;
  bool operator==(const HelloFrame&) const = default;
};

struct ConfigFrame {
  std::string digest;
  std::int64_t period_us = 0;
  bool operator==(const ConfigFrame&) const = default;
};

struct SensorFrame {
  std::int64_t seq = 0;
  std::int64_t t_us = 0;
  double vx = 0.0;
  double vy = 0.0;
  double psi = 0.0;
  double psi_dot = 0.0;
  double x = 0.0;
  double y = 0.0;
  double d = 0.0;
  double s_star = 0.0;
  bool operator==(const SensorFrame&) const = default;
};

struct ActuationFrame {
  std::int64_t seq = 0;
  std::int64_t t_us = 0;
  double t_w = 0.0;
  double delta = 0.0;
  bool operator==(const ActuationFrame&) const = default;
};

struct ByeFrame {
  std::string reason;
  bool operator==(const ByeFrame&) const = default;
};

using Frame = std::variant<HelloFrame, ConfigFrame, SensorFrame, ActuationFrame, ByeFrame>;

/// Wire name of the frame's type ("hello", "config", ...).
const char* frame_type(const Frame& frame);

class FrameError : public std::runtime_error {
 public:
  enum class Kind { kMalformed, kUnknownType, kMissingField, kExtraField, kBadFieldType };

  FrameError(Kind kind, std::string field, const std::string& message)
      : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

  Kind kind() const { return kind_; }
  /// Offending field for the field-level kinds, empty otherwise.
  const std::string& field() const { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

/// One LF-terminated line holding a flat JSON object, "type" first, doubles
/// printed with 17 significant digits. Throws std::invalid_argument on
/// non-finite numbers, which have no JSON representation.
std::string encode_frame(const Frame& frame);

/// Parses one line; a single trailing LF is accepted and stripped.
Frame decode_frame(std::string_view line);

/// Splits a byte stream into lines. Partial lines stay buffered.
class LineBuffer {
 public:
  explicit LineBuffer(std::size_t max_line = 1 << 16) : max_line_(max_line) {}

  void append(std::string_view bytes) { buf_.append(bytes); }

  /// Next complete line without its LF, or nullopt if none is buffered yet.
  /// Throws FrameError(kMalformed) when a line exceeds the size limit.
  std::optional<std::string> next_line();

  std::size_t buffered() const { return buf_.size() - pos_; }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
  std::size_t max_line_;
};

}  // namespace mfc
