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

#include "mfc/frame.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <vector>

#include "json.hpp"

namespace mfc {
namespace {

using nlohmann::json;

class Writer {
 public:
  explicit Writer(const char* type) {
    out_ = "{\"type\":";
    out_ += json(type).dump();
  }

  Writer& num(const char* key, double v) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string("frame field '") + key + "' is not finite");
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return raw(key, buf);
  }

  Writer& integer(const char* key, std::int64_t v) { return raw(key, std::to_string(v)); }

  Writer& str(const char* key, const std::string& v) { return raw(key, json(v).dump()); }

  std::string finish() { return out_ + "}\n"; }

 private:
  Writer& raw(const char* key, const std::string& value) {
    out_ += ",\"";
    out_ += key;
    out_ += "\":";
    out_ += value;
    return *this;
  }

  std::string out_;
};

class Reader {
 public:
  Reader(const json& obj, const char* type) : obj_(obj), type_(type) {}

  double num(const char* key) {
    const json& v = get(key);
    if (!v.is_number()) bad(key, "a number");
    return v.get<double>();
  }

  std::int64_t integer(const char* key) {
    const json& v = get(key);
    if (!v.is_number_integer()) bad(key, "an integer");
    return v.get<std::int64_t>();
  }

  std::string str(const char* key) {
    const json& v = get(key);
    if (!v.is_string()) bad(key, "a string");
    return v.get<std::string>();
  }

  void done() const {
    for (const auto& [k, v] : obj_.items()) {
      if (k != "type" && !seen_.count(k)) {
        throw FrameError(FrameError::Kind::kExtraField, k,
                         std::string(type_) + " frame: unexpected field '" + k + "'");
      }
    }
  }

 private:
  const json& get(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) {
      throw FrameError(FrameError::Kind::kMissingField, key,
                       std::string(type_) + " frame: missing field '" + key + "'");
    }
    return *it;
  }

  [[noreturn]] void bad(const char* key, const char* what) const {
    throw FrameError(FrameError::Kind::kBadFieldType, key,
                     std::string(type_) + " frame: field '" + key + "' must be " + what);
  }

  const json& obj_;
  const char* type_;
  std::set<std::string> seen_;
};

struct Encoder {
  std::string operator()(const HelloFrame& f) const {
    return Writer("hello").integer("version", f.version).finish();
  }
  std::string operator()(const ConfigFrame& f) const {
    return Writer("config").str("digest", f.digest).integer("period_us", f.period_us).finish();
  }
  std::string operator()(const SensorFrame& f) const {
    return Writer("sensor")
        .integer("seq", f.seq)
        .integer("t_us", f.t_us)
        .num("vx", f.vx)
        .num("vy", f.vy)
        .num("psi", f.psi)
        .num("psi_dot", f.psi_dot)
        .num("x", f.x)
        .num("y", f.y)
        .num("d", f.d)
        .num("s_star", f.s_star)
        .finish();
  }
  std::string operator()(const ActuationFrame& f) const {
    return Writer("actuation")
        .integer("seq", f.seq)
        .integer("t_us", f.t_us)
        .num("t_w", f.t_w)
        .num("delta", f.delta)
        .finish();
  }
  std::string operator()(const ByeFrame& f) const {
    return Writer("bye").str("reason", f.reason).finish();
  }
};

}  // namespace

const char* frame_type(const Frame& frame) {
  static constexpr const char* kNames[] = {"hello", "config", "sensor", "actuation", "bye"};
  return kNames[frame.index()];
}

std::string encode_frame(const Frame& frame) { return std::visit(Encoder{}, frame); }

Frame decode_frame(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) {
    throw FrameError(FrameError::Kind::kMalformed, "", "frame contains an embedded LF");
  }
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FrameError(FrameError::Kind::kMalformed, "", std::string("malformed frame: ") + e.what());
  }
  if (!obj.is_object()) {
    throw FrameError(FrameError::Kind::kMalformed, "", "frame is not a JSON object");
  }
  for (const auto& [k, v] : obj.items()) {
    if (v.is_object() || v.is_array()) {
      throw FrameError(FrameError::Kind::kMalformed, k, "frame field '" + k + "' is not flat");
    }
  }
  auto it = obj.find("type");
  if (it == obj.end()) {
    throw FrameError(FrameError::Kind::kMissingField, "type", "frame: missing field 'type'");
  }
  if (!it->is_string()) {
    throw FrameError(FrameError::Kind::kBadFieldType, "type", "frame: 'type' must be a string");
  }
  const std::string type = it->get<std::string>();

  Frame out;
  if (type == "hello") {
    Reader r(obj, "hello");
    HelloFrame f;
    f.version = static_cast<int>(r.integer("version"));
    r.done();
    out = f;
  } else if (type == "config") {
    Reader r(obj, "config");
    ConfigFrame f;
    f.digest = r.str("digest");
    f.period_us = r.integer("period_us");
    r.done();
    out = f;
  } else if (type == "sensor") {
    Reader r(obj, "sensor");
    SensorFrame f;
    f.seq = r.integer("seq");
    f.t_us = r.integer("t_us");
    f.vx = r.num("vx");
    f.vy = r.num("vy");
    f.psi = r.num("psi");
    f.psi_dot = r.num("psi_dot");
    f.x = r.num("x");
    f.y = r.num("y");
    f.d = r.num("d");
    f.s_star = r.num("s_star");
    r.done();
    out = f;
  } else if (type == "actuation") {
    Reader r(obj, "actuation");
    ActuationFrame f;
    f.seq = r.integer("seq");
    f.t_us = r.integer("t_us");
    f.t_w = r.num("t_w");
    f.delta = r.num("delta");
    r.done();
    out = f;
  } else if (type == "bye") {
    Reader r(obj, "bye");
    ByeFrame f;
    f.reason = r.str("reason");
    r.done();
    out = f;
  } else {
    throw FrameError(FrameError::Kind::kUnknownType, "type", "unknown frame type '" + type + "'");
  }
  return out;
}

std::optional<std::string> LineBuffer::next_line() {
  const std::size_t lf = buf_.find('\n', pos_);
  if (lf == std::string::npos) {
    if (buf_.size() - pos_ > max_line_) {
      throw FrameError(FrameError::Kind::kMalformed, "", "frame line exceeds size limit");
    }
    if (pos_ > 0) {
      buf_.erase(0, pos_);
      pos_ = 0;
    }
    return std::nullopt;
  }
  std::string line = buf_.substr(pos_, lf - pos_);
  pos_ = lf + 1;
  if (pos_ == buf_.size()) {
    buf_.clear();
    pos_ = 0;
  }
  return line;
}

}  // namespace mfc
