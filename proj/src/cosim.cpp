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

#include "mfc/cosim.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <ostream>
#include <thread>
#include <utility>

namespace mfc {
namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head) freeaddrinfo(head);
  }
};

void resolve(const Endpoint& ep, bool passive, AddrInfo& out) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_NUMERICSERV | (passive ? AI_PASSIVE : 0);
  const std::string port = std::to_string(ep.port);
  const int rc = getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints,
                             &out.head);
  if (rc != 0) {
    throw CosimError(CosimError::Kind::kBind,
                     "cannot resolve " + ep.str() + ": " + gai_strerror(rc));
  }
}

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return static_cast<int>(std::max<std::int64_t>(0, left.count()));
}

/// Frame-level view of a connected socket.
class Channel {
 public:
  explicit Channel(Fd fd) : fd_(std::move(fd)) {
    const int one = 1;
    ::setsockopt(fd_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  void send(const Frame& frame, std::int64_t seq = -1) {
    const std::string line = encode_frame(frame);
    std::size_t off = 0;
    while (off < line.size()) {
      const ssize_t n = ::send(fd_.get(), line.data() + off, line.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw CosimError(CosimError::Kind::kConnection, errno_text("send"));
      }
      off += static_cast<std::size_t>(n);
    }
    transcript.push_back({true, frame_type(frame), seq});
    ++stats.frames_sent;
  }

  /// Best effort: used on the way out of a failing session.
  void send_bye(const std::string& reason) noexcept {
    try {
      send(ByeFrame{reason});
    } catch (...) {
    }
  }

  Frame recv(std::chrono::milliseconds timeout, const char* waiting_for) {
    const auto deadline = Clock::now() + timeout;
    for (;;) {
      std::optional<std::string> line;
      try {
        line = buffer_.next_line();
      } catch (const FrameError& e) {
        throw CosimError(CosimError::Kind::kProtocol, e.what());
      }
      if (line) {
        Frame f;
        try {
          f = decode_frame(*line);
        } catch (const FrameError& e) {
          throw CosimError(CosimError::Kind::kProtocol, e.what());
        }
        std::int64_t seq = -1;
        if (auto* s = std::get_if<SensorFrame>(&f)) seq = s->seq;
        if (auto* a = std::get_if<ActuationFrame>(&f)) seq = a->seq;
        transcript.push_back({false, frame_type(f), seq});
        ++stats.frames_received;
        return f;
      }
      pollfd p{fd_.get(), POLLIN, 0};
      const int rc = ::poll(&p, 1, remaining_ms(deadline));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw CosimError(CosimError::Kind::kConnection, errno_text("poll"));
      }
      if (rc == 0) {
        throw CosimError(CosimError::Kind::kTimeout,
                         std::string("timed out after ") + std::to_string(timeout.count()) +
                             " ms waiting for " + waiting_for);
      }
      char chunk[4096];
      const ssize_t n = ::recv(fd_.get(), chunk, sizeof(chunk), 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw CosimError(CosimError::Kind::kConnection, errno_text("recv"));
      }
      if (n == 0) {
        throw CosimError(CosimError::Kind::kConnection,
                         std::string("peer closed the connection while waiting for ") +
                             waiting_for);
      }
      buffer_.append(std::string_view(chunk, static_cast<std::size_t>(n)));
    }
  }

  std::vector<TranscriptEntry> transcript;
  SessionStats stats;

 private:
  Fd fd_;
  LineBuffer buffer_;
};

Fd listen_on(const Endpoint& ep, std::uint16_t& bound_port) {
  AddrInfo ai;
  resolve(ep, true, ai);
  std::string last_error = "no usable address";
  for (addrinfo* a = ai.head; a != nullptr; a = a->ai_next) {
    Fd fd(::socket(a->ai_family, a->ai_socktype, a->ai_protocol));
    if (!fd.valid()) {
      last_error = errno_text("socket");
      continue;
    }
    const int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd.get(), a->ai_addr, a->ai_addrlen) != 0) {
      last_error = errno_text("bind");
      continue;
    }
    if (::listen(fd.get(), 1) != 0) {
      last_error = errno_text("listen");
      continue;
    }
    sockaddr_storage ss{};
    socklen_t len = sizeof(ss);
    ::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&ss), &len);
    bound_port = ss.ss_family == AF_INET6
                     ? ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port)
                     : ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
    return fd;
  }
  throw CosimError(CosimError::Kind::kBind, "cannot listen on " + ep.str() + ": " + last_error);
}

Fd accept_one(const Fd& listener, std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    pollfd p{listener.get(), POLLIN, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw CosimError(CosimError::Kind::kConnection, errno_text("poll"));
    if (rc == 0) {
      throw CosimError(CosimError::Kind::kTimeout,
                       "no controller connected within " + std::to_string(timeout.count()) + " ms");
    }
    Fd fd(::accept(listener.get(), nullptr, nullptr));
    if (fd.valid()) return fd;
    if (errno != EINTR && errno != ECONNABORTED) {
      throw CosimError(CosimError::Kind::kConnection, errno_text("accept"));
    }
  }
}

Fd connect_to(const Endpoint& ep, std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  std::string last_error;
  for (;;) {
    AddrInfo ai;
    resolve(ep, false, ai);
    for (addrinfo* a = ai.head; a != nullptr; a = a->ai_next) {
      Fd fd(::socket(a->ai_family, a->ai_socktype, a->ai_protocol));
      if (!fd.valid()) {
        last_error = errno_text("socket");
        continue;
      }
      if (::connect(fd.get(), a->ai_addr, a->ai_addrlen) == 0) return fd;
      last_error = errno_text("connect");
    }
    if (Clock::now() >= deadline) {
      throw CosimError(CosimError::Kind::kTimeout,
                       "cannot connect to " + ep.str() + ": " + last_error);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

[[noreturn]] void protocol_violation(Channel& ch, const std::string& what) {
  ch.send_bye("protocol violation: " + what);
  throw CosimError(CosimError::Kind::kProtocol, "protocol violation: " + what);
}

std::string describe(const Frame& f) {
  if (auto* b = std::get_if<ByeFrame>(&f)) return "bye (" + b->reason + ")";
  return std::string(frame_type(f)) + " frame";
}

}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("endpoint '" + std::string(text) + "' must be host:port");
  }
  std::string_view host = text.substr(0, colon);
  const std::string_view port = text.substr(colon + 1);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (port.empty() || ec != std::errc() || ptr != port.data() + port.size() || value > 65535) {
    throw std::invalid_argument("endpoint '" + std::string(text) + "' has an invalid port");
  }
  Endpoint ep;
  ep.host = host.empty() ? "127.0.0.1" : std::string(host);
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

std::string Endpoint::str() const {
  const bool v6 = host.find(':') != std::string::npos;
  return (v6 ? "[" + host + "]" : host) + ":" + std::to_string(port);
}

bool strictly_alternating(const std::vector<TranscriptEntry>& t) {
  if (t.size() < 3) return false;
  if (t[0].type != "hello" || t[1].type != "config" || t.back().type != "bye") return false;
  if (t[0].sent == t[1].sent) return false;
  const std::size_t body = t.size() - 3;
  if (body % 2 != 0) return false;
  const bool sensor_sent = t[1].sent;  // the config sender also sends sensor frames
  for (std::size_t i = 0; i < body; i += 2) {
    const TranscriptEntry& s = t[2 + i];
    const TranscriptEntry& a = t[3 + i];
    if (s.type != "sensor" || a.type != "actuation") return false;
    if (s.sent != sensor_sent || a.sent == sensor_sent) return false;
    const auto k = static_cast<std::int64_t>(i / 2);
    if (s.seq != k || a.seq != k) return false;
  }
  return true;
}

ServeResult plant_serve(const PlantConfig& config, const RefPath& path,
                        const ServeOptions& options) {
  PlantSession plant(config, path);
  std::uint16_t port = 0;
  Fd listener = listen_on(options.endpoint, port);
  if (options.on_listening) options.on_listening(port);
  Channel ch(accept_one(listener, options.accept_timeout));
  listener.reset();

  ServeResult result;
  const auto finish = [&](std::string reason) {
    result.trace = plant.trace();
    result.transcript = std::move(ch.transcript);
    result.stats = ch.stats;
    result.end_reason = std::move(reason);
    return result;
  };

  const Frame hello = ch.recv(options.actuation_timeout, "hello");
  const auto* h = std::get_if<HelloFrame>(&hello);
  if (h == nullptr) protocol_violation(ch, "expected hello, got " + describe(hello));
  if (h->version != kProtocolVersion) {
    protocol_violation(ch, "unsupported protocol version " + std::to_string(h->version));
  }
  ch.send(ConfigFrame{options.digest, config.period_us});

  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    while (!plant.finished()) {
      const SensorReading r = plant.sense();
      const SensorFrame s{r.seq,         r.t_us,    r.state.vx, r.state.vy, r.state.psi,
                          r.state.psi_dot, r.state.x, r.state.y,  r.d,        r.s_star};
      const auto sent_at = Clock::now();
      ch.send(s, s.seq);
      const Frame reply = ch.recv(options.actuation_timeout, "actuation");
      if (auto* b = std::get_if<ByeFrame>(&reply)) return finish("controller: " + b->reason);
      const auto* a = std::get_if<ActuationFrame>(&reply);
      if (a == nullptr) protocol_violation(ch, "expected actuation, got " + describe(reply));
      if (a->seq != s.seq) {
        protocol_violation(ch, "actuation seq " + std::to_string(a->seq) + " answers sensor seq " +
                                   std::to_string(s.seq));
      }
      if (a->t_us != s.t_us) {
        protocol_violation(ch, "actuation t_us " + std::to_string(a->t_us) + " != " +
                                   std::to_string(s.t_us));
      }
      ch.stats.max_round_trip = std::max(
          ch.stats.max_round_trip, std::chrono::duration<double>(Clock::now() - sent_at).count());
      plant.actuate(ActuationInput{a->t_w, a->delta}, nan, nan);
    }
  } catch (const CosimError& e) {
    if (e.kind() == CosimError::Kind::kTimeout) ch.send_bye(e.what());
    throw;
  } catch (const RunAbort& e) {
    ch.send_bye(std::string("abort: ") + e.what());
    throw;
  }
  ch.send(ByeFrame{"horizon reached"});
  return finish("horizon reached");
}

void write_controller_trace_csv(const std::vector<ControllerTraceRow>& rows, std::ostream& out) {
  out << "t,seq,t_w_raw,delta_raw,f1_est,f2_est\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%lld,%.17g,%.17g,%.17g,%.17g\n", r.t,
                  static_cast<long long>(r.seq), r.t_w_raw, r.delta_raw, r.f1_est, r.f2_est);
    out << buf;
  }
}

DriveResult controller_drive(Controller& controller, const DriveOptions& options) {
  Channel ch(connect_to(options.endpoint, options.connect_timeout));
  DriveResult result;
  const auto finish = [&](std::string reason) {
    result.transcript = std::move(ch.transcript);
    result.stats = ch.stats;
    result.end_reason = std::move(reason);
    return result;
  };

  ch.send(HelloFrame{kProtocolVersion});
  const Frame cfg = ch.recv(options.frame_timeout, "config");
  if (auto* b = std::get_if<ByeFrame>(&cfg)) return finish("plant: " + b->reason);
  const auto* c = std::get_if<ConfigFrame>(&cfg);
  if (c == nullptr) protocol_violation(ch, "expected config, got " + describe(cfg));
  if (c->digest != options.digest || c->period_us != options.period_us) {
    ch.send_bye("scenario digest mismatch");
    throw CosimError(CosimError::Kind::kDigestMismatch,
                     "scenario digest mismatch: plant has " + c->digest + ", local is " +
                         options.digest);
  }

  std::int64_t expected_seq = 0;
  std::int64_t last_t_us = std::numeric_limits<std::int64_t>::min();
  for (;;) {
    const Frame f = ch.recv(options.frame_timeout, "sensor");
    if (auto* b = std::get_if<ByeFrame>(&f)) return finish("plant: " + b->reason);
    const auto* s = std::get_if<SensorFrame>(&f);
    if (s == nullptr) protocol_violation(ch, "expected sensor, got " + describe(f));
    if (s->seq != expected_seq) {
      protocol_violation(ch, "sensor seq " + std::to_string(s->seq) + ", expected " +
                                 std::to_string(expected_seq));
    }
    if (s->t_us < last_t_us) protocol_violation(ch, "sensor t_us went backwards");
    last_t_us = s->t_us;

    SensorReading r;
    r.seq = s->seq;
    r.t_us = s->t_us;
    r.state = VehicleState{s->x, s->y, s->psi, s->vx, s->vy, s->psi_dot};
    r.d = s->d;
    r.s_star = s->s_star;
    const ControlOutput out = controller.step(r);
    ch.send(ActuationFrame{s->seq, s->t_us, out.raw.t_w, out.raw.delta}, s->seq);
    result.rows.push_back(
        {to_seconds(s->t_us), s->seq, out.raw.t_w, out.raw.delta, out.f1_est, out.f2_est});
    ++expected_seq;
  }
}

}  // namespace mfc
