#pragma once

// Live wire protocol for the demo UI.
//
// Messages are single-line JSON objects. Client to server:
//   {"sample": {"t_ms": int, "x": real, "y": real, "valid": bool?}}
//   {"cmd": "set_pairing", "pairing": "DwellGestures"}
//   {"cmd": "reset", "task": {...}?}
// Server to client:
//   {"hello": {"protocol": ..., "version": 1}}
//   {"event": {...event log record...}}
//   {"state": {...InterfaceState snapshot, layout included...}}
//   {"orbit_positions": [[id, x, y], ...]}     after every sample
//   {"error": "..."}
//
// A connection is either raw TCP (one message per line) or a WebSocket (one
// message per text frame); the server decides from the first bytes.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <openssl/evp.h>
#include <openssl/sha.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gazepair/io.hpp"
#include "gazepair/simulator.hpp"

namespace gazepair {

inline constexpr const char* kProtocolName = "gazepair-ui";
inline constexpr int kProtocolVersion = 1;

inline json state_snapshot(const TrialSession& session, const Pairing& pairing, TimeMs now) {
  const InterfaceState& s = session.state();
  json fb = nullptr;
  if (s.feedback) fb = {{"target", s.feedback->target}, {"expiry_ms", s.feedback->expiry_ms}};
  return {{"t_ms", now},
          {"pairing", pairing.name()},
          {"screen", to_string(s.screen)},
          {"track_index", s.track_index},
          {"playing", s.playing},
          {"completed", s.completed},
          {"failure_cause", to_string(session.result().failure_cause)},
          {"feedback", fb},
          {"alert_expiry_ms", s.alert_expiry_ms ? json(*s.alert_expiry_ms) : json(nullptr)},
          {"gesture_navigation", pairing.navigation() == Technique::gestures},
          {"task", to_json(session.task())},
          {"layout", to_json(session.current_layout())}};
}

// One UI connection's engine: arbiter + interface model, driven by samples.
class ServeSession {
 public:
  explicit ServeSession(HarnessConfig config = {}, Pairing pairing = Pairing(Technique::dwell, Technique::gestures),
                        TaskSpec task = {})
      : config_(std::move(config)), pairing_(pairing), task_(task) {
    restart();
  }

  std::vector<std::string> hello() const {
    return {json{{"hello", {{"protocol", kProtocolName}, {"version", kProtocolVersion}}}}.dump(),
            json{{"state", state_snapshot(*session_, pairing_, last_t_)}}.dump()};
  }

  // Handles one client message and returns the server messages it causes.
  std::vector<std::string> handle(const std::string& line) {
    json msg;
    try {
      msg = json::parse(line);
    } catch (const json::parse_error&) {
      return {error("malformed JSON")};
    }
    try {
      if (msg.contains("sample")) return on_sample(msg.at("sample"));
      if (msg.contains("cmd")) {
        const auto cmd = msg.at("cmd").get<std::string>();
        if (cmd == "set_pairing") {
          pairing_ = Pairing::parse(msg.at("pairing").get<std::string>());
          restart();
          return {snapshot()};
        }
        if (cmd == "reset") {
          if (msg.contains("task")) task_ = task_from_json(msg.at("task"));
          restart();
          return {snapshot()};
        }
        return {error("unknown cmd '" + cmd + "'")};
      }
      return {error("message has neither 'sample' nor 'cmd'")};
    } catch (const std::exception& e) {
      return {error(e.what())};
    }
  }

  const TrialSession& session() const { return *session_; }
  const Pairing& pairing() const { return pairing_; }

 private:
  void restart() {
    screens_ = prototype_screens(pairing_, config_.geometry);
    session_.emplace(task_, screens_, 0, config_.engine.feedback_ms);
    arbiter_ = build_arbiter(pairing_, config_.engine, session_->current_layout(), config_.policy);
    origin_.reset();
    last_t_ = 0;
    last_sample_seen_ = false;
    events_ = 0;
  }

  std::vector<std::string> on_sample(const json& j) {
    const TimeMs raw = j.at("t_ms").get<TimeMs>();
    if (!origin_) origin_ = raw;
    const TimeMs t = raw - *origin_;
    if (last_sample_seen_ && t <= last_t_) return {error("sample timestamps must increase")};
    last_sample_seen_ = true;
    last_t_ = t;

    GazeSample s{t, j.at("x").get<double>(), j.at("y").get<double>(), true};
    if (j.contains("valid")) s.valid = j.at("valid").get<bool>();

    std::vector<std::string> out;
    const json before = state_snapshot(*session_, pairing_, 0);
    if (!session_->finished()) {
      session_->tick(t);
      if (!session_->finished()) {
        if (const auto ev = arbiter_.step(s)) {
          LoggedEvent logged{*ev, session_->current_layout().screen_id};
          const Screen screen = session_->state().screen;
          session_->on_event(*ev, events_++);
          out.push_back(json{{"event", event_log_record(logged, pairing_.name())}}.dump());
          if (session_->state().screen != screen) arbiter_.rebind(session_->current_layout());
        }
      }
    } else {
      session_->tick(t);
    }
    if (state_snapshot(*session_, pairing_, 0) != before) out.push_back(snapshot());

    json orbits = json::array();
    for (const auto& target : session_->current_layout().targets)
      if (target.orbit) {
        const Point p = orbit_position(target, t);
        orbits.push_back({target.id, p.x, p.y});
      }
    out.push_back(json{{"orbit_positions", orbits}}.dump());
    return out;
  }

  std::string snapshot() const { return json{{"state", state_snapshot(*session_, pairing_, last_t_)}}.dump(); }
  static std::string error(const std::string& what) { return json{{"error", what}}.dump(); }

  HarnessConfig config_;
  Pairing pairing_;
  TaskSpec task_;
  ScreenSet screens_;
  std::optional<TrialSession> session_;
  Arbiter arbiter_;
  std::optional<TimeMs> origin_;
  TimeMs last_t_ = 0;
  bool last_sample_seen_ = false;
  std::size_t events_ = 0;
};

// ---- WebSocket helpers (RFC 6455, server side, text frames only) ----

inline std::string websocket_accept_key(const std::string& client_key) {
  const std::string src = client_key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(src.data()), src.size(), digest);
  unsigned char b64[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(b64, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<char*>(b64), static_cast<std::size_t>(n));
}

inline std::string websocket_frame(const std::string& payload) {
  std::string f;
  f.push_back(static_cast<char>(0x81));
  const std::size_t n = payload.size();
  if (n < 126) {
    f.push_back(static_cast<char>(n));
  } else if (n <= 0xFFFF) {
    f.push_back(static_cast<char>(126));
    f.push_back(static_cast<char>((n >> 8) & 0xFF));
    f.push_back(static_cast<char>(n & 0xFF));
  } else {
    f.push_back(static_cast<char>(127));
    for (int i = 7; i >= 0; --i) f.push_back(static_cast<char>((static_cast<std::uint64_t>(n) >> (8 * i)) & 0xFF));
  }
  return f + payload;
}

struct WsFrame {
  int opcode = 0;
  std::string payload;
};

// Pops one complete frame from the front of `buf`, if there is one.
inline std::optional<WsFrame> take_websocket_frame(std::string& buf) {
  const auto at = [&](std::size_t i) { return static_cast<unsigned char>(buf[i]); };
  if (buf.size() < 2) return std::nullopt;
  const int opcode = at(0) & 0x0F;
  const bool masked = (at(1) & 0x80) != 0;
  std::uint64_t len = at(1) & 0x7F;
  std::size_t pos = 2;
  if (len == 126) {
    if (buf.size() < 4) return std::nullopt;
    len = (std::uint64_t{at(2)} << 8) | at(3);
    pos = 4;
  } else if (len == 127) {
    if (buf.size() < 10) return std::nullopt;
    len = 0;
    for (int i = 0; i < 8; ++i) len = (len << 8) | at(2 + i);
    pos = 10;
  }
  const std::size_t mask_pos = pos;
  if (masked) pos += 4;
  if (buf.size() < pos + len) return std::nullopt;
  WsFrame f{opcode, buf.substr(pos, len)};
  if (masked)
    for (std::size_t i = 0; i < f.payload.size(); ++i)
      f.payload[i] = static_cast<char>(f.payload[i] ^ buf[mask_pos + (i % 4)]);
  buf.erase(0, pos + len);
  return f;
}

// ---- TCP server ----

class UiServer {
 public:
  using SessionFactory = std::function<ServeSession()>;

  explicit UiServer(SessionFactory factory) : factory_(std::move(factory)) {}
  ~UiServer() { stop(); }
  UiServer(const UiServer&) = delete;
  UiServer& operator=(const UiServer&) = delete;

  // Binds to 127.0.0.1:port (0 picks a free port) and starts accepting in
  // the background. Returns the bound port.
  int start(int port, bool any_interface = false) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("serve: socket() failed");
    const int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(any_interface ? INADDR_ANY : INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
        ::listen(listen_fd_, 8) < 0) {
      ::close(listen_fd_);
      listen_fd_ = -1;
      throw std::runtime_error("serve: cannot listen on port " + std::to_string(port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
    return port_;
  }

  void stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) acceptor_.join();
    std::vector<std::thread> workers;
    {
      std::lock_guard lock(mutex_);
      for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
      workers.swap(workers_);
    }
    for (auto& w : workers)
      if (w.joinable()) w.join();
  }

  void wait() {
    if (acceptor_.joinable()) acceptor_.join();
  }

  int port() const { return port_; }

 private:
  void accept_loop() {
    while (running_) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) {
        if (!running_) break;
        continue;
      }
      std::lock_guard lock(mutex_);
      client_fds_.push_back(fd);
      workers_.emplace_back([this, fd] {
        serve_client(fd);
        std::lock_guard l(mutex_);
        std::erase(client_fds_, fd);
        ::close(fd);
      });
    }
  }

  static bool send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) return false;
      sent += static_cast<std::size_t>(n);
    }
    return true;
  }

  void serve_client(int fd) {
    ServeSession session = factory_();
    std::string buf;
    char chunk[4096];
    bool decided = false, websocket = false;

    const auto emit = [&](const std::vector<std::string>& lines) {
      for (const auto& l : lines)
        if (!send_all(fd, websocket ? websocket_frame(l) : l + "\n")) return false;
      return true;
    };

    for (;;) {
      const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n <= 0) return;
      buf.append(chunk, static_cast<std::size_t>(n));

      if (!decided) {
        if (buf.size() < 4) continue;
        websocket = buf.rfind("GET ", 0) == 0;
        if (websocket) {
          const auto end = buf.find("\r\n\r\n");
          if (end == std::string::npos) continue;
          const std::string head = buf.substr(0, end);
          buf.erase(0, end + 4);
          const auto key_pos = head.find("Sec-WebSocket-Key:");
          if (key_pos == std::string::npos) return;
          auto key = head.substr(key_pos + 18, head.find("\r\n", key_pos) - key_pos - 18);
          key.erase(0, key.find_first_not_of(' '));
          key.erase(key.find_last_not_of(" \r") + 1);
          const std::string reply =
              "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
              "Sec-WebSocket-Accept: " + websocket_accept_key(key) + "\r\n\r\n";
          if (!send_all(fd, reply)) return;
        }
        decided = true;
        if (!emit(session.hello())) return;
      }

      if (websocket) {
        while (auto frame = take_websocket_frame(buf)) {
          if (frame->opcode == 0x8) return;  // close
          if (frame->opcode == 0x9) {        // ping -> pong
            std::string pong = websocket_frame(frame->payload);
            pong[0] = static_cast<char>(0x8A);
            if (!send_all(fd, pong)) return;
            continue;
          }
          if (frame->opcode == 0x1 && !emit(session.handle(frame->payload))) return;
        }
      } else {
        for (auto nl = buf.find('\n'); nl != std::string::npos; nl = buf.find('\n')) {
          std::string line = buf.substr(0, nl);
          buf.erase(0, nl + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.empty()) continue;
          if (!emit(session.handle(line))) return;
        }
      }
    }
  }

  SessionFactory factory_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mutex_;
  std::vector<int> client_fds_;
  std::vector<std::thread> workers_;
};

}  // namespace gazepair
