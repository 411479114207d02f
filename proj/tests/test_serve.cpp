#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include "gazepair/serve.hpp"

using namespace gazepair;

namespace {

std::vector<json> parse_all(const std::vector<std::string>& lines) {
  std::vector<json> out;
  for (const auto& l : lines) out.push_back(json::parse(l));
  return out;
}

json sample_msg(TimeMs t, double x, double y) { return {{"sample", {{"t_ms", t}, {"x", x}, {"y", y}}}}; }

int connect_to(int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_port = htons(static_cast<std::uint16_t>(port));
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&a), sizeof a) != 0) {
    ::close(fd);
    return -1;
  }
  timeval tv{5, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  return fd;
}

void send_str(int fd, const std::string& s) { ASSERT_EQ(::send(fd, s.data(), s.size(), 0), static_cast<ssize_t>(s.size())); }

// Reads until `done(buffer)` holds or the socket times out.
template <typename Pred>
std::string read_until(int fd, Pred done) {
  std::string buf;
  char chunk[4096];
  while (!done(buf)) {
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));
  }
  return buf;
}

std::string masked_frame(const std::string& payload) {
  std::string f;
  f.push_back(static_cast<char>(0x81));
  const unsigned char mask[4] = {0x12, 0x34, 0x56, 0x78};
  if (payload.size() < 126) {
    f.push_back(static_cast<char>(0x80 | payload.size()));
  } else {
    f.push_back(static_cast<char>(0x80 | 126));
    f.push_back(static_cast<char>(payload.size() >> 8));
    f.push_back(static_cast<char>(payload.size() & 0xFF));
  }
  for (unsigned char m : mask) f.push_back(static_cast<char>(m));
  for (std::size_t i = 0; i < payload.size(); ++i) f.push_back(static_cast<char>(payload[i] ^ mask[i % 4]));
  return f;
}

}  // namespace

TEST(ServeSession, HelloCarriesVersionAndState) {
  ServeSession s;
  const auto msgs = parse_all(s.hello());
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[0]["hello"]["protocol"], "gazepair-ui");
  EXPECT_EQ(msgs[0]["hello"]["version"], 1);
  EXPECT_EQ(msgs[1]["state"]["screen"], "home1");
  EXPECT_EQ(msgs[1]["state"]["pairing"], "DwellGestures");
  EXPECT_EQ(msgs[1]["state"]["layout"]["targets"].size(), 8u);
}

TEST(ServeSession, SampleYieldsOrbitPositions) {
  ServeSession s({}, Pairing::parse("PursuitsPursuits"));
  const auto msgs = parse_all(s.handle(sample_msg(1000, 10, 10).dump()));
  ASSERT_FALSE(msgs.empty());
  const auto& orbits = msgs.back()["orbit_positions"];
  ASSERT_EQ(orbits.size(), 8u);
  EXPECT_EQ(orbits[0][0], "p1_app0");
  // First sample defines time zero: phase 0 sits right of the center.
  const auto& t = s.session().current_layout().targets[0];
  EXPECT_NEAR(orbits[0][1].get<double>(), t.center.x + 30, 1e-9);
}

TEST(ServeSession, ErrorsDoNotKillTheSession) {
  ServeSession s;
  auto msgs = parse_all(s.handle("{not json"));
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_TRUE(msgs[0].contains("error"));
  msgs = parse_all(s.handle(R"({"cmd":"set_pairing","pairing":"GesturesDwell"})"));
  EXPECT_TRUE(msgs[0].contains("error"));
  msgs = parse_all(s.handle(R"({"cmd":"dance"})"));
  EXPECT_TRUE(msgs[0].contains("error"));
  s.handle(sample_msg(100, 1, 1).dump());
  msgs = parse_all(s.handle(sample_msg(100, 1, 1).dump()));
  EXPECT_TRUE(msgs[0].contains("error"));
  EXPECT_EQ(s.pairing().name(), "DwellGestures");
}

TEST(ServeSession, SetPairingAndReset) {
  ServeSession s;
  auto msgs = parse_all(s.handle(R"({"cmd":"set_pairing","pairing":"PursuitsDwell"})"));
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(msgs[0]["state"]["pairing"], "PursuitsDwell");
  msgs = parse_all(s.handle(R"({"cmd":"reset","task":{"target_app_slot":1,"start_track_index":5,"target_track_index":9}})"));
  EXPECT_EQ(msgs[0]["state"]["task"]["target_app_slot"], 1);
  EXPECT_EQ(msgs[0]["state"]["screen"], "home1");
}

TEST(ServeSession, NoiselessDwellGesturesPlaybackCompletes) {
  const Pairing pairing = Pairing::parse("DwellGestures");
  const TaskSpec task{2, 3, 7};
  const auto logs = run_trial(pairing, task, zero_noise_profile(), EngineConfig{}, prototype_screens(pairing));
  ASSERT_TRUE(logs.result.completed);

  ServeSession s({}, pairing, task);
  std::size_t events = 0;
  json last_state;
  for (const auto& g : logs.samples)
    for (const auto& m : parse_all(s.handle(sample_msg(g.t_ms + 5000, g.x, g.y).dump()))) {
      if (m.contains("event")) {
        EXPECT_EQ(m["event"]["technique"], to_string(logs.events[events].event.technique));
        EXPECT_EQ(m["event"]["payload"], logs.events[events].event.payload);
        ++events;
      }
      if (m.contains("state")) last_state = m["state"];
    }
  EXPECT_EQ(events, 7u);
  EXPECT_TRUE(last_state["completed"].get<bool>());
  EXPECT_TRUE(last_state["playing"].get<bool>());
  EXPECT_EQ(last_state["track_index"], 7);
  ASSERT_TRUE(last_state["feedback"].is_object());
  EXPECT_EQ(last_state["feedback"]["expiry_ms"].get<TimeMs>() - last_state["t_ms"].get<TimeMs>(), 1000);
}

TEST(WebSocket, AcceptKeyMatchesRfcExample) {
  EXPECT_EQ(websocket_accept_key("dGhlIHNhbXBsZSBub25jZQ=="), "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST(WebSocket, FrameRoundTrip) {
  for (std::size_t n : {0u, 5u, 125u, 126u, 300u, 70000u}) {
    std::string buf = websocket_frame(std::string(n, 'x')) + "tail";
    const auto f = take_websocket_frame(buf);
    ASSERT_TRUE(f);
    EXPECT_EQ(f->opcode, 1);
    EXPECT_EQ(f->payload.size(), n);
    EXPECT_EQ(buf, "tail");
  }
  std::string partial = websocket_frame("hello").substr(0, 4);
  EXPECT_FALSE(take_websocket_frame(partial));
  std::string masked = masked_frame("hi there");
  EXPECT_EQ(take_websocket_frame(masked)->payload, "hi there");
}

TEST(UiServerTest, RawTcpLines) {
  UiServer server([] { return ServeSession(); });
  const int port = server.start(0);
  const int fd = connect_to(port);
  ASSERT_GE(fd, 0);
  send_str(fd, sample_msg(0, 187.5, 455).dump() + "\n");
  const auto buf = read_until(fd, [](const std::string& b) { return b.find("orbit_positions") != std::string::npos; });
  ::close(fd);
  server.stop();
  std::istringstream in(buf);
  std::string line;
  std::vector<json> msgs;
  while (std::getline(in, line)) msgs.push_back(json::parse(line));
  ASSERT_GE(msgs.size(), 3u);
  EXPECT_TRUE(msgs[0].contains("hello"));
  EXPECT_TRUE(msgs[1].contains("state"));
  EXPECT_TRUE(msgs.back().contains("orbit_positions"));
}

TEST(UiServerTest, WebSocketUpgrade) {
  UiServer server([] { return ServeSession(); });
  const int port = server.start(0);
  const int fd = connect_to(port);
  ASSERT_GE(fd, 0);
  send_str(fd,
           "GET / HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
           "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n");
  std::string buf = read_until(fd, [](const std::string& b) { return b.find("\"state\"") != std::string::npos; });
  ASSERT_NE(buf.find("101 Switching Protocols"), std::string::npos);
  ASSERT_NE(buf.find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo="), std::string::npos);
  buf.erase(0, buf.find("\r\n\r\n") + 4);

  send_str(fd, masked_frame(R"({"cmd":"set_pairing","pairing":"PursuitsGestures"})"));
  buf += read_until(fd, [](const std::string& b) { return b.find("PursuitsGestures") != std::string::npos; });
  std::vector<json> msgs;
  while (auto f = take_websocket_frame(buf)) msgs.push_back(json::parse(f->payload));
  ::close(fd);
  server.stop();
  ASSERT_GE(msgs.size(), 3u);
  EXPECT_TRUE(msgs[0].contains("hello"));
  EXPECT_EQ(msgs.back()["state"]["pairing"], "PursuitsGestures");
}
