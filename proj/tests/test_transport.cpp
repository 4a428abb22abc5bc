#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <noisepad/channel.hpp>
#include <noisepad/frame.hpp>
#include <noisepad/session.hpp>
#include <noisepad/socket.hpp>
#include <noisepad/wire.hpp>

using namespace noisepad;
using namespace noisepad::transport;

namespace {

using Bytes = std::vector<std::uint8_t>;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

SessionParams small_params() {
  SessionParams p;
  p.block_length = 512;
  p.resolution_bits = 40;
  return p;
}

struct FailingBuf : std::streambuf {
  int overflow(int) override { return traits_type::eof(); }
  std::streamsize xsputn(const char*, std::streamsize) override { return 0; }
};

}  // namespace

TEST(Frame, ExactBytes) {
  EXPECT_EQ(frame_encode(MessageType::hello, Bytes{}), (Bytes{0x4E, 0x4F, 0x54, 0x50, 0x01, 0x01, 0, 0, 0, 0}));
  EXPECT_EQ(frame_encode(MessageType::keyblock, Bytes{0xAB, 0xCD, 0xEF}),
            (Bytes{0x4E, 0x4F, 0x54, 0x50, 0x01, 0x03, 0, 0, 0, 3, 0xAB, 0xCD, 0xEF}));
  const Frame f = frame_decode(Bytes{0x4E, 0x4F, 0x54, 0x50, 0x01, 0x01, 0, 0, 0, 0});
  EXPECT_EQ(f.type, MessageType::hello);
  EXPECT_TRUE(f.payload.empty());
}

TEST(Frame, RandomRoundTrips) {
  const MessageType types[] = {MessageType::hello,       MessageType::hello_ack, MessageType::keyblock,
                               MessageType::parity_req,  MessageType::parity_resp, MessageType::pa_seed,
                               MessageType::confirm,     MessageType::error};
  SeededStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    Frame f{types[rng.below(8)], Bytes(rng.below(i % 10 == 0 ? 70000 : 300))};
    for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng.next_word());
    ASSERT_EQ(frame_decode(frame_encode(f)), f);
  }
}

TEST(Frame, DecodeErrors) {
  Bytes good = frame_encode(MessageType::keyblock, Bytes(10, 7));
  auto bad = good;
  bad[0] ^= 0xFF;
  EXPECT_EQ(code_of([&] { frame_decode(bad); }), ErrorCode::bad_magic);
  bad = good;
  bad[4] = 0x02;
  EXPECT_EQ(code_of([&] { frame_decode(bad); }), ErrorCode::bad_version);
  EXPECT_EQ(code_of([&] { frame_decode(std::span(good).first(15)); }), ErrorCode::truncated);
  EXPECT_EQ(code_of([&] { frame_decode(std::span(good).first(6)); }), ErrorCode::truncated);
  bad = good;
  bad[5] = 0x42;
  EXPECT_EQ(code_of([&] { frame_decode(bad); }), ErrorCode::unknown_message);
  bad = good;
  bad[6] = 0x01;
  bad[9] = 0x01;
  EXPECT_EQ(code_of([&] { frame_decode(bad); }), ErrorCode::oversize);
  EXPECT_EQ(code_of([&] { frame_encode(MessageType::keyblock, Bytes(kMaxPayload + 1)); }), ErrorCode::oversize);
  EXPECT_NO_THROW(frame_encode(MessageType::keyblock, Bytes(kMaxPayload)));
}

TEST(Hello, CodecAndLocalPolicy) {
  SessionParams p = small_params();
  p.delta_phi = 0x1p-20;
  p.safety_bits = 17;
  const auto payload = encode_hello(p);
  EXPECT_EQ(payload.size(), 8u + 1 + 1 + 4 + 2);
  SessionParams local;
  local.reconciliation_block = 1024;
  local.reconcile = ReconcileMode::none;
  const SessionParams q = decode_hello(payload, local);
  EXPECT_EQ(q.avg_photon_number, p.avg_photon_number);
  EXPECT_EQ(q.delta_phi, p.delta_phi);
  EXPECT_EQ(q.resolution_bits, p.resolution_bits);
  EXPECT_EQ(q.block_length, 512u);
  EXPECT_EQ(q.safety_bits, 17u);
  EXPECT_EQ(q.reconciliation_block, 512u);
  EXPECT_EQ(q.reconcile, ReconcileMode::none);
  p.delta_phi = 0.01;
  EXPECT_EQ(code_of([&] { encode_hello(p); }), ErrorCode::validation);
}

TEST(Handshake, AcceptsValidParameters) {
  auto [a, b] = make_loopback_pair();
  SessionParams got;
  std::thread t([&, ch = b.get()] { got = handshake(*ch, {}, Role::responder); });
  EXPECT_NO_THROW(handshake(*a, small_params(), Role::initiator));
  t.join();
  EXPECT_EQ(got.block_length, 512u);
}

TEST(Handshake, RejectsCoarseOffsetWithErrorFrame) {
  auto [a, b] = make_loopback_pair();
  SessionParams p = small_params();
  p.delta_phi = 0x1p-3;
  p.resolution_bits = 16;
  ErrorCode responder_code{};
  std::thread t([&, ch = b.get()] { responder_code = code_of([&] { handshake_respond(*ch); }); });
  std::string report;
  try {
    handshake_initiate(*a, p);
  } catch (const PeerError& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
    report = e.what();
  }
  t.join();
  EXPECT_EQ(responder_code, ErrorCode::validation);
  EXPECT_NE(report.find("sigma_phi >> delta_phi"), std::string::npos) << report;
}

TEST(Handshake, RejectsBadVersion) {
  TcpListener listener({"127.0.0.1", 0});
  ErrorCode code{};
  std::thread t([&] {
    auto ch = listener.accept();
    code = code_of([&] { handshake_respond(*ch); });
  });
  SocketHandle raw(::socket(AF_INET, SOCK_STREAM, 0));
  auto addr = transport::detail::resolve({"127.0.0.1", listener.port()});
  ASSERT_EQ(::connect(raw.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  auto bytes = frame_encode(MessageType::hello, encode_hello(small_params()));
  bytes[4] = 0x02;
  ASSERT_EQ(::send(raw.get(), bytes.data(), bytes.size(), MSG_NOSIGNAL), static_cast<ssize_t>(bytes.size()));
  t.join();
  EXPECT_EQ(code, ErrorCode::bad_version);
}

TEST(KeyblockPayload, LengthAndRoundTrip) {
  BlockTranscript t;
  t.cycle_index = 3;
  t.direction = Direction::b_to_a;
  for (std::uint64_t v : {1u, 65535u, 0u, 4242u}) t.symbols.push_back({v});
  const auto payload = encode_keyblock(t, 16);
  EXPECT_EQ(payload.size(), 4u + 8u);
  EXPECT_EQ(decode_keyblock(payload, 16, Direction::b_to_a), t);
  auto [a, b] = make_loopback_pair();
  send_keyblock(*a, t, 16);
  EXPECT_EQ(recv_keyblock(*b, 16, Direction::b_to_a, 4), t);
}

TEST(KeyblockPayload, WrongLengthIsProtocolError) {
  BlockTranscript t;
  t.symbols.assign(4, {9});
  auto [a, b] = make_loopback_pair();
  send_keyblock(*a, t, 16);
  EXPECT_EQ(code_of([&] { recv_keyblock(*b, 16, Direction::a_to_b, 5); }), ErrorCode::protocol);
}

TEST(Loopback, FramesArriveInOrder) {
  auto [a, b] = make_loopback_pair();
  a->send({MessageType::hello, {1, 2}});
  a->send({MessageType::confirm, {}});
  EXPECT_EQ(b->receive(), (Frame{MessageType::hello, {1, 2}}));
  EXPECT_EQ(b->receive(), (Frame{MessageType::confirm, {}}));
  a->close();
  EXPECT_EQ(code_of([&] { b->receive(); }), ErrorCode::channel);
}

namespace {

SimulationConfig tap_config(std::uint32_t cycles, std::ostream* out) {
  SimulationConfig cfg;
  cfg.params = small_params();
  cfg.seed_key = bits_from_seed(5, 512);
  cfg.seed = 5;
  cfg.options.cycles = cycles;
  cfg.transcript = out;
  return cfg;
}

std::size_t count_frames(const std::string& bytes, MessageType type) {
  std::span<const std::uint8_t> rest(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size());
  std::size_t n = 0;
  while (!rest.empty()) {
    const auto d = frame_decode_prefix(rest);
    if (d.frame.type == type) ++n;
    rest = rest.subspan(d.consumed);
  }
  return n;
}

std::string socket_session(std::uint32_t cycles, SessionSummary* alice_out = nullptr, SessionSummary* bob_out = nullptr) {
  const auto cfg = tap_config(cycles, nullptr);
  TcpListener listener({"127.0.0.1", 0});
  std::optional<ResponderOutcome> bob;
  std::thread t([&] {
    auto ch = listener.accept();
    bob = run_responder(*ch, [&](std::size_t) { return cfg.seed_key; }, cfg.seed, cfg.params);
  });
  std::ostringstream tape;
  {
    Party alice(Role::initiator, cfg.params, cfg.seed_key, cfg.seed);
    auto ch = connect_tcp({"127.0.0.1", listener.port()});
    TapChannel tap(*ch, tape);
    const auto s = run_initiator(alice, tap, cfg.options);
    if (alice_out) *alice_out = s;
    t.join();
  }
  if (bob_out) *bob_out = bob->summary;
  return tape.str();
}

}  // namespace

TEST(Tap, TwoCyclesRecordFourKeyblocks) {
  std::ostringstream out;
  const auto r = simulate_session(tap_config(2, &out));
  EXPECT_TRUE(r.agreement);
  EXPECT_EQ(count_frames(out.str(), MessageType::keyblock), 4u);
  EXPECT_EQ(count_frames(out.str(), MessageType::pa_seed), 4u);

  std::istringstream in(out.str());
  const auto blocks = read_transcript(in, 40);
  ASSERT_EQ(blocks.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(blocks[i].transcript.key_index(), i + 1);
    ASSERT_TRUE(blocks[i].amplification.has_value());
    EXPECT_EQ(blocks[i].amplification->output_bits, r.chain_a[i + 1].bits.size());
  }
}

TEST(Tap, EmptySessionGivesEmptyFile) {
  std::ostringstream out;
  const auto r = simulate_session(tap_config(0, &out));
  EXPECT_EQ(r.initiator.cycles_completed, 0u);
  EXPECT_TRUE(out.str().empty());
}

TEST(Tap, ReplayIsDeterministic) {
  std::ostringstream a, b;
  simulate_session(tap_config(3, &a));
  simulate_session(tap_config(3, &b));
  EXPECT_FALSE(a.str().empty());
  EXPECT_EQ(a.str(), b.str());
}

TEST(Tap, StorageFailureLeavesSessionIntact) {
  FailingBuf buf;
  std::ostream broken(&buf);
  std::ostringstream fine;
  const auto bad = simulate_session(tap_config(2, &broken));
  const auto good = simulate_session(tap_config(2, &fine));
  EXPECT_TRUE(bad.tap_failed);
  EXPECT_FALSE(good.tap_failed);
  EXPECT_TRUE(bad.agreement);
  EXPECT_EQ(bad.chain_a, good.chain_a);
}

TEST(Socket, SessionMatchesLoopbackByteForByte) {
  SessionSummary alice, bob;
  const std::string over_tcp = socket_session(3, &alice, &bob);
  std::ostringstream loop;
  const auto r = simulate_session(tap_config(3, &loop));
  EXPECT_EQ(over_tcp, loop.str());
  ASSERT_TRUE(alice.confirm_match.has_value());
  EXPECT_TRUE(*alice.confirm_match);
  EXPECT_TRUE(*bob.confirm_match);
  EXPECT_EQ(alice.confirm_tag, r.initiator.confirm_tag);
  EXPECT_EQ(alice.total_delivered, r.initiator.total_delivered);
}

TEST(Endpoint, Parsing) {
  const auto ep = parse_endpoint("127.0.0.1:4040");
  EXPECT_EQ(ep.host, "127.0.0.1");
  EXPECT_EQ(ep.port, 4040);
  EXPECT_EQ(parse_endpoint("9000").port, 9000);
  EXPECT_THROW(parse_endpoint("host:notaport"), Error);
}
