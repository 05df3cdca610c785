#include "bioholo/net_client.hpp"

#include <algorithm>
#include <thread>

#include <boost/asio.hpp>

#include "bioholo/error.hpp"

namespace bioholo {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

struct LineClient::Impl {
  asio::io_context io;
  tcp::socket socket{io};
  std::string buffer;
  bool open = false;

  std::optional<std::string> take_line() {
    const auto pos = buffer.find('\n');
    if (pos == std::string::npos) return std::nullopt;
    std::string line = buffer.substr(0, pos + 1);
    buffer.erase(0, pos + 1);
    return line;
  }
};

LineClient::LineClient(const Endpoint& endpoint) : impl_(std::make_unique<Impl>()) {
  boost::system::error_code ec;
  tcp::resolver resolver(impl_->io);
  const auto results = resolver.resolve(endpoint.host, std::to_string(endpoint.port), ec);
  if (!ec) asio::connect(impl_->socket, results, ec);
  if (ec) {
    throw Error(ErrorCode::ConnectionRefused,
                endpoint.host + ":" + std::to_string(endpoint.port) + " (" + ec.message() + ")");
  }
  impl_->socket.set_option(tcp::no_delay(true), ec);
  impl_->open = true;
}

LineClient::~LineClient() {
  if (impl_ && impl_->open) {
    boost::system::error_code ec;
    impl_->socket.shutdown(tcp::socket::shutdown_both, ec);
    impl_->socket.close(ec);
  }
}

LineClient::LineClient(LineClient&&) noexcept = default;
LineClient& LineClient::operator=(LineClient&&) noexcept = default;

void LineClient::send(const Message& m) { send_raw(encode(m)); }

void LineClient::send_raw(const std::string& line) {
  if (!impl_->open) throw Error(ErrorCode::InvalidArgument, "connection closed");
  std::string out = line;
  if (out.empty() || out.back() != '\n') out.push_back('\n');
  boost::system::error_code ec;
  asio::write(impl_->socket, asio::buffer(out), ec);
  if (ec) {
    impl_->open = false;
    throw Error(ErrorCode::InvalidArgument, "connection closed: " + ec.message());
  }
}

std::optional<Message> LineClient::receive(std::chrono::milliseconds timeout) {
  Impl& s = *impl_;
  if (auto line = s.take_line()) return decode(*line);
  if (!s.open) throw Error(ErrorCode::InvalidArgument, "connection closed");

  boost::system::error_code result = asio::error::would_block;
  asio::async_read_until(s.socket, asio::dynamic_buffer(s.buffer), '\n',
                         [&](const boost::system::error_code& ec, std::size_t) { result = ec; });
  s.io.restart();
  s.io.run_for(timeout);
  if (result == asio::error::would_block) {
    s.socket.cancel();
    s.io.restart();
    s.io.run();
  }
  if (auto line = s.take_line()) return decode(*line);
  if (result && result != asio::error::operation_aborted) {
    s.open = false;
    throw Error(ErrorCode::InvalidArgument, "connection closed: " + result.message());
  }
  return std::nullopt;
}

bool LineClient::is_open() const { return impl_ && impl_->open; }

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Sleeps until `target` seconds after start, waking early on a stop request.
void sleep_until(Clock::time_point start, double target, const std::stop_token& stop) {
  constexpr auto kSlice = std::chrono::milliseconds(50);
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(target));
  while (!stop.stop_requested()) {
    const auto now = Clock::now();
    if (now >= deadline) return;
    std::this_thread::sleep_for(std::min<Clock::duration>(deadline - now, kSlice));
  }
}

}  // namespace

EmulatorRun run_wearable_emulator(const HrTrace& trace, const Endpoint& endpoint, double duration,
                                  std::stop_token stop) {
  LineClient client(endpoint);
  WearableEmulator emu(trace);
  client.send(emu.hello());
  EmulatorRun run;
  const auto start = Clock::now();
  while (!stop.stop_requested()) {
    const double t = std::min(seconds_since(start), duration);
    for (const auto& m : emu.poll(t)) {
      client.send(m);
      ++run.messages;
      run.send_times.push_back(seconds_since(start));
    }
    const double next = emu.next_emit_time();
    if (next > duration) break;
    sleep_until(start, next, stop);
  }
  return run;
}

EmulatorRun run_hand_emulator(const HandScript& script, HandId hand, const TrackerConfig& tracker,
                              const Endpoint& endpoint, double duration, std::stop_token stop) {
  LineClient client(endpoint);
  HandEmulator emu(script, hand, tracker);
  client.send(emu.hello());
  EmulatorRun run;
  const auto start = Clock::now();
  while (!stop.stop_requested()) {
    const double t = std::min(seconds_since(start), duration);
    for (const auto& m : emu.poll(t)) {
      client.send(m);
      ++run.messages;
      run.send_times.push_back(seconds_since(start));
    }
    const double next = emu.sample_time(emu.emitted() + emu.dropped_out_of_fov());
    if (next > duration) break;
    sleep_until(start, next, stop);
  }
  return run;
}

HapticDiagnostics run_haptic_emulator(const Endpoint& endpoint, std::ostream* log,
                                      const HapticMode& mode, const RenderParams& params,
                                      double duration, std::stop_token stop) {
  LineClient client(endpoint);
  HapticEmulator emu(log, mode, params);
  client.send(emu.hello());
  const auto start = Clock::now();
  while (!stop.stop_requested() && seconds_since(start) < duration) {
    const auto remaining = duration - seconds_since(start);
    const auto wait = std::chrono::milliseconds(
        std::clamp<long>(static_cast<long>(remaining * 1000.0), 1, 100));
    std::optional<Message> m;
    try {
      m = client.receive(wait);
    } catch (const Error& e) {
      if (!client.is_open()) break;
      throw;
    }
    if (!m) continue;
    if (const auto* batch = std::get_if<FocalBatch>(&*m)) {
      emu.consume(*batch);
    } else if (const auto* err = std::get_if<ErrorReply>(&*m)) {
      if (err->code == "duplicate-role") throw Error(ErrorCode::DuplicateRole, err->detail);
    }
  }
  return emu.diagnostics();
}

}  // namespace bioholo
