#include "bioholo/server.hpp"

#include <csignal>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "bioholo/error.hpp"
#include "bioholo/frame_loop.hpp"
#include "bioholo/scenario.hpp"
#include "bioholo/session.hpp"

namespace bioholo {

namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;
using asio::awaitable;
using asio::use_awaitable;

namespace {

constexpr std::size_t kMaxLine = 1 << 20;
constexpr std::size_t kHistory = 36'000;

/// One peer. Replies are queued in order; observer frames are newest-wins;
/// the haptic stream coalesces into a single pending batch so it is never dropped.
class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(asio::any_io_executor ex, SessionId id) : id_(id), wake_(ex) {
    wake_.expires_at(asio::steady_timer::time_point::max());
  }
  virtual ~Connection() = default;

  SessionId id() const { return id_; }

  void queue_reply(std::string line) {
    replies_.push_back(std::move(line));
    notify();
  }

  /// Returns true when an unsent frame was replaced.
  bool offer_frame(std::string line) {
    const bool dropped = frame_.has_value();
    frame_ = std::move(line);
    notify();
    return dropped;
  }

  void offer_focal(std::string line) {
    focal_ = std::move(line);
    notify();
  }

  void queue_haptic(const FocalBatch& batch) {
    if (!haptic_) {
      haptic_ = batch;
    } else {
      haptic_->seq = batch.seq;
      haptic_->commands.insert(haptic_->commands.end(), batch.commands.begin(),
                               batch.commands.end());
    }
    notify();
  }

  void close_after_flush() {
    closing_ = true;
    notify();
  }

  void abort() {
    closed_ = true;
    shutdown();
    notify();
  }

  awaitable<void> writer() {
    auto self = shared_from_this();
    try {
      while (!closed_) {
        auto next = take_next();
        if (!next) {
          if (closing_) break;
          boost::system::error_code ec;
          co_await wake_.async_wait(asio::redirect_error(use_awaitable, ec));
          continue;
        }
        co_await write_line(*next);
      }
    } catch (const std::exception&) {
    }
    closed_ = true;
    shutdown();
  }

  virtual awaitable<bool> handshake() { co_return true; }
  virtual awaitable<std::optional<std::string>> read_line() = 0;

 protected:
  virtual awaitable<void> write_line(const std::string& line) = 0;
  virtual void shutdown() = 0;

 private:
  void notify() { wake_.cancel(); }

  std::optional<std::string> take_next() {
    if (!replies_.empty()) {
      std::string s = std::move(replies_.front());
      replies_.pop_front();
      return s;
    }
    if (haptic_) {
      std::string s = encode(*haptic_);
      haptic_.reset();
      return s;
    }
    if (frame_) {
      std::string s = std::move(*frame_);
      frame_.reset();
      return s;
    }
    if (focal_) {
      std::string s = std::move(*focal_);
      focal_.reset();
      return s;
    }
    return std::nullopt;
  }

  SessionId id_;
  asio::steady_timer wake_;
  std::deque<std::string> replies_;
  std::optional<std::string> frame_;
  std::optional<std::string> focal_;
  std::optional<FocalBatch> haptic_;
  bool closing_ = false;
  bool closed_ = false;
};

class TcpConnection final : public Connection {
 public:
  TcpConnection(tcp::socket socket, SessionId id)
      : Connection(socket.get_executor(), id), socket_(std::move(socket)) {}

  awaitable<std::optional<std::string>> read_line() override {
    boost::system::error_code ec;
    const std::size_t n = co_await asio::async_read_until(
        socket_, asio::dynamic_buffer(buffer_, kMaxLine), '\n',
        asio::redirect_error(use_awaitable, ec));
    if (ec) co_return std::nullopt;
    std::string line = buffer_.substr(0, n);
    buffer_.erase(0, n);
    co_return line;
  }

 protected:
  awaitable<void> write_line(const std::string& line) override {
    co_await asio::async_write(socket_, asio::buffer(line), use_awaitable);
  }

  void shutdown() override {
    boost::system::error_code ec;
    socket_.shutdown(tcp::socket::shutdown_both, ec);
    socket_.close(ec);
  }

 private:
  tcp::socket socket_;
  std::string buffer_;
};

/// WebSocket peer: one protocol line per text message.
class WsConnection final : public Connection {
 public:
  WsConnection(tcp::socket socket, SessionId id)
      : Connection(socket.get_executor(), id), ws_(std::move(socket)) {}

  awaitable<bool> handshake() override {
    boost::system::error_code ec;
    co_await ws_.async_accept(asio::redirect_error(use_awaitable, ec));
    if (ec) co_return false;
    ws_.text(true);
    ws_.read_message_max(kMaxLine);
    co_return true;
  }

  awaitable<std::optional<std::string>> read_line() override {
    while (pending_.empty()) {
      boost::system::error_code ec;
      co_await ws_.async_read(buffer_, asio::redirect_error(use_awaitable, ec));
      if (ec) co_return std::nullopt;
      const std::string data = beast::buffers_to_string(buffer_.data());
      buffer_.consume(buffer_.size());
      std::size_t start = 0;
      while (start <= data.size()) {
        const auto pos = data.find('\n', start);
        const std::string part = data.substr(start, pos == std::string::npos ? pos : pos - start);
        if (!part.empty()) pending_.push_back(part);
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
    }
    std::string line = std::move(pending_.front());
    pending_.pop_front();
    co_return line;
  }

 protected:
  awaitable<void> write_line(const std::string& line) override {
    std::string_view body(line);
    if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
    co_await ws_.async_write(asio::buffer(body.data(), body.size()), use_awaitable);
  }

  void shutdown() override {
    boost::system::error_code ec;
    beast::get_lowest_layer(ws_).shutdown(tcp::socket::shutdown_both, ec);
    beast::get_lowest_layer(ws_).close(ec);
  }

 private:
  beast::websocket::stream<tcp::socket> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> pending_;
};

tcp::acceptor bind_listener(asio::io_context& io, const std::string& address, std::uint16_t port) {
  tcp::acceptor acceptor(io);
  const tcp::endpoint endpoint(asio::ip::make_address(address), port);
  boost::system::error_code ec;
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error(ErrorCode::PortInUse,
                "cannot listen on " + address + ":" + std::to_string(port) + " (" + ec.message() + ")");
  }
  return acceptor;
}

template <typename T>
void push_bounded(std::vector<T>& v, T value) {
  if (v.size() >= kHistory) v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(kHistory / 10));
  v.push_back(std::move(value));
}

}  // namespace

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
  Impl(AppConfig cfg, ServerOptions opts)
      : config(std::move(cfg)),
        options(opts),
        loop(config.loop),
        router(registry, loop),
        tcp_acceptor(bind_listener(io, config.server.bind_address, config.server.tcp_port)),
        ws_acceptor(bind_listener(io, config.server.bind_address, config.server.ws_port)),
        frame_timer(io),
        signals(io),
        virtual_clock(config.loop.frame_rate) {
    if (options.clock == ClockMode::Virtual && !options.ticks) {
      throw Error(ErrorCode::InvalidConfig, "virtual-clock serving needs a tick budget");
    }
    if (!config.server.focal_log.empty()) {
      focal_file.open(config.server.focal_log);
      if (!focal_file) throw Error(ErrorCode::InvalidConfig, "server.focal_log: cannot open " + config.server.focal_log);
      focal_writer.emplace(focal_file, config.loop.mode, config.loop.render);
    }
    if (!config.server.frame_log.empty()) {
      frame_file.open(config.server.frame_log);
      if (!frame_file) throw Error(ErrorCode::InvalidConfig, "server.frame_log: cannot open " + config.server.frame_log);
      frame_file << frame_log_header();
    }
  }

  double now() const {
    return options.clock == ClockMode::Virtual ? virtual_clock.now() : wall_clock.now();
  }

  awaitable<void> accept_loop(tcp::acceptor& acceptor, bool websocket) {
    auto self = shared_from_this();
    while (!stopping) {
      tcp::socket socket(io);
      boost::system::error_code ec;
      co_await acceptor.async_accept(socket, asio::redirect_error(use_awaitable, ec));
      if (ec) {
        if (stopping || ec == asio::error::operation_aborted) break;
        continue;
      }
      socket.set_option(tcp::no_delay(true), ec);
      const SessionId id = router.open(now());
      std::shared_ptr<Connection> conn;
      if (websocket) {
        conn = std::make_shared<WsConnection>(std::move(socket), id);
      } else {
        conn = std::make_shared<TcpConnection>(std::move(socket), id);
      }
      connections[id] = conn;
      asio::co_spawn(io, session(conn), asio::detached);
    }
  }

  awaitable<void> session(std::shared_ptr<Connection> conn) {
    auto self = shared_from_this();
    const SessionId id = conn->id();
    if (co_await conn->handshake()) {
      asio::co_spawn(io, conn->writer(), asio::detached);
      while (!stopping) {
        auto line = co_await conn->read_line();
        if (!line) break;
        const RouteResult r = router.on_line(id, *line, now());
        if (r.forwarded == "hr") {
          std::lock_guard lock(stats_mutex);
          push_bounded(stats.hr_arrivals, now());
        }
        for (const auto& reply : r.replies) conn->queue_reply(encode(reply));
        if (r.close) break;
      }
    }
    conn->close_after_flush();
    router.close(id);
    connections.erase(id);
  }

  awaitable<void> frame_loop() {
    auto self = shared_from_this();
    const double period = 1.0 / config.loop.frame_rate;
    for (std::uint64_t n = 1; !stopping; ++n) {
      double t = 0.0;
      if (options.clock == ClockMode::Wall) {
        frame_timer.expires_at(wall_clock.at(static_cast<double>(n) * period));
        boost::system::error_code ec;
        co_await frame_timer.async_wait(asio::redirect_error(use_awaitable, ec));
        if (stopping) break;
        t = wall_clock.now();
      } else {
        co_await asio::post(io, use_awaitable);
        if (stopping) break;
        t = virtual_clock.advance();
      }
      publish(loop.tick(t));
      if (options.ticks && n >= *options.ticks) {
        do_stop();
        break;
      }
    }
  }

  void publish(TickOutput out) {
    std::size_t dropped = 0;
    const std::string frame_line = encode(out.frame);
    const bool has_focal = !out.focal.commands.empty();
    const std::string focal_line = has_focal ? encode(out.focal) : std::string{};
    for (const SessionId id : registry.observers()) {
      const auto it = connections.find(id);
      if (it == connections.end()) continue;
      if (it->second->offer_frame(frame_line)) ++dropped;
      if (has_focal) it->second->offer_focal(focal_line);
    }
    if (const auto haptic = registry.haptic_session(); haptic && has_focal) {
      if (const auto it = connections.find(*haptic); it != connections.end()) {
        it->second->queue_haptic(out.focal);
      }
    }
    for (const auto& reply : out.replies) {
      if (const auto it = connections.find(reply.to); it != connections.end()) {
        it->second->queue_reply(encode(reply.message));
      }
    }
    if (frame_file.is_open()) frame_file << frame_log_row(out.frame);
    if (focal_writer) focal_writer->write(out.focal.commands);

    std::lock_guard lock(stats_mutex);
    ++stats.frames;
    stats.last_seq = out.frame.seq;
    stats.sessions = registry.size();
    stats.malformed = router.malformed();
    stats.observer_frames_dropped += dropped;
    push_bounded(stats.frame_times, out.frame.t);
  }

  void do_stop() {
    if (stopping) return;
    stopping = true;
    boost::system::error_code ec;
    tcp_acceptor.close(ec);
    ws_acceptor.close(ec);
    frame_timer.cancel();
    signals.cancel(ec);
    for (auto& [id, conn] : connections) conn->abort();
    io.stop();
  }

  AppConfig config;
  ServerOptions options;
  asio::io_context io;
  FrameLoop loop;
  SessionRegistry registry;
  SessionRouter router;
  tcp::acceptor tcp_acceptor;
  tcp::acceptor ws_acceptor;
  asio::steady_timer frame_timer;
  asio::signal_set signals;
  WallClock wall_clock;
  VirtualClock virtual_clock;
  std::map<SessionId, std::shared_ptr<Connection>> connections;
  bool stopping = false;

  std::ofstream focal_file;
  std::optional<FocalLogWriter> focal_writer;
  std::ofstream frame_file;

  mutable std::mutex stats_mutex;
  ServerStats stats;
};

Server::Server(AppConfig config, ServerOptions options)
    : impl_(std::make_shared<Impl>(std::move(config), options)) {}

Server::~Server() {
  if (impl_) {
    impl_->connections.clear();
  }
}

void Server::run() {
  Impl& s = *impl_;
  if (s.options.handle_signals) {
    s.signals.add(SIGINT);
    s.signals.add(SIGTERM);
    s.signals.async_wait([impl = impl_](const boost::system::error_code& ec, int) {
      if (!ec) impl->do_stop();
    });
  }
  asio::co_spawn(s.io, s.accept_loop(s.tcp_acceptor, false), asio::detached);
  asio::co_spawn(s.io, s.accept_loop(s.ws_acceptor, true), asio::detached);
  asio::co_spawn(s.io, s.frame_loop(), asio::detached);
  s.io.run();
  if (s.focal_file.is_open()) s.focal_file.flush();
  if (s.frame_file.is_open()) s.frame_file.flush();
}

void Server::stop() {
  asio::post(impl_->io, [impl = impl_] { impl->do_stop(); });
}

std::uint16_t Server::tcp_port() const { return impl_->tcp_acceptor.local_endpoint().port(); }
std::uint16_t Server::ws_port() const { return impl_->ws_acceptor.local_endpoint().port(); }

ServerStats Server::stats() const {
  std::lock_guard lock(impl_->stats_mutex);
  return impl_->stats;
}

}  // namespace bioholo
