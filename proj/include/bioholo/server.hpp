#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bioholo/clock.hpp"
#include "bioholo/config.hpp"

namespace bioholo {

struct ServerOptions {
  ClockMode clock = ClockMode::Wall;
  /// Stop after this many frames (required for virtual-clock serving).
  std::optional<std::uint64_t> ticks;
  /// Install SIGINT/SIGTERM handlers that stop the server gracefully.
  bool handle_signals = false;
};

struct ServerStats {
  std::uint64_t frames = 0;
  std::size_t sessions = 0;
  std::size_t malformed = 0;
  std::size_t observer_frames_dropped = 0;
  std::vector<double> frame_times;  ///< server time of each tick (bounded history)
  std::vector<double> hr_arrivals;  ///< server time at which HrUpdates arrived
  std::optional<std::uint64_t> last_seq;
};

/// Synchronization server: accepts device sessions over TCP and WebSocket,
/// runs the frame loop at the configured rate, and fans out FrameState and
/// FocalBatch messages. All networking and the frame loop share one I/O
/// thread; the frame loop is the only mutator of scene state.
class Server {
 public:
  /// Binds both listeners immediately. Port 0 picks an ephemeral port.
  /// Throws PortInUse naming the port.
  Server(AppConfig config, ServerOptions options = {});
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Runs until stop(), a signal, or the tick budget. Flushes logs on exit.
  void run();

  /// Thread-safe.
  void stop();

  std::uint16_t tcp_port() const;
  std::uint16_t ws_port() const;

  /// Thread-safe snapshot.
  ServerStats stats() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace bioholo
