#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "bioholo/emulators.hpp"
#include "bioholo/protocol.hpp"

namespace bioholo {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7340;
};

/// Blocking newline-delimited client for the TCP endpoint.
class LineClient {
 public:
  /// Throws ConnectionRefused when the server is unreachable.
  explicit LineClient(const Endpoint& endpoint);
  ~LineClient();
  LineClient(LineClient&&) noexcept;
  LineClient& operator=(LineClient&&) noexcept;

  void send(const Message& m);
  void send_raw(const std::string& line);

  /// Next decoded message, or nullopt on timeout. Throws on a closed
  /// connection (InvalidArgument) or an undecodable line.
  std::optional<Message> receive(std::chrono::milliseconds timeout);

  bool is_open() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct EmulatorRun {
  std::size_t messages = 0;
  std::vector<double> send_times;  ///< seconds since the emulator started
};

/// Streams a heart-rate trace: Hello, then a reading at t = 0 and every
/// emit interval until `duration` (inclusive) or a stop request.
EmulatorRun run_wearable_emulator(const HrTrace& trace, const Endpoint& endpoint, double duration,
                                  std::stop_token stop = {});

/// Streams hand frames at the tracker rate; frames outside the tracker
/// frustum are not sent.
EmulatorRun run_hand_emulator(const HandScript& script, HandId hand, const TrackerConfig& tracker,
                              const Endpoint& endpoint, double duration, std::stop_token stop = {});

/// Receives focal batches, validates and logs them. Throws DuplicateRole if
/// another haptic device holds the role.
HapticDiagnostics run_haptic_emulator(const Endpoint& endpoint, std::ostream* log,
                                      const HapticMode& mode, const RenderParams& params,
                                      double duration, std::stop_token stop = {});

}  // namespace bioholo
