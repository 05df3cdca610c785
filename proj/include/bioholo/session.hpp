#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "bioholo/frame_loop.hpp"
#include "bioholo/protocol.hpp"

namespace bioholo {

struct SessionInfo {
  bool greeted = false;
  DeviceKind kind = DeviceKind::Ui;
  bool subscribe = false;
  double last_seen = 0.0;
};

/// Tracks connected peers and enforces the handshake rules: the first message
/// must be Hello, protocol versions must match, and at most one haptic device
/// may be connected.
class SessionRegistry {
 public:
  SessionId open(double now = 0.0);
  void close(SessionId id);

  /// Registers the role carried by a Hello. Returns the error to send back
  /// when the handshake is rejected; the caller then closes the connection.
  std::optional<ErrorReply> handshake(SessionId id, const Message& first, double now = 0.0);

  void touch(SessionId id, double now);
  const SessionInfo* find(SessionId id) const;
  std::optional<SessionId> haptic_session() const;
  std::vector<SessionId> observers() const;
  std::size_t size() const { return sessions_.size(); }

 private:
  std::map<SessionId, SessionInfo> sessions_;
  SessionId next_id_ = 1;
};

struct RouteResult {
  std::vector<Message> replies;
  bool close = false;
  /// Type tag of a message forwarded to the frame loop, empty otherwise.
  std::string_view forwarded;
};

/// Transport-independent session handling shared by the socket server and the
/// in-process harness: decode, handshake gate, and forwarding into the frame loop.
class SessionRouter {
 public:
  SessionRouter(SessionRegistry& registry, FrameLoop& loop) : registry_(registry), loop_(loop) {}

  SessionId open(double now = 0.0) { return registry_.open(now); }
  void close(SessionId id) { registry_.close(id); }

  RouteResult on_line(SessionId id, std::string_view line, double now = 0.0);
  RouteResult on_message(SessionId id, Message message, double now = 0.0);

  std::size_t malformed() const { return malformed_; }

 private:
  SessionRegistry& registry_;
  FrameLoop& loop_;
  std::size_t malformed_ = 0;
};

}  // namespace bioholo
