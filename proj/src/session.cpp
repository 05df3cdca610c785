#include "bioholo/session.hpp"

#include "bioholo/error.hpp"

namespace bioholo {

SessionId SessionRegistry::open(double now) {
  const SessionId id = next_id_++;
  sessions_[id] = SessionInfo{false, DeviceKind::Ui, false, now};
  return id;
}

void SessionRegistry::close(SessionId id) { sessions_.erase(id); }

std::optional<ErrorReply> SessionRegistry::handshake(SessionId id, const Message& first,
                                                     double now) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return ErrorReply{"unknown-session", "session is not open"};
  const auto* hello = std::get_if<Hello>(&first);
  if (hello == nullptr) {
    return ErrorReply{"not-hello", std::string("first message must be hello, got ") +
                                       std::string(type_name(first))};
  }
  if (hello->proto != kProtocolVersion) {
    return ErrorReply{"version-mismatch", "protocol " + std::to_string(hello->proto) +
                                              " not supported"};
  }
  if (hello->device == DeviceKind::HapticDevice && haptic_session()) {
    return ErrorReply{"duplicate-role", "a haptic_device session is already active"};
  }
  SessionInfo& info = it->second;
  info.greeted = true;
  info.kind = hello->device;
  info.subscribe = hello->subscribe.value_or(subscribes_by_default(hello->device));
  info.last_seen = now;
  return std::nullopt;
}

void SessionRegistry::touch(SessionId id, double now) {
  if (auto it = sessions_.find(id); it != sessions_.end()) it->second.last_seen = now;
}

const SessionInfo* SessionRegistry::find(SessionId id) const {
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : &it->second;
}

std::optional<SessionId> SessionRegistry::haptic_session() const {
  for (const auto& [id, info] : sessions_) {
    if (info.greeted && info.kind == DeviceKind::HapticDevice) return id;
  }
  return std::nullopt;
}

std::vector<SessionId> SessionRegistry::observers() const {
  std::vector<SessionId> out;
  for (const auto& [id, info] : sessions_) {
    if (info.greeted && info.subscribe && info.kind != DeviceKind::HapticDevice) out.push_back(id);
  }
  return out;
}

RouteResult SessionRouter::on_line(SessionId id, std::string_view line, double now) {
  const SessionInfo* info = registry_.find(id);
  const bool greeted = info != nullptr && info->greeted;
  try {
    return on_message(id, decode(line), now);
  } catch (const Error& e) {
    ++malformed_;
    RouteResult r;
    switch (e.code()) {
      case ErrorCode::VersionMismatch: r.replies.push_back(ErrorReply{"version-mismatch", e.what()}); break;
      case ErrorCode::UnknownType: r.replies.push_back(ErrorReply{"unknown-type", e.what()}); break;
      default: r.replies.push_back(ErrorReply{"malformed", e.what()}); break;
    }
    // Before a successful hello only a version mismatch is fatal; garbage is
    // reported and the peer may retry.
    r.close = !greeted && e.code() == ErrorCode::VersionMismatch;
    return r;
  }
}

RouteResult SessionRouter::on_message(SessionId id, Message message, double now) {
  RouteResult r;
  const SessionInfo* info = registry_.find(id);
  if (info == nullptr) {
    r.replies.push_back(ErrorReply{"unknown-session", "session is not open"});
    r.close = true;
    return r;
  }
  if (!info->greeted) {
    if (auto err = registry_.handshake(id, message, now)) {
      r.replies.push_back(*err);
      r.close = true;
    }
    return r;
  }
  registry_.touch(id, now);
  if (std::holds_alternative<HrUpdate>(message) || std::holds_alternative<HandUpdate>(message) ||
      std::holds_alternative<CalibrationSet>(message)) {
    r.forwarded = type_name(message);
    loop_.post(id, std::move(message));
  } else {
    r.replies.push_back(ErrorReply{"unexpected-type", std::string(type_name(message)) +
                                                          " is not accepted from clients"});
  }
  return r;
}

}  // namespace bioholo
