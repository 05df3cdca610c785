#include "bioholo/protocol.hpp"

#include <nlohmann/json.hpp>

#include "bioholo/error.hpp"

namespace bioholo {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::MalformedMessage, "expected [x,y,z]");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json vecs(const std::vector<Vec3>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(vec(v));
  return a;
}

std::vector<Vec3> vecs(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::MalformedMessage, "expected a point list");
  std::vector<Vec3> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(vec(v));
  return out;
}

json to_json(const Message& m) {
  json j;
  j["type"] = type_name(m);
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, Hello>) {
          j["proto"] = msg.proto;
          j["device"] = to_string(msg.device);
          if (msg.subscribe) j["subscribe"] = *msg.subscribe;
        } else if constexpr (std::is_same_v<T, HrUpdate>) {
          j["t"] = msg.sample.t;
          j["bpm"] = msg.sample.bpm;
        } else if constexpr (std::is_same_v<T, HandUpdate>) {
          j["frame"] = to_string(msg.frame);
          j["t"] = msg.hand.t;
          j["hand"] = to_string(msg.hand.hand);
          j["palm"] = vec(msg.hand.palm_center);
          j["normal"] = vec(msg.hand.palm_normal);
          j["joints"] = vecs(msg.hand.joints);
        } else if constexpr (std::is_same_v<T, FrameState>) {
          j["frame"] = to_string(FrameId::Device);
          j["seq"] = msg.seq;
          j["t"] = msg.t;
          j["anchor"] = vec(msg.anchor);
          j["radii"] = vec(msg.radii);
          j["scale"] = msg.scale;
          j["phase"] = msg.phase;
          j["bpm"] = msg.bpm;
          j["flatline"] = msg.flatline;
          json hands = json::array();
          for (const auto& h : msg.hands) {
            hands.push_back({{"hand", to_string(h.hand)},
                             {"haptic_active", h.haptic_active},
                             {"palm", vec(h.palm)},
                             {"joints", vecs(h.joints)}});
          }
          j["hands"] = std::move(hands);
        } else if constexpr (std::is_same_v<T, FocalBatch>) {
          j["frame"] = to_string(FrameId::Device);
          j["seq"] = msg.seq;
          json cmds = json::array();
          for (const auto& c : msg.commands) {
            cmds.push_back(
                {{"t", c.t}, {"hand", to_string(c.hand)}, {"pos", vec(c.pos)}, {"i", c.intensity}});
          }
          j["commands"] = std::move(cmds);
        } else if constexpr (std::is_same_v<T, CalibrationSet>) {
          j["src_frame"] = to_string(FrameId::Headset);
          j["dst_frame"] = to_string(FrameId::Device);
          json pairs = json::array();
          for (const auto& p : msg.pairs) pairs.push_back({{"src", vec(p.src)}, {"dst", vec(p.dst)}});
          j["pairs"] = std::move(pairs);
        } else if constexpr (std::is_same_v<T, CalibrationReply>) {
          j["rotation"] = msg.rotation;
          j["translation"] = vec(msg.translation);
          j["residual"] = msg.residual;
        } else if constexpr (std::is_same_v<T, ErrorReply>) {
          j["code"] = msg.code;
          j["detail"] = msg.detail;
        }
      },
      m);
  return j;
}

Message from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "hello") {
    Hello h;
    h.proto = j.at("proto").get<int>();
    if (h.proto != kProtocolVersion) {
      throw Error(ErrorCode::VersionMismatch, "protocol " + std::to_string(h.proto) +
                                                  ", expected " +
                                                  std::to_string(kProtocolVersion));
    }
    h.device = device_kind_from_string(j.at("device").get<std::string>());
    if (j.contains("subscribe")) h.subscribe = j.at("subscribe").get<bool>();
    return h;
  }
  if (type == "hr") {
    return HrUpdate{{j.at("t").get<double>(), j.at("bpm").get<double>()}};
  }
  if (type == "hand") {
    HandUpdate u;
    u.frame = frame_from_string(j.at("frame").get<std::string>());
    u.hand.t = j.at("t").get<double>();
    u.hand.hand = hand_from_string(j.at("hand").get<std::string>());
    u.hand.palm_center = vec(j.at("palm"));
    u.hand.palm_normal = vec(j.at("normal"));
    u.hand.joints = vecs(j.at("joints"));
    return u;
  }
  if (type == "frame") {
    FrameState f;
    f.seq = j.at("seq").get<std::uint64_t>();
    f.t = j.at("t").get<double>();
    f.anchor = vec(j.at("anchor"));
    f.radii = vec(j.at("radii"));
    f.scale = j.at("scale").get<double>();
    f.phase = j.at("phase").get<double>();
    f.bpm = j.at("bpm").get<double>();
    f.flatline = j.at("flatline").get<bool>();
    for (const auto& h : j.at("hands")) {
      f.hands.push_back({hand_from_string(h.at("hand").get<std::string>()),
                         h.at("haptic_active").get<bool>(), vec(h.at("palm")),
                         vecs(h.at("joints"))});
    }
    return f;
  }
  if (type == "focal") {
    FocalBatch b;
    b.seq = j.at("seq").get<std::uint64_t>();
    for (const auto& c : j.at("commands")) {
      b.commands.push_back({c.at("t").get<double>(), hand_from_string(c.at("hand").get<std::string>()),
                            vec(c.at("pos")), c.at("i").get<double>()});
    }
    return b;
  }
  if (type == "calibration_set") {
    CalibrationSet c;
    for (const auto& p : j.at("pairs")) c.pairs.push_back({vec(p.at("src")), vec(p.at("dst"))});
    return c;
  }
  if (type == "calibration_reply") {
    CalibrationReply r;
    r.rotation = j.at("rotation").get<std::array<double, 9>>();
    r.translation = vec(j.at("translation"));
    r.residual = j.at("residual").get<double>();
    return r;
  }
  if (type == "error") {
    return ErrorReply{j.at("code").get<std::string>(), j.at("detail").get<std::string>()};
  }
  throw Error(ErrorCode::UnknownType, "unknown message type '" + type + "'");
}

}  // namespace

std::string_view to_string(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::Wearable: return "wearable";
    case DeviceKind::HandTracker: return "hand_tracker";
    case DeviceKind::Headset: return "headset";
    case DeviceKind::HapticDevice: return "haptic_device";
    case DeviceKind::Ui: return "ui";
  }
  return "ui";
}

DeviceKind device_kind_from_string(std::string_view name) {
  if (name == "wearable") return DeviceKind::Wearable;
  if (name == "hand_tracker") return DeviceKind::HandTracker;
  if (name == "headset") return DeviceKind::Headset;
  if (name == "haptic_device") return DeviceKind::HapticDevice;
  if (name == "ui") return DeviceKind::Ui;
  throw Error(ErrorCode::MalformedMessage, "unknown device kind '" + std::string(name) + "'");
}

bool subscribes_by_default(DeviceKind kind) {
  return kind == DeviceKind::Headset || kind == DeviceKind::Ui;
}

std::string_view type_name(const Message& m) {
  static constexpr std::string_view names[] = {"hello", "hr",  "hand",
                                               "frame", "focal", "calibration_set",
                                               "calibration_reply", "error"};
  return names[m.index()];
}

std::string encode(const Message& m) { return to_json(m).dump(-1, ' ', false, json::error_handler_t::replace) + '\n'; }

Message decode(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedMessage, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::MalformedMessage, "message is not a JSON object");
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw Error(ErrorCode::MalformedMessage, "missing type tag");
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedMessage, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) throw Error(ErrorCode::MalformedMessage, e.what());
    throw;
  }
}

CalibrationReply make_calibration_reply(const RigidTransform& t, double residual) {
  CalibrationReply r;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r.rotation[static_cast<std::size_t>(row * 3 + col)] = t.rotation()(row, col);
  }
  r.translation = t.translation();
  r.residual = residual;
  return r;
}

}  // namespace bioholo
