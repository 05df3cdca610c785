#include "bioholo/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bioholo/csv.hpp"
#include "bioholo/error.hpp"

namespace bioholo {

namespace pt = boost::property_tree;

namespace {

std::string unquote(std::string s) {
  s = csv::trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

double number(const std::string& key, const std::string& raw) {
  try {
    return csv::parse_double(unquote(raw));
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidConfig, key + ": expected a number, got '" + raw + "'");
  }
}

std::uint16_t port(const std::string& key, const std::string& raw) {
  const double v = number(key, raw);
  if (v < 0.0 || v > 65535.0 || v != static_cast<double>(static_cast<long>(v))) {
    throw Error(ErrorCode::InvalidConfig, key + ": not a valid port '" + raw + "'");
  }
  return static_cast<std::uint16_t>(v);
}

Vec3 vec3(const std::string& key, const std::string& raw) {
  try {
    return parse_vec3(unquote(raw));
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidConfig, key + ": expected three numbers, got '" + raw + "'");
  }
}

template <typename Apply>
void each_key(const pt::ptree& tree, const std::string& section,
              const std::set<std::string>& known, Apply apply) {
  const auto child = tree.get_child_optional(section);
  if (!child) return;
  for (const auto& [name, node] : *child) {
    const std::string key = section + "." + name;
    if (!known.contains(name)) throw Error(ErrorCode::InvalidConfig, key + ": unknown key");
    apply(name, key, node.data());
  }
}

}  // namespace

Vec3 parse_vec3(std::string_view text) {
  std::string s = csv::trim(text);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  const auto parts = csv::split(s, ',');
  if (parts.size() != 3) throw Error(ErrorCode::ParseError, "expected x,y,z");
  return {csv::parse_double(parts[0]), csv::parse_double(parts[1]), csv::parse_double(parts[2])};
}

void apply_config(const pt::ptree& tree, AppConfig& cfg) {
  each_key(tree, "scene", {"anchor", "radii", "pulse_amplitude"},
           [&](const std::string& name, const std::string& key, const std::string& v) {
             if (name == "anchor") cfg.loop.heart.anchor = vec3(key, v);
             if (name == "radii") cfg.loop.heart.base_radii = vec3(key, v);
             if (name == "pulse_amplitude") cfg.loop.heart.pulse_amplitude = number(key, v);
           });

  std::optional<std::string> mode;
  each_key(tree, "haptics",
           {"mode", "am_frequency", "r_max", "r_min", "draw_rate", "base_intensity",
            "min_intensity", "command_rate"},
           [&](const std::string& name, const std::string& key, const std::string& v) {
             auto& stm = cfg.loop.render.stm;
             if (name == "mode") mode = unquote(v);
             if (name == "am_frequency") cfg.am_frequency = number(key, v);
             if (name == "r_max") stm.r_max = number(key, v);
             if (name == "r_min") stm.r_min = number(key, v);
             if (name == "draw_rate") stm.draw_rate = number(key, v);
             if (name == "base_intensity") stm.base_intensity = number(key, v);
             if (name == "min_intensity") stm.min_intensity = number(key, v);
             if (name == "command_rate") cfg.loop.render.command_rate = number(key, v);
           });
  if (mode || cfg.loop.mode.kind() == HapticMode::Kind::AmFixed) {
    const std::string m = mode.value_or("am");
    try {
      cfg.loop.mode = HapticMode::parse(m, cfg.am_frequency);
    } catch (const Error& e) {
      const char* key = e.code() == ErrorCode::ModulationOutOfPerceptibleRange
                            ? "haptics.am_frequency"
                            : "haptics.mode";
      throw Error(ErrorCode::InvalidConfig, std::string(key) + ": " + e.what());
    }
  }

  each_key(tree, "array", {"rows", "cols", "pitch", "carrier", "speed_of_sound", "amplitude"},
           [&](const std::string& name, const std::string& key, const std::string& v) {
             if (name == "rows") cfg.array.rows = static_cast<int>(number(key, v));
             if (name == "cols") cfg.array.cols = static_cast<int>(number(key, v));
             if (name == "pitch") cfg.array.pitch = number(key, v);
             if (name == "carrier") cfg.array.carrier_hz = number(key, v);
             if (name == "speed_of_sound") cfg.array.speed_of_sound = number(key, v);
             if (name == "amplitude") cfg.array.amplitude = number(key, v);
           });

  each_key(tree, "timing", {"frame_rate", "hr_window", "hr_staleness", "hand_stale"},
           [&](const std::string& name, const std::string& key, const std::string& v) {
             if (name == "frame_rate") cfg.loop.frame_rate = number(key, v);
             if (name == "hr_window") cfg.loop.hr.window = number(key, v);
             if (name == "hr_staleness") cfg.loop.hr.staleness_timeout = number(key, v);
             if (name == "hand_stale") cfg.loop.hand_stale = number(key, v);
           });

  each_key(tree, "tracker", {"fov_wide", "fov_deep", "range", "rate"},
           [&](const std::string& name, const std::string& key, const std::string& v) {
             if (name == "fov_wide") cfg.tracker.fov_wide_deg = number(key, v);
             if (name == "fov_deep") cfg.tracker.fov_deep_deg = number(key, v);
             if (name == "range") cfg.tracker.range = number(key, v);
             if (name == "rate") cfg.tracker.rate_hz = number(key, v);
           });

  each_key(tree, "server", {"bind", "tcp_port", "ws_port", "focal_log", "frame_log"},
           [&](const std::string& name, const std::string& key, const std::string& v) {
             if (name == "bind") cfg.server.bind_address = unquote(v);
             if (name == "tcp_port") cfg.server.tcp_port = port(key, v);
             if (name == "ws_port") cfg.server.ws_port = port(key, v);
             if (name == "focal_log") cfg.server.focal_log = unquote(v);
             if (name == "frame_log") cfg.server.frame_log = unquote(v);
           });
}

pt::ptree read_config_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config file " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.message() + " (line " +
                                              std::to_string(e.line()) + ")");
  }
  return tree;
}

void apply_env(AppConfig& cfg) {
  if (const char* v = std::getenv("BIOHOLO_TCP_PORT")) cfg.server.tcp_port = port("BIOHOLO_TCP_PORT", v);
  if (const char* v = std::getenv("BIOHOLO_WS_PORT")) cfg.server.ws_port = port("BIOHOLO_WS_PORT", v);
}

void validate(const AppConfig& cfg) {
  validate_frame_loop_config(cfg.loop);
  validate_array_config(cfg.array);
  if (!(cfg.tracker.fov_wide_deg > 0.0)) throw Error(ErrorCode::InvalidConfig, "tracker.fov_wide: must be > 0");
  if (!(cfg.tracker.fov_deep_deg > 0.0)) throw Error(ErrorCode::InvalidConfig, "tracker.fov_deep: must be > 0");
  if (!(cfg.tracker.range > 0.0)) throw Error(ErrorCode::InvalidConfig, "tracker.range: must be > 0");
  if (!(cfg.tracker.rate_hz > 0.0)) throw Error(ErrorCode::InvalidConfig, "tracker.rate: must be > 0");
}

AppConfig load_config(const std::optional<std::filesystem::path>& path) {
  AppConfig cfg;
  std::optional<std::filesystem::path> file = path;
  if (!file) {
    if (const char* env = std::getenv("BIOHOLO_CONFIG"); env != nullptr && *env != '\0') file = env;
  }
  if (file) apply_config(read_config_tree(*file), cfg);
  apply_env(cfg);
  validate(cfg);
  return cfg;
}

}  // namespace bioholo
