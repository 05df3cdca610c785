#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <boost/property_tree/ptree_fwd.hpp>

#include "bioholo/array_physics.hpp"
#include "bioholo/frame_loop.hpp"
#include "bioholo/hand.hpp"

namespace bioholo {

struct ServerConfig {
  std::string bind_address = "127.0.0.1";
  std::uint16_t tcp_port = 7340;
  std::uint16_t ws_port = 7341;
  std::string focal_log;  ///< empty = no log
  std::string frame_log;
};

/// Everything a subcommand may need, merged as defaults <- file <- env <- flags.
struct AppConfig {
  FrameLoopConfig loop{};
  ArrayConfig array{};
  TrackerConfig tracker{};
  ServerConfig server{};
  double am_frequency = 200.0;
};

/// Applies the recognised sections of a key/value config document:
/// [scene] anchor, radii, pulse_amplitude
/// [haptics] mode, am_frequency, r_max, r_min, draw_rate, base_intensity,
///           min_intensity, command_rate
/// [array] rows, cols, pitch, carrier, speed_of_sound, amplitude
/// [timing] frame_rate, hr_window, hr_staleness, hand_stale
/// [tracker] fov_wide, fov_deep, range, rate
/// [server] bind, tcp_port, ws_port, focal_log, frame_log
/// Unknown keys in these sections are rejected. Throws InvalidConfig naming the key.
void apply_config(const boost::property_tree::ptree& tree, AppConfig& cfg);

/// Reads a config file. Throws InvalidConfig for unreadable or malformed files.
boost::property_tree::ptree read_config_tree(const std::filesystem::path& path);

/// BIOHOLO_TCP_PORT and BIOHOLO_WS_PORT override the server ports.
void apply_env(AppConfig& cfg);

/// Full validation; throws InvalidConfig naming the offending key.
void validate(const AppConfig& cfg);

/// Defaults, then `path` (or BIOHOLO_CONFIG when path is empty), then env vars.
AppConfig load_config(const std::optional<std::filesystem::path>& path);

/// Parses "x,y,z" or "[x, y, z]".
Vec3 parse_vec3(std::string_view text);

}  // namespace bioholo
