#include "bioholo/haptics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "bioholo/csv.hpp"
#include "bioholo/error.hpp"

namespace bioholo {

namespace {

void check_unit_interval(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "normalized signal " + std::to_string(s) + " not in [0, 1]");
  }
}

void check_am_frequency(double f) {
  if (!(f >= kMinPerceptibleHz && f <= kMaxPerceptibleHz)) {
    throw Error(ErrorCode::ModulationOutOfPerceptibleRange,
                "AM frequency " + std::to_string(f) + " Hz outside [5, 500] Hz");
  }
}

std::size_t sample_count(double dt, double command_rate) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "render dt must be > 0");
  if (!(command_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "command rate must be > 0");
  return static_cast<std::size_t>(std::ceil(dt * command_rate));
}

}  // namespace

HapticMode HapticMode::am(double frequency_hz) {
  check_am_frequency(frequency_hz);
  return HapticMode(Kind::AmFixed, frequency_hz);
}

HapticMode HapticMode::parse(std::string_view name, double am_frequency_hz) {
  if (name == "intensity" || name == "pulsing-intensity") return pulsing_intensity();
  if (name == "radius" || name == "pulsing-radius") return pulsing_radius();
  if (name == "am") return am(am_frequency_hz);
  throw Error(ErrorCode::InvalidArgument, "unknown haptic mode '" + std::string(name) + "'");
}

std::string HapticMode::describe() const {
  switch (kind_) {
    case Kind::PulsingIntensity: return "pulsing-intensity";
    case Kind::PulsingRadius: return "pulsing-radius";
    case Kind::AmFixed: {
      std::ostringstream os;
      os << "am(" << am_frequency_ << " Hz)";
      return os.str();
    }
  }
  return "unknown";
}

void validate_stm_params(const StmCircleParams& p) {
  if (!(p.r_min > 0.0)) throw Error(ErrorCode::InvalidConfig, "haptics.r_min: must be > 0");
  if (!(p.r_max >= p.r_min)) throw Error(ErrorCode::InvalidConfig, "haptics.r_max: must be >= r_min");
  if (!(p.draw_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "haptics.draw_rate: must be > 0");
  if (!(p.base_intensity >= 0.0 && p.base_intensity <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "haptics.base_intensity: must be in [0, 1]");
  }
  if (!(p.min_intensity >= 0.0 && p.min_intensity <= p.base_intensity)) {
    throw Error(ErrorCode::InvalidConfig, "haptics.min_intensity: must be in [0, base_intensity]");
  }
}

Vec3 stm_circle_point(const Vec3& center, const Vec3& normal, double radius, double t,
                      double draw_rate) {
  if (!(radius > 0.0)) throw Error(ErrorCode::ZeroRadius, "STM circle radius must be > 0");
  const auto [u, v] = plane_basis(normal);
  const double theta = kTwoPi * draw_rate * t;
  return center + radius * (std::cos(theta) * u + std::sin(theta) * v);
}

double pulsing_intensity(double s_norm, const StmCircleParams& p) {
  check_unit_interval(s_norm);
  return p.min_intensity + (p.base_intensity - p.min_intensity) * s_norm;
}

double pulsing_radius(double s_norm, const StmCircleParams& p) {
  check_unit_interval(s_norm);
  return p.r_min + (p.r_max - p.r_min) * s_norm;
}

RenderOutput render_tick(const SceneState& scene, std::span<const HandFrame> hands,
                         const HapticMode& mode, double t, double dt,
                         const RenderParams& params) {
  if (mode.kind() == HapticMode::Kind::AmFixed) {
    return am_render_tick(scene, hands, mode.am_frequency(), t, dt, params);
  }
  const std::size_t n = sample_count(dt, params.command_rate);
  const StmCircleParams& stm = params.stm;
  const HeartHologram& heart = scene.heart;

  RenderOutput out;
  for (const auto& hand : hands) {
    const auto targets = intersect_targets(hand, heart);
    if (targets.empty()) continue;
    const Vec3& center = targets.front();

    for (std::size_t k = 0; k < n; ++k) {
      const double offset = dt * static_cast<double>(k) / static_cast<double>(n);
      const double ts = t + offset;
      double radius = stm.r_max;
      double intensity = stm.base_intensity;
      if (!heart.flatline) {
        // Same waveform source as the visual pulsation, extrapolated within the frame.
        const double s = heart_waveform_ahead(heart, ts - scene.t);
        if (mode.kind() == HapticMode::Kind::PulsingRadius) {
          radius = pulsing_radius(s, stm);
        } else {
          intensity = pulsing_intensity(s, stm);
        }
      }
      const Vec3 pos = stm_circle_point(center, hand.palm_normal, radius, ts, stm.draw_rate);
      if (!validate_volume(pos)) {
        ++out.dropped_out_of_volume;
        continue;
      }
      out.commands.push_back({ts, hand.hand, pos, intensity});
    }
  }
  return out;
}

RenderOutput am_render_tick(const SceneState& scene, std::span<const HandFrame> hands,
                            double frequency_hz, double t, double dt,
                            const RenderParams& params) {
  check_am_frequency(frequency_hz);
  const std::size_t n = sample_count(dt, params.command_rate);

  RenderOutput out;
  for (const auto& hand : hands) {
    const auto targets = intersect_targets(hand, scene.heart);
    if (targets.empty()) continue;
    const Vec3& pos = targets.front();
    for (std::size_t k = 0; k < n; ++k) {
      const double ts = t + dt * static_cast<double>(k) / static_cast<double>(n);
      if (!validate_volume(pos)) {
        ++out.dropped_out_of_volume;
        continue;
      }
      const double intensity = 0.5 * (1.0 + std::sin(kTwoPi * frequency_hz * ts));
      out.commands.push_back({ts, hand.hand, pos, intensity});
    }
  }
  return out;
}

FocalLogWriter::FocalLogWriter(std::ostream& out, const HapticMode& mode,
                               const RenderParams& params)
    : out_(out) {
  const auto& s = params.stm;
  out_ << "# focal command log\n"
       << "# mode=" << mode.describe() << " r_max=" << s.r_max << " r_min=" << s.r_min
       << " draw_rate=" << s.draw_rate << " base_intensity=" << s.base_intensity
       << " min_intensity=" << s.min_intensity << " command_rate=" << params.command_rate
       << "\n"
       << "# t,hand,x,y,z,intensity\n";
}

void FocalLogWriter::write(const FocalPointCommand& c) {
  char line[160];
  std::snprintf(line, sizeof line, "%.6f,%s,%.6f,%.6f,%.6f,%.6f\n", c.t,
                c.hand == HandId::Left ? "left" : "right", c.pos.x, c.pos.y, c.pos.z,
                c.intensity);
  out_ << line;
  ++rows_;
}

void FocalLogWriter::write(std::span<const FocalPointCommand> commands) {
  for (const auto& c : commands) write(c);
}

std::vector<FocalPointCommand> read_focal_log(std::istream& in) {
  std::vector<FocalPointCommand> out;
  for (const auto& row : csv::read_rows(in)) {
    if (row.fields.size() != 6) {
      throw Error(ErrorCode::ParseError, "focal log line " + std::to_string(row.line) +
                                             ": expected 6 fields");
    }
    const auto& f = row.fields;
    out.push_back({csv::parse_double(f[0]), hand_from_string(f[1]),
                   {csv::parse_double(f[2]), csv::parse_double(f[3]), csv::parse_double(f[4])},
                   csv::parse_double(f[5])});
  }
  return out;
}

}  // namespace bioholo
