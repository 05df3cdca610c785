#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bioholo/geometry.hpp"
#include "bioholo/hand.hpp"
#include "bioholo/scene.hpp"
#include "bioholo/volume.hpp"

namespace bioholo {

/// One focal point sample sent to the array.
struct FocalPointCommand {
  double t = 0.0;
  HandId hand = HandId::Right;
  Vec3 pos{};
  double intensity = 0.0;
  friend bool operator==(const FocalPointCommand&, const FocalPointCommand&) = default;
};

inline constexpr double kMinPerceptibleHz = 5.0;
inline constexpr double kMaxPerceptibleHz = 500.0;

class HapticMode {
 public:
  enum class Kind { PulsingIntensity, PulsingRadius, AmFixed };

  static HapticMode pulsing_intensity() { return HapticMode(Kind::PulsingIntensity, 0.0); }
  static HapticMode pulsing_radius() { return HapticMode(Kind::PulsingRadius, 0.0); }
  /// Throws ModulationOutOfPerceptibleRange outside [5, 500] Hz.
  static HapticMode am(double frequency_hz);

  /// "intensity", "radius" or "am"; the AM frequency is supplied separately.
  static HapticMode parse(std::string_view name, double am_frequency_hz = 200.0);

  Kind kind() const { return kind_; }
  double am_frequency() const { return am_frequency_; }
  std::string describe() const;

  friend bool operator==(const HapticMode&, const HapticMode&) = default;

 private:
  HapticMode(Kind kind, double f) : kind_(kind), am_frequency_(f) {}
  Kind kind_ = Kind::PulsingRadius;
  double am_frequency_ = 0.0;
};

struct StmCircleParams {
  double r_max = 0.03;
  double r_min = 0.01;
  double draw_rate = 100.0;
  double base_intensity = 1.0;
  double min_intensity = 0.2;
};

/// Throws InvalidConfig naming the offending field.
void validate_stm_params(const StmCircleParams& p);

struct RenderParams {
  StmCircleParams stm;
  double command_rate = 500.0;
};

/// Point on the STM circle of `radius` around `center` in the plane
/// perpendicular to `normal`, at angle 2pi * draw_rate * t. Throws ZeroRadius.
Vec3 stm_circle_point(const Vec3& center, const Vec3& normal, double radius, double t,
                      double draw_rate = 100.0);

/// min_intensity + (base - min) * s. Throws OutOfRange unless s in [0, 1].
double pulsing_intensity(double s_norm, const StmCircleParams& p = {});

/// r_min + (r_max - r_min) * s. Throws OutOfRange unless s in [0, 1].
double pulsing_radius(double s_norm, const StmCircleParams& p = {});

struct RenderOutput {
  std::vector<FocalPointCommand> commands;
  std::size_t dropped_out_of_volume = 0;
};

/// Synthesizes the focal commands for the interval [t, t + dt): ceil(dt *
/// command_rate) evenly spaced samples per touching hand. Hands that do not
/// touch the heart produce nothing. Samples leaving the interaction volume are
/// dropped and counted. Dispatches to am_render_tick for AM modes.
RenderOutput render_tick(const SceneState& scene, std::span<const HandFrame> hands,
                         const HapticMode& mode, double t, double dt,
                         const RenderParams& params = {});

/// Fixed focal point on the target with intensity 0.5 (1 + sin(2pi f t)).
/// Throws ModulationOutOfPerceptibleRange outside [5, 500] Hz.
RenderOutput am_render_tick(const SceneState& scene, std::span<const HandFrame> hands,
                            double frequency_hz, double t, double dt,
                            const RenderParams& params = {});

/// Focal command log: `t,hand,x,y,z,intensity` with 6 decimals after a
/// commented header echoing the mode and parameters.
class FocalLogWriter {
 public:
  FocalLogWriter(std::ostream& out, const HapticMode& mode, const RenderParams& params);

  void write(const FocalPointCommand& c);
  void write(std::span<const FocalPointCommand> commands);
  std::size_t rows() const { return rows_; }

 private:
  std::ostream& out_;
  std::size_t rows_ = 0;
};

std::vector<FocalPointCommand> read_focal_log(std::istream& in);

}  // namespace bioholo
