#pragma once

#include <complex>
#include <span>
#include <vector>

#include "bioholo/geometry.hpp"

namespace bioholo {

struct ArrayConfig {
  int rows = 16;
  int cols = 16;
  double pitch = 0.0105;
  double carrier_hz = 40'000.0;
  double speed_of_sound = 343.0;
  double amplitude = 1.0;

  double wavelength() const { return speed_of_sound / carrier_hz; }
  double wavenumber() const;
};

/// Throws InvalidConfig naming the offending field.
void validate_array_config(const ArrayConfig& cfg);

/// Planar grid in z = 0 centered on the origin, row-major: index i * cols + j
/// sits at ((i - (rows-1)/2) pitch, (j - (cols-1)/2) pitch, 0).
std::vector<Vec3> array_layout(const ArrayConfig& cfg = {});

struct PhaseSolution {
  std::vector<double> phases;
};

/// Emission phases focusing at `focus`: psi_i = -k |x_i - focus| mod 2pi.
/// Throws FocusBehindArray for focus.z <= 0.
PhaseSolution solve_phases(const ArrayConfig& cfg, std::span<const Vec3> layout,
                           const Vec3& focus);

/// Monopole sum U(p) = sum_i A / d_i exp(i (k d_i + psi_i)).
/// Throws SingularEvaluationPoint if p coincides with a transducer and
/// LengthMismatch if the phase count differs from the layout.
std::complex<double> field_at(const ArrayConfig& cfg, std::span<const Vec3> layout,
                              std::span<const double> phases, const Vec3& p);

/// Magnitude reached at p when every phasor arrives aligned: sum_i A / d_i.
double aligned_magnitude(const ArrayConfig& cfg, std::span<const Vec3> layout, const Vec3& p);

struct FieldSample {
  Vec3 p;
  std::complex<double> value;
};

enum class PlaneAxis { X, Y, Z };

struct PlaneGrid {
  PlaneAxis axis = PlaneAxis::Z;  ///< coordinate held fixed
  double level = 0.2;             ///< value of the fixed coordinate
  Vec3 center{};                  ///< in-plane center (fixed coordinate ignored)
  double extent = 0.06;           ///< half-width of the square grid
  double step = 0.002;
};

/// Evaluates field_at on a square grid, rows ordered by the first free axis
/// then the second. Uses up to `threads` workers (0 = hardware concurrency).
std::vector<FieldSample> sweep_plane(const ArrayConfig& cfg, std::span<const Vec3> layout,
                                     std::span<const double> phases, const PlaneGrid& grid,
                                     unsigned threads = 0);

}  // namespace bioholo
