#include "bioholo/array_physics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "bioholo/biosignal.hpp"
#include "bioholo/error.hpp"

namespace bioholo {

double ArrayConfig::wavenumber() const { return kTwoPi * carrier_hz / speed_of_sound; }

void validate_array_config(const ArrayConfig& cfg) {
  if (cfg.rows <= 0) throw Error(ErrorCode::InvalidConfig, "array.rows: must be > 0");
  if (cfg.cols <= 0) throw Error(ErrorCode::InvalidConfig, "array.cols: must be > 0");
  if (cfg.rows * cfg.cols != 256) {
    throw Error(ErrorCode::InvalidConfig, "array.rows: rows * cols must be 256");
  }
  if (!(cfg.pitch > 0.0)) throw Error(ErrorCode::InvalidConfig, "array.pitch: must be > 0");
  if (!(cfg.carrier_hz > 0.0)) throw Error(ErrorCode::InvalidConfig, "array.carrier: must be > 0");
  if (!(cfg.speed_of_sound > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "array.speed_of_sound: must be > 0");
  }
  if (!(cfg.amplitude > 0.0)) throw Error(ErrorCode::InvalidConfig, "array.amplitude: must be > 0");
}

std::vector<Vec3> array_layout(const ArrayConfig& cfg) {
  validate_array_config(cfg);
  const double ci = (cfg.rows - 1) / 2.0;
  const double cj = (cfg.cols - 1) / 2.0;
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(cfg.rows * cfg.cols));
  for (int i = 0; i < cfg.rows; ++i) {
    for (int j = 0; j < cfg.cols; ++j) {
      out.push_back({(i - ci) * cfg.pitch, (j - cj) * cfg.pitch, 0.0});
    }
  }
  return out;
}

PhaseSolution solve_phases(const ArrayConfig& cfg, std::span<const Vec3> layout,
                           const Vec3& focus) {
  if (!(focus.z > 0.0)) {
    throw Error(ErrorCode::FocusBehindArray, "focus z must be > 0, got " + std::to_string(focus.z));
  }
  const double k = cfg.wavenumber();
  PhaseSolution sol;
  sol.phases.reserve(layout.size());
  for (const auto& x : layout) {
    double psi = std::fmod(-k * distance(x, focus), kTwoPi);
    if (psi < 0.0) psi += kTwoPi;
    if (psi >= kTwoPi) psi = 0.0;
    sol.phases.push_back(psi);
  }
  return sol;
}

std::complex<double> field_at(const ArrayConfig& cfg, std::span<const Vec3> layout,
                              std::span<const double> phases, const Vec3& p) {
  if (phases.size() != layout.size()) {
    throw Error(ErrorCode::LengthMismatch, "phase count differs from transducer count");
  }
  const double k = cfg.wavenumber();
  std::complex<double> sum{0.0, 0.0};
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const double d = distance(layout[i], p);
    if (!(d > 0.0)) {
      throw Error(ErrorCode::SingularEvaluationPoint, "evaluation point on transducer " +
                                                          std::to_string(i));
    }
    sum += std::polar(cfg.amplitude / d, k * d + phases[i]);
  }
  return sum;
}

double aligned_magnitude(const ArrayConfig& cfg, std::span<const Vec3> layout, const Vec3& p) {
  double sum = 0.0;
  for (const auto& x : layout) sum += cfg.amplitude / distance(x, p);
  return sum;
}

std::vector<FieldSample> sweep_plane(const ArrayConfig& cfg, std::span<const Vec3> layout,
                                     std::span<const double> phases, const PlaneGrid& grid,
                                     unsigned threads) {
  if (!(grid.step > 0.0) || !(grid.extent >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "grid step must be > 0 and extent >= 0");
  }
  const auto n = static_cast<std::size_t>(std::floor(2.0 * grid.extent / grid.step + 1e-9)) + 1;

  auto point = [&](std::size_t a, std::size_t b) {
    const double ua = -grid.extent + grid.step * static_cast<double>(a);
    const double ub = -grid.extent + grid.step * static_cast<double>(b);
    switch (grid.axis) {
      case PlaneAxis::X: return Vec3{grid.level, grid.center.y + ua, grid.center.z + ub};
      case PlaneAxis::Y: return Vec3{grid.center.x + ua, grid.level, grid.center.z + ub};
      case PlaneAxis::Z: break;
    }
    return Vec3{grid.center.x + ua, grid.center.y + ub, grid.level};
  };

  std::vector<FieldSample> out(n * n);
  std::vector<std::exception_ptr> failures(n);
  auto work = [&](std::size_t first_row, std::size_t stride) {
    for (std::size_t a = first_row; a < n; a += stride) {
      try {
        for (std::size_t b = 0; b < n; ++b) {
          const Vec3 p = point(a, b);
          out[a * n + b] = {p, field_at(cfg, layout, phases, p)};
        }
      } catch (...) {
        failures[a] = std::current_exception();
      }
    }
  };
  auto rethrow = [&] {
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    work(0, 1);
    rethrow();
    return out;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  pool.clear();
  rethrow();
  return out;
}

}  // namespace bioholo
