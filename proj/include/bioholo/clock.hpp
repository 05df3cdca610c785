#pragma once

#include <chrono>
#include <cstdint>

namespace bioholo {

enum class ClockMode { Wall, Virtual };

/// Deterministic frame clock: time moves only when advance() is called, and
/// tick n is reported as exactly n / rate seconds.
class VirtualClock {
 public:
  explicit VirtualClock(double rate_hz = 60.0) : rate_(rate_hz) {}

  double advance() { return static_cast<double>(++ticks_) / rate_; }
  double now() const { return static_cast<double>(ticks_) / rate_; }
  std::uint64_t ticks() const { return ticks_; }
  double tick() const { return 1.0 / rate_; }

 private:
  double rate_;
  std::uint64_t ticks_ = 0;
};

/// Monotonic seconds since construction.
class WallClock {
 public:
  using clock = std::chrono::steady_clock;

  WallClock() : start_(clock::now()) {}

  double now() const { return std::chrono::duration<double>(clock::now() - start_).count(); }
  clock::time_point start() const { return start_; }
  clock::time_point at(double seconds) const {
    return start_ + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(seconds));
  }

 private:
  clock::time_point start_;
};

}  // namespace bioholo
