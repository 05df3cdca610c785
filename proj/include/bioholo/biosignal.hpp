#pragma once

#include <deque>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace bioholo {

inline constexpr double kMaxBpm = 250.0;

/// One heart-rate reading. bpm == 0 encodes a flatline.
struct HeartRateSample {
  double t = 0.0;
  double bpm = 0.0;
  friend bool operator==(const HeartRateSample&, const HeartRateSample&) = default;
};

struct HrBufferConfig {
  double window = 6.0;
  double staleness_timeout = 15.0;
};

/// Sliding window of heart-rate samples. Every retained sample lies within
/// `window` seconds of the newest one.
class HrBuffer {
 public:
  HrBuffer() = default;
  explicit HrBuffer(HrBufferConfig config) : config_(config) {}

  /// Throws OutOfOrderSample if s.t is older than the newest sample and
  /// BpmOutOfRange outside [0, 250]. A sample with the newest timestamp
  /// replaces it.
  void ingest(const HeartRateSample& s);

  /// Mean bpm over [now - window, now]. With an empty window the last
  /// non-empty window mean is held until staleness_timeout after the newest
  /// sample; after that the stream is considered dead.
  std::optional<double> smoothed_bpm(double now) const;

  /// True when the smoothed rate is zero or the stream is dead.
  bool is_flatline(double now) const;

  const std::deque<HeartRateSample>& samples() const { return samples_; }
  const HrBufferConfig& config() const { return config_; }

  /// Mean of the last non-empty window, i.e. the value held after the window drains.
  std::optional<double> last_smoothed() const;

 private:
  HrBufferConfig config_{};
  std::deque<HeartRateSample> samples_;
};

/// Synthetic PPG pulse train in [0, 1]: one Gaussian pulse per beat with its
/// peak at 0.15 T and width 0.08 T, T = 60 / bpm. Throws NonPositiveBpm.
double ppg_waveform(double bpm, double t);

struct TimedValue {
  double t = 0.0;
  double value = 0.0;
};

/// Min-max normalizes the latest sample against all samples in
/// [now - window, now]. A constant window yields 0. Throws EmptyWindow.
double normalize_window(std::span<const TimedValue> raw, double now, double window = 6.0);

/// Heartbeat animation phase, always wrapped into [0, 2pi).
class BeatPhase {
 public:
  constexpr BeatPhase() = default;
  explicit BeatPhase(double radians);

  double radians() const { return radians_; }
  friend bool operator==(const BeatPhase&, const BeatPhase&) = default;

 private:
  double radians_ = 0.0;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// phase + 2pi (bpm / 60) dt, wrapped. A zero rate leaves the phase frozen.
/// Throws InvalidArgument for dt < 0.
BeatPhase advance_phase(BeatPhase phase, double bpm, double dt);

/// `t_seconds,bpm` rows, t strictly increasing, bpm in [0, 250].
std::vector<HeartRateSample> read_hr_trace(std::istream& in);

/// `t_seconds,value` rows, t strictly increasing.
std::vector<TimedValue> read_ppg_trace(std::istream& in);

}  // namespace bioholo
