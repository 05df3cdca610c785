#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "bioholo/biosignal.hpp"
#include "bioholo/hand.hpp"
#include "bioholo/haptics.hpp"
#include "bioholo/protocol.hpp"

namespace bioholo {

enum class Interpolation { Step, Linear };

/// Authored heart-rate trajectory replayed by the wearable emulator.
class HrTrace {
 public:
  HrTrace() = default;
  /// Throws InvalidArgument for an empty trace, non-increasing times, or bpm
  /// outside [0, 250].
  HrTrace(std::vector<HeartRateSample> keyframes, Interpolation interpolation = Interpolation::Step,
          double emit_interval = 5.0);

  static HrTrace constant(double bpm, double emit_interval = 5.0);

  double bpm_at(double t) const;
  double emit_interval() const { return emit_interval_; }
  const std::vector<HeartRateSample>& keyframes() const { return keyframes_; }

 private:
  std::vector<HeartRateSample> keyframes_;
  Interpolation interpolation_ = Interpolation::Step;
  double emit_interval_ = 5.0;
};

/// Wearable model: a reading immediately at start, then one every emit_interval.
class WearableEmulator {
 public:
  explicit WearableEmulator(HrTrace trace) : trace_(std::move(trace)) {}

  Message hello() const { return Hello{DeviceKind::Wearable, kProtocolVersion, false}; }

  /// All readings scheduled at or before `now` that have not been sent yet.
  std::vector<Message> poll(double now);

  double next_emit_time() const;
  std::size_t emitted() const { return emitted_; }

 private:
  HrTrace trace_;
  std::size_t emitted_ = 0;
};

/// Hand tracker model: samples the script at the tracker rate, synthesizes
/// fingertips, and withholds frames that leave the tracking frustum.
class HandEmulator {
 public:
  HandEmulator(HandScript script, HandId hand = HandId::Right, TrackerConfig tracker = {},
               double fingertip_radius = kDefaultFingertipRadius);

  Message hello() const { return Hello{DeviceKind::HandTracker, kProtocolVersion, false}; }

  std::vector<Message> poll(double now);

  HandFrame frame_at(double t) const;
  double sample_time(std::size_t k) const { return static_cast<double>(k) / tracker_.rate_hz; }
  std::size_t emitted() const { return emitted_; }
  std::size_t dropped_out_of_fov() const { return dropped_; }

 private:
  HandScript script_;
  HandId hand_;
  TrackerConfig tracker_;
  double fingertip_radius_;
  std::size_t next_sample_ = 0;
  std::size_t emitted_ = 0;
  std::size_t dropped_ = 0;
};

struct HapticDiagnostics {
  std::size_t batches = 0;
  std::size_t commands = 0;
  std::size_t violations = 0;
};

/// Haptic device model: re-checks every command against the interaction
/// volume and intensity range, drops violators, and logs the rest.
class HapticEmulator {
 public:
  /// `log` may be null; otherwise the focal log header is written immediately.
  HapticEmulator(std::ostream* log, const HapticMode& mode, const RenderParams& params);

  Message hello() const { return Hello{DeviceKind::HapticDevice, kProtocolVersion, false}; }

  void consume(const FocalBatch& batch);

  const HapticDiagnostics& diagnostics() const { return diag_; }
  const std::vector<FocalPointCommand>& accepted() const { return accepted_; }

 private:
  std::unique_ptr<FocalLogWriter> writer_;
  std::vector<FocalPointCommand> accepted_;
  HapticDiagnostics diag_;
};

/// Fundamental period of a uniformly sampled series: the first local maximum
/// of the mean-removed autocorrelation above half its zero-lag value, searched
/// over [min_lag, max_lag] seconds. Returns nullopt for a flat or aperiodic series.
std::optional<double> estimate_period(const std::vector<double>& values, double sample_dt,
                                      double min_lag, double max_lag);

}  // namespace bioholo
