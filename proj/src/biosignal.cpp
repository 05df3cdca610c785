#include "bioholo/biosignal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bioholo/csv.hpp"
#include "bioholo/error.hpp"

namespace bioholo {

namespace {

constexpr double kPeakOffset = 0.15;
constexpr double kPulseWidth = 0.08;

void check_bpm(double bpm) {
  if (!std::isfinite(bpm) || bpm < 0.0 || bpm > kMaxBpm) {
    throw Error(ErrorCode::BpmOutOfRange, "bpm " + std::to_string(bpm) + " outside [0, 250]");
  }
}

}  // namespace

void HrBuffer::ingest(const HeartRateSample& s) {
  if (!std::isfinite(s.t)) throw Error(ErrorCode::InvalidArgument, "non-finite sample time");
  check_bpm(s.bpm);
  if (!samples_.empty()) {
    const double newest = samples_.back().t;
    if (s.t < newest) {
      throw Error(ErrorCode::OutOfOrderSample, "sample at t=" + std::to_string(s.t) +
                                                   " older than newest t=" +
                                                   std::to_string(newest));
    }
    if (s.t == newest) samples_.pop_back();
  }
  samples_.push_back(s);
  while (samples_.front().t < s.t - config_.window) samples_.pop_front();
}

std::optional<double> HrBuffer::last_smoothed() const {
  if (samples_.empty()) return std::nullopt;
  return samples_.back().bpm;
}

std::optional<double> HrBuffer::smoothed_bpm(double now) const {
  if (samples_.empty()) return std::nullopt;
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples_) {
    if (s.t >= now - config_.window && s.t <= now) {
      sum += s.bpm;
      ++count;
    }
  }
  if (count > 0) return sum / static_cast<double>(count);
  if (now - samples_.back().t <= config_.staleness_timeout) return last_smoothed();
  return std::nullopt;
}

bool HrBuffer::is_flatline(double now) const {
  const auto bpm = smoothed_bpm(now);
  return !bpm || *bpm == 0.0;
}

double ppg_waveform(double bpm, double t) {
  if (!(bpm > 0.0)) {
    throw Error(ErrorCode::NonPositiveBpm, "ppg waveform needs bpm > 0, got " + std::to_string(bpm));
  }
  const double period = 60.0 / bpm;
  double tau = std::fmod(t, period);
  if (tau < 0.0) tau += period;
  const double sigma = kPulseWidth * period;
  const double d = tau - kPeakOffset * period;
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

double normalize_window(std::span<const TimedValue> raw, double now, double window) {
  const TimedValue* latest = nullptr;
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& s : raw) {
    if (s.t < now - window || s.t > now) continue;
    if (latest == nullptr) {
      lo = hi = s.value;
    } else {
      lo = std::min(lo, s.value);
      hi = std::max(hi, s.value);
    }
    if (latest == nullptr || s.t >= latest->t) latest = &s;
  }
  if (latest == nullptr) {
    throw Error(ErrorCode::EmptyWindow, "no samples in [" + std::to_string(now - window) + ", " +
                                            std::to_string(now) + "]");
  }
  if (hi == lo) return 0.0;
  return (latest->value - lo) / (hi - lo);
}

BeatPhase::BeatPhase(double radians) {
  if (!std::isfinite(radians)) throw Error(ErrorCode::InvalidArgument, "non-finite phase");
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can land exactly on 2pi after the shift.
  if (r >= kTwoPi) r = 0.0;
  radians_ = r;
}

BeatPhase advance_phase(BeatPhase phase, double bpm, double dt) {
  if (!(dt >= 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be >= 0");
  if (bpm == 0.0) return phase;
  return BeatPhase(phase.radians() + kTwoPi * (bpm / 60.0) * dt);
}

std::vector<HeartRateSample> read_hr_trace(std::istream& in) {
  std::vector<HeartRateSample> out;
  for (const auto& r : csv::read_numeric(in, 2)) {
    check_bpm(r[1]);
    if (!out.empty() && !(r[0] > out.back().t)) {
      throw Error(ErrorCode::ParseError, "hr trace times must be strictly increasing");
    }
    out.push_back({r[0], r[1]});
  }
  return out;
}

std::vector<TimedValue> read_ppg_trace(std::istream& in) {
  std::vector<TimedValue> out;
  for (const auto& r : csv::read_numeric(in, 2)) {
    if (!out.empty() && !(r[0] > out.back().t)) {
      throw Error(ErrorCode::ParseError, "ppg trace times must be strictly increasing");
    }
    out.push_back({r[0], r[1]});
  }
  return out;
}

}  // namespace bioholo
