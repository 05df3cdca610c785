#include "bioholo/emulators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bioholo/error.hpp"

namespace bioholo {

HrTrace::HrTrace(std::vector<HeartRateSample> keyframes, Interpolation interpolation,
                 double emit_interval)
    : keyframes_(std::move(keyframes)), interpolation_(interpolation), emit_interval_(emit_interval) {
  if (keyframes_.empty()) throw Error(ErrorCode::InvalidArgument, "hr trace is empty");
  if (!(emit_interval_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "emit interval must be > 0");
  for (std::size_t i = 0; i < keyframes_.size(); ++i) {
    const auto& k = keyframes_[i];
    if (!std::isfinite(k.bpm) || k.bpm < 0.0 || k.bpm > kMaxBpm) {
      throw Error(ErrorCode::InvalidArgument, "hr trace bpm outside [0, 250]");
    }
    if (i > 0 && !(k.t > keyframes_[i - 1].t)) {
      throw Error(ErrorCode::InvalidArgument, "hr trace times must be strictly increasing");
    }
  }
}

HrTrace HrTrace::constant(double bpm, double emit_interval) {
  return HrTrace({{0.0, bpm}}, Interpolation::Step, emit_interval);
}

double HrTrace::bpm_at(double t) const {
  const auto& kf = keyframes_;
  if (t <= kf.front().t) return kf.front().bpm;
  if (t >= kf.back().t) return kf.back().bpm;
  const auto hi = std::upper_bound(kf.begin(), kf.end(), t,
                                   [](double v, const HeartRateSample& s) { return v < s.t; });
  const auto lo = hi - 1;
  if (interpolation_ == Interpolation::Step) return lo->bpm;
  const double a = (t - lo->t) / (hi->t - lo->t);
  return lo->bpm + a * (hi->bpm - lo->bpm);
}

double WearableEmulator::next_emit_time() const {
  return static_cast<double>(emitted_) * trace_.emit_interval();
}

std::vector<Message> WearableEmulator::poll(double now) {
  std::vector<Message> out;
  while (next_emit_time() <= now) {
    const double t = next_emit_time();
    out.push_back(HrUpdate{{t, trace_.bpm_at(t)}});
    ++emitted_;
  }
  return out;
}

HandEmulator::HandEmulator(HandScript script, HandId hand, TrackerConfig tracker,
                           double fingertip_radius)
    : script_(std::move(script)), hand_(hand), tracker_(tracker),
      fingertip_radius_(fingertip_radius) {
  if (!(tracker_.rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "tracker rate must be > 0");
}

HandFrame HandEmulator::frame_at(double t) const {
  const PalmKeyframe pose = script_.pose_at(t);
  HandFrame f;
  f.t = t;
  f.hand = hand_;
  f.palm_center = pose.palm;
  f.palm_normal = pose.normal;
  f.joints = synthesize_joints(pose.palm, pose.normal, fingertip_radius_);
  return f;
}

std::vector<Message> HandEmulator::poll(double now) {
  std::vector<Message> out;
  while (sample_time(next_sample_) <= now) {
    const HandFrame f = frame_at(sample_time(next_sample_));
    ++next_sample_;
    if (!in_tracking_fov(f, tracker_)) {
      ++dropped_;
      continue;
    }
    out.push_back(HandUpdate{FrameId::Device, f});
    ++emitted_;
  }
  return out;
}

HapticEmulator::HapticEmulator(std::ostream* log, const HapticMode& mode,
                               const RenderParams& params) {
  if (log != nullptr) writer_ = std::make_unique<FocalLogWriter>(*log, mode, params);
}

void HapticEmulator::consume(const FocalBatch& batch) {
  ++diag_.batches;
  for (const auto& c : batch.commands) {
    if (!validate_volume(c.pos) || !(c.intensity >= 0.0 && c.intensity <= 1.0) ||
        !std::isfinite(c.t)) {
      ++diag_.violations;
      continue;
    }
    ++diag_.commands;
    accepted_.push_back(c);
    if (writer_) writer_->write(c);
  }
}

std::optional<double> estimate_period(const std::vector<double>& values, double sample_dt,
                                      double min_lag, double max_lag) {
  const std::size_t n = values.size();
  if (n < 3 || !(sample_dt > 0.0)) return std::nullopt;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = values[i] - mean;

  auto acf = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += x[i] * x[i + lag];
    return s;
  };
  const double r0 = acf(0);
  if (!(r0 > 0.0)) return std::nullopt;

  const auto lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(min_lag / sample_dt)));
  const auto hi = std::min<std::size_t>(n - 2, static_cast<std::size_t>(std::floor(max_lag / sample_dt)));
  if (lo >= hi) return std::nullopt;

  double prev = acf(lo - 1);
  double cur = acf(lo);
  for (std::size_t lag = lo; lag <= hi; ++lag) {
    const double next = acf(lag + 1);
    if (cur >= prev && cur >= next && cur > 0.5 * r0) {
      // Parabolic refinement around the discrete peak.
      const double denom = prev - 2.0 * cur + next;
      const double shift = denom != 0.0 ? 0.5 * (prev - next) / denom : 0.0;
      return (static_cast<double>(lag) + shift) * sample_dt;
    }
    prev = cur;
    cur = next;
  }
  return std::nullopt;
}

}  // namespace bioholo
