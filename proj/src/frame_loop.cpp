#include "bioholo/frame_loop.hpp"

#include <algorithm>

#include "bioholo/error.hpp"

namespace bioholo {

namespace {

std::size_t slot(HandId id) { return id == HandId::Left ? 0 : 1; }

}  // namespace

void validate_frame_loop_config(const FrameLoopConfig& cfg) {
  validate_heart_geometry(cfg.heart);
  validate_stm_params(cfg.render.stm);
  if (!(cfg.render.command_rate > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "haptics.command_rate: must be > 0");
  }
  if (!(cfg.frame_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "timing.frame_rate: must be > 0");
  if (!(cfg.hr.window > 0.0)) throw Error(ErrorCode::InvalidConfig, "timing.hr_window: must be > 0");
  if (!(cfg.hr.staleness_timeout >= cfg.hr.window)) {
    throw Error(ErrorCode::InvalidConfig, "timing.hr_staleness: must be >= hr_window");
  }
  if (!(cfg.hand_stale > 0.0)) throw Error(ErrorCode::InvalidConfig, "timing.hand_stale: must be > 0");
}

HandFrame transform_ingest(const HandFrame& frame, FrameId from,
                           const RigidTransform& headset_to_device) {
  if (from != FrameId::Headset) return frame;
  HandFrame out = frame;
  out.palm_center = headset_to_device.apply(frame.palm_center);
  out.palm_normal = from_eigen(headset_to_device.rotation() * to_eigen(frame.palm_normal));
  for (auto& j : out.joints) j = headset_to_device.apply(j);
  return out;
}

FrameLoop::FrameLoop(FrameLoopConfig cfg)
    : cfg_(std::move(cfg)), scene_(make_scene(cfg_.heart)), hr_(cfg_.hr) {
  validate_frame_loop_config(cfg_);
}

void FrameLoop::post(SessionId from, Message message) {
  inbox_.push_back({from, std::move(message)});
}

const std::optional<HandFrame>& FrameLoop::latest_hand(HandId id) const {
  return hand_view_[slot(id)];
}

void FrameLoop::apply_calibration(SessionId from, const CalibrationSet& set,
                                  std::vector<Reply>& replies) {
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  for (const auto& p : set.pairs) {
    src.push_back(p.src);
    dst.push_back(p.dst);
  }
  try {
    const RigidTransform t = solve_rigid_transform(src, dst);
    calibration_ = t;
    ++diag_.calibrations;
    replies.push_back({from, make_calibration_reply(t, calibration_residual(t, src, dst))});
  } catch (const Error& e) {
    diag_.last_error = e.what();
    replies.push_back({from, ErrorReply{"calibration-failed", e.what()}});
  }
}

void FrameLoop::ingest_hand(const HandUpdate& update, double now) {
  HandFrame frame;
  try {
    frame = transform_ingest(update.hand, update.frame, calibration_);
    validate_hand_frame(frame);
  } catch (const Error& e) {
    ++diag_.hand_rejected;
    diag_.last_error = e.what();
    return;
  }
  auto& tracked = hands_[slot(frame.hand)];
  if (tracked && frame.t <= tracked->frame.t) {
    ++diag_.hand_superseded;
    return;
  }
  tracked = TrackedHand{std::move(frame), now};
  ++diag_.hand_frames;
}

TickOutput FrameLoop::tick(double now) {
  const double dt = std::max(0.0, now - scene_.t);
  TickOutput out;

  std::vector<Pending> inbox;
  inbox.swap(inbox_);

  for (const auto& p : inbox) {
    if (const auto* c = std::get_if<CalibrationSet>(&p.message)) {
      apply_calibration(p.from, *c, out.replies);
    }
  }
  // The server clock is authoritative; the device timestamp is not used for smoothing.
  for (const auto& p : inbox) {
    if (const auto* hr = std::get_if<HrUpdate>(&p.message)) {
      try {
        hr_.ingest({now, hr->sample.bpm});
        ++diag_.hr_ingested;
      } catch (const Error& e) {
        ++diag_.hr_rejected;
        diag_.last_error = e.what();
      }
    }
  }
  for (const auto& p : inbox) {
    if (const auto* h = std::get_if<HandUpdate>(&p.message)) ingest_hand(*h, now);
  }
  for (auto& tracked : hands_) {
    if (tracked && now - tracked->received_at > cfg_.hand_stale) {
      tracked.reset();
      ++diag_.stale_hands_dropped;
    }
  }

  scene_ = update_scene(scene_, hr_.smoothed_bpm(now), dt);
  scene_.t = now;

  std::vector<HandFrame> hands;
  for (std::size_t i = 0; i < hands_.size(); ++i) {
    hand_view_[i] = hands_[i] ? std::optional<HandFrame>(hands_[i]->frame) : std::nullopt;
    if (hands_[i]) hands.push_back(hands_[i]->frame);
  }

  const RenderOutput rendered =
      render_tick(scene_, hands, cfg_.mode, now, frame_period(), cfg_.render);
  diag_.focal_commands += rendered.commands.size();
  diag_.dropped_out_of_volume += rendered.dropped_out_of_volume;

  const HeartHologram& heart = scene_.heart;
  FrameState& fs = out.frame;
  fs.seq = scene_.seq;
  fs.t = now;
  fs.anchor = heart.anchor;
  fs.radii = heart.base_radii;
  fs.scale = surface_scale(heart);
  fs.phase = heart.phase.radians();
  fs.bpm = heart.bpm;
  fs.flatline = heart.flatline;
  for (const auto& h : hands) {
    fs.hands.push_back({h.hand, !intersect_targets(h, heart).empty(), h.palm_center, h.joints});
  }

  out.focal = FocalBatch{scene_.seq, rendered.commands};
  out.scene = scene_;
  return out;
}

}  // namespace bioholo
