// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "bioholo/array_physics.hpp"
#include "bioholo/error.hpp"
#include "bioholo/geometry.hpp"
#include "bioholo/haptics.hpp"
#include "bioholo/net_client.hpp"
#include "bioholo/protocol.hpp"
#include "bioholo/scenario.hpp"
#include "bioholo/server.hpp"

using namespace bioholo;
namespace fs = std::filesystem;
using steady = std::chrono::steady_clock;

namespace {

constexpr double kFrame = 1.0 / 60.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double seconds_since(steady::time_point t0) {
  return std::chrono::duration<double>(steady::now() - t0).count();
}

int run_cli(const std::string& cli, const std::string& args, double* elapsed = nullptr) {
  const std::string cmd = "\"" + cli + "\" " + args + " >/dev/null 2>&1";
  const auto t0 = steady::now();
  const int rc = std::system(cmd.c_str());
  if (elapsed) *elapsed = seconds_since(t0);
  return rc;
}

std::vector<FocalPointCommand> load_focal(const fs::path& p) {
  std::ifstream in(p);
  return read_focal_log(in);
}

/// Circle fit for commands moving on z-up circles at angle theta = 2 pi f t:
/// the perpendicular component (p - c) x (cos, sin) vanishes, which is linear
/// in the center c.
struct CircleFit {
  Vec3 center;
  std::vector<double> radius;        // projection onto the expected direction
  double max_angle_error = 0.0;      // radians
  double max_z_spread = 0.0;
};

CircleFit fit_circles(const std::vector<FocalPointCommand>& cmds, double draw_rate) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(cmds.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(cmds.size()));
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    const double th = kTwoPi * draw_rate * cmds[i].t;
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = std::sin(th);
    a(r, 1) = -std::cos(th);
    b(r) = cmds[i].pos.x * std::sin(th) - cmds[i].pos.y * std::cos(th);
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  CircleFit fit;
  fit.center = {c(0), c(1), cmds.front().pos.z};
  double zmin = cmds.front().pos.z, zmax = zmin;
  for (const auto& cmd : cmds) {
    const double th = kTwoPi * draw_rate * cmd.t;
    const double dx = cmd.pos.x - c(0), dy = cmd.pos.y - c(1);
    fit.radius.push_back(dx * std::cos(th) + dy * std::sin(th));
    double err = std::remainder(std::atan2(dy, dx) - th, kTwoPi);
    fit.max_angle_error = std::max(fit.max_angle_error, std::abs(err));
    zmin = std::min(zmin, cmd.pos.z);
    zmax = std::max(zmax, cmd.pos.z);
  }
  fit.max_z_spread = zmax - zmin;
  return fit;
}

/// Distances from the algebraic (Kasa) least-squares circle center; needs no
/// timestamps, so only position quantization enters.
std::vector<double> kasa_radii(const std::vector<FocalPointCommand>& cmds) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(cmds.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(cmds.size()));
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = cmds[i].pos.x;
    a(r, 1) = cmds[i].pos.y;
    a(r, 2) = 1.0;
    b(r) = -(cmds[i].pos.x * cmds[i].pos.x + cmds[i].pos.y * cmds[i].pos.y);
  }
  const Eigen::Vector3d s = a.colPivHouseholderQr().solve(b);
  const double cx = -s(0) / 2, cy = -s(1) / 2;
  std::vector<double> out;
  for (const auto& c : cmds) out.push_back(std::hypot(c.pos.x - cx, c.pos.y - cy));
  return out;
}

/// Period by autocorrelation: the first local maximum past the first zero
/// crossing that reaches half the zero-lag value, refined by a parabola through the three lags around it.
std::optional<double> autocorr_period(const std::vector<double>& x, double dt, double max_lag) {
  const std::size_t n = x.size();
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  const auto lags = std::min(n - 1, static_cast<std::size_t>(max_lag / dt) + 1);
  std::vector<double> ac(lags + 1, 0.0);
  for (std::size_t l = 0; l <= lags; ++l) {
    for (std::size_t i = 0; i + l < n; ++i) ac[l] += (x[i] - mean) * (x[i + l] - mean);
    ac[l] /= static_cast<double>(n - l);
  }
  if (ac[0] <= 0) return std::nullopt;
  std::size_t l = 1;
  while (l < lags && ac[l] > 0) ++l;
  std::size_t best = 0;
  for (; l < lags; ++l) {
    if (ac[l] >= ac[l - 1] && ac[l] >= ac[l + 1] && ac[l] >= 0.5 * ac[0]) {
      best = l;
      break;
    }
  }
  if (best == 0) return std::nullopt;
  const double y0 = ac[best - 1], y1 = ac[best], y2 = ac[best + 1];
  const double denom = y0 - 2 * y1 + y2;
  const double shift = denom != 0 ? 0.5 * (y0 - y2) / denom : 0.0;
  return (static_cast<double>(best) + shift) * dt;
}

/// Per-frame mean of a per-command series, keyed by the frame each command falls in.
std::vector<double> per_frame(const std::vector<FocalPointCommand>& cmds, const std::vector<double>& v) {
  std::vector<double> out;
  long current = -1;
  double sum = 0;
  int count = 0;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    const long f = std::lround(std::floor(cmds[i].t * 60.0 + 1e-6));
    if (f != current && count > 0) {
      out.push_back(sum / count);
      sum = 0;
      count = 0;
    }
    current = f;
    sum += v[i];
    ++count;
  }
  if (count > 0) out.push_back(sum / count);
  return out;
}

// 1 ---------------------------------------------------------------------------
Outcome stm_geometry(const std::string& cli, const fs::path& work) {
  Outcome o;
  const fs::path log = work / "stm.csv";
  double elapsed = 0;
  const int rc = run_cli(cli, "render --bpm 60 --mode radius --duration 10 --virtual-clock --out " + log.string(),
                         &elapsed);
  o.require(rc == 0, "render exit " + std::to_string(rc));
  if (rc != 0) return o;
  const auto cmds = load_focal(log);
  o.require(cmds.size() > 1000, "only " + std::to_string(cmds.size()) + " commands");
  if (cmds.size() <= 1000) return o;
  const CircleFit fit = fit_circles(cmds, 100.0);
  const auto [rmin, rmax] = std::minmax_element(fit.radius.begin(), fit.radius.end());
  o.require(*rmin >= 0.01 - 1e-6 && *rmax <= 0.03 + 1e-6, "radius range [" + fmt(*rmin) + ", " + fmt(*rmax) + "]");
  // The log keeps 6 decimals: t rounding alone moves theta by up to 2pi*100*5e-7.
  o.require(fit.max_angle_error < 2e-3, "angle error " + fmt(fit.max_angle_error));
  o.require(fit.max_z_spread <= 1e-6, "circle not planar");
  o.require(elapsed < 5.0, "runtime " + fmt(elapsed) + " s");
  o.note(std::to_string(cmds.size()) + " commands, r in [" + fmt(*rmin, 4) + ", " + fmt(*rmax, 4) +
         "] m, max |dtheta| " + fmt(fit.max_angle_error, 3) + " rad, " + fmt(elapsed, 3) + " s");
  return o;
}

// 2 ---------------------------------------------------------------------------
Outcome heartbeat_sync(const std::string& cli, const fs::path& work) {
  Outcome o;
  for (double bpm : {45.0, 60.0, 120.0}) {
    const fs::path log = work / ("sync_" + std::to_string(static_cast<int>(bpm)) + ".csv");
    const int rc = run_cli(cli, "render --mode radius --duration 20 --virtual-clock --bpm " + fmt(bpm) + " --out " +
                                    log.string());
    o.require(rc == 0, "render exit " + std::to_string(rc));
    if (rc != 0) continue;
    const auto cmds = load_focal(log);
    const CircleFit fit = fit_circles(cmds, 100.0);
    const auto series = per_frame(cmds, fit.radius);
    const auto period = autocorr_period(series, kFrame, 4.0);
    const double expected = 60.0 / bpm;
    o.require(period && std::abs(*period - expected) <= kFrame,
              "bpm " + fmt(bpm) + ": period " + (period ? fmt(*period) : std::string("none")));
    if (period) o.note("bpm " + fmt(bpm) + " -> " + fmt(*period, 5) + " s (expect " + fmt(expected, 5) + ")");
  }
  return o;
}

Scenario palm_scenario(double bpm, const Vec3& palm, double duration) {
  Scenario s;
  s.name = "acceptance";
  s.hr = HrTrace::constant(bpm);
  s.hand = HandScript({{0, palm, {0, 0, 1}}, {duration + 1, palm, {0, 0, 1}}});
  s.duration = duration;
  return s;
}

// 3 ---------------------------------------------------------------------------
Outcome flatline(const std::string& cli, const fs::path& work) {
  Outcome o;
  const ScenarioRun run = run_scenario(palm_scenario(0.0, {0, 0, 0.33}, 10.0));
  std::istringstream in(run.focal_log);
  const auto cmds = read_focal_log(in);
  o.require(cmds.size() > 1000, "only " + std::to_string(cmds.size()) + " commands");
  if (cmds.size() <= 1000) return o;

  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  std::vector<double> intensity;
  for (const auto& c : cmds) intensity.push_back(c.intensity);
  const auto radii = kasa_radii(cmds);
  o.require(spread(intensity) == 0.0, "intensity varies by " + fmt(spread(intensity)));
  // Positions are logged with 6 decimals, so each radius carries up to
  // sqrt(2) * 5e-7 of rounding; a constant radius shows a spread below twice that.
  const double quantum = 2.0 * std::sqrt(2.0) * 5e-7;
  o.require(spread(radii) <= quantum, "radius varies by " + fmt(spread(radii)));
  o.require(spread(run.radii) <= 1e-12, "unrounded radius varies by " + fmt(spread(run.radii)));
  bool scale_const = true;
  for (const auto& f : run.frames) scale_const = scale_const && f.state.scale == 1.0 && f.state.flatline;
  o.require(scale_const, "surface scale departs from 1.0");

  const fs::path log = work / "flat_render.csv";
  const int rc = run_cli(cli, "render --bpm 0 --duration 5 --virtual-clock --out " + log.string());
  o.require(rc == 0, "render exit " + std::to_string(rc));
  if (rc == 0) {
    const auto rcmds = load_focal(log);
    std::vector<double> ri;
    for (const auto& c : rcmds) ri.push_back(c.intensity);
    o.require(!rcmds.empty() && spread(ri) == 0.0 && spread(kasa_radii(rcmds)) <= quantum,
              "offline render not static");
  }
  o.note(std::to_string(cmds.size()) + " commands, logged radius spread " + fmt(spread(radii), 3) + " m (bound " + fmt(quantum, 3) +
         "), unrounded spread " + fmt(spread(run.radii), 3) + ", intensity spread " + fmt(spread(intensity)) + ", " +
         std::to_string(run.frames.size()) + " frames at scale 1.0");
  return o;
}

/// Still-ellipsoid inside test for the palm or any of five fingertips on a
/// 4 cm arc from 30 to 150 degrees in the palm plane.
bool touches(const Vec3& palm, const HeartGeometry& g) {
  auto in = [&](const Vec3& p) {
    const Vec3 d = p - g.anchor;
    return std::pow(d.x / g.base_radii.x, 2) + std::pow(d.y / g.base_radii.y, 2) +
               std::pow(d.z / g.base_radii.z, 2) <= 1.0;
  };
  if (in(palm)) return true;
  for (int k = 0; k < 5; ++k) {
    const double a = (30.0 + 30.0 * k) * std::numbers::pi / 180.0;
    if (in(palm + Vec3{0.04 * std::cos(a), 0.04 * std::sin(a), 0})) return true;
  }
  return false;
}

// 4 ---------------------------------------------------------------------------
Outcome intersection_gate(const fs::path& scenarios) {
  Outcome o;
  const Scenario s = load_scenario(scenarios / "sweep.ini");
  const ScenarioRun run = run_scenario(s);
  const Vec3 start{-0.45, 0, 0.30}, end{0.45, 0, 0.30};
  auto palm = [&](double t) { return start + (end - start) * (t / 9.0); };
  auto crossing = [&](double lo, double hi, bool want) {
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      (touches(palm(mid), s.config.loop.heart) == want ? hi : lo) = mid;
    }
    return hi;
  };
  const double expected[2] = {crossing(0.0, 4.5, true), crossing(4.5, 9.0, false)};
  std::vector<double> transitions;
  bool active = false;
  std::size_t leaked = 0;
  for (const auto& f : run.frames) {
    const bool now = !f.state.hands.empty() && f.state.hands[0].haptic_active;
    if (now != active) transitions.push_back(f.state.t);
    active = now;
    if (!now) leaked += f.command_count;
  }
  o.require(transitions.size() == 2, std::to_string(transitions.size()) + " transitions");
  for (std::size_t i = 0; i < std::min<std::size_t>(2, transitions.size()); ++i) {
    const double err = std::abs(transitions[i] - expected[i]);
    o.require(err <= kFrame, "transition " + fmt(transitions[i]) + " vs " + fmt(expected[i]));
    o.note("crossing " + fmt(expected[i], 6) + " s, detected " + fmt(transitions[i], 6) + " s");
  }
  o.require(leaked == 0, std::to_string(leaked) + " commands while outside");
  o.note("0 commands while outside");
  return o;
}

// 5 ---------------------------------------------------------------------------
Outcome latency_budget() {
  Outcome o;
  for (double step : {10.0, 12.0}) {
    Scenario s;
    s.hr = HrTrace({{0, 60}, {step, 120}}, Interpolation::Step, 5.0);
    s.duration = step + 15.0;
    const ScenarioRun run = run_scenario(s);
    std::optional<double> settled;
    for (std::size_t i = 0; i < run.frames.size(); ++i) {
      const double b = run.smoothed_bpm[i];
      const bool ok = std::isfinite(b) && std::abs(b - 120.0) <= 1.0;
      if (ok && !settled) settled = run.frames[i].state.t;
      if (!ok) settled.reset();
    }
    const double latency = settled ? *settled - step : INFINITY;
    o.require(latency <= 11.0, "step at " + fmt(step) + ": latency " + fmt(latency));
    o.note("step at " + fmt(step) + " s settles after " + fmt(latency, 5) + " s");
  }
  return o;
}

// 6 ---------------------------------------------------------------------------
Outcome focusing(const std::string& cli, const fs::path& work) {
  Outcome o;
  const ArrayConfig cfg{};
  const auto layout = array_layout(cfg);
  const Vec3 focus{0, 0, 0.20};
  const auto phases = solve_phases(cfg, layout, focus).phases;
  const double k = kTwoPi * cfg.carrier_hz / cfg.speed_of_sound;
  auto brute = [&](const Vec3& p) {
    std::complex<double> u{};
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const double d = distance(layout[i], p);
      u += cfg.amplitude / d * std::polar(1.0, k * d + phases[i]);
    }
    return u;
  };
  double analytic = 0;
  for (const auto& x : layout) analytic += cfg.amplitude / distance(x, focus);
  const double at_focus = std::abs(field_at(cfg, layout, phases, focus));
  const double rel = std::abs(at_focus - analytic) / analytic;
  o.require(rel <= 1e-9, "|U(focus)| relative error " + fmt(rel));
  const double contrast = std::abs(brute(focus)) / std::abs(brute(focus + Vec3{0.01, 0, 0}));
  o.require(contrast > 3.0, "contrast " + fmt(contrast));

  const fs::path csv = work / "field.csv";
  double elapsed = 0;
  const int rc = run_cli(cli, "field --focus 0,0,0.2 --plane z=0.2 --extent 0.06 --step 0.002 --out " + csv.string(),
                         &elapsed);
  o.require(rc == 0, "field exit " + std::to_string(rc));
  std::size_t rows = 0;
  std::ifstream in(csv);
  for (std::string line; std::getline(in, line);) rows += !line.empty();
  o.require(rows == 61 * 61 + 1, std::to_string(rows) + " csv lines");
  o.require(elapsed < 10.0, "sweep " + fmt(elapsed) + " s");
  o.note("rel err " + fmt(rel, 3) + ", contrast " + fmt(contrast, 4) + ", 61x61 sweep " + fmt(elapsed, 3) + " s");
  return o;
}

// 7 ---------------------------------------------------------------------------
Outcome calibration() {
  Outcome o;
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.001);
  double worst_rot = 0, worst_trans = 0, worst_rms = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Quaterniond q = Eigen::Quaterniond(u(rng), u(rng), u(rng), u(rng)).normalized();
    const Eigen::Matrix3d r = q.toRotationMatrix();
    const Vec3 t{u(rng), u(rng), u(rng)};
    const int n = 4 + static_cast<int>(rng() % 7);
    std::vector<Vec3> src, dst, noisy;
    for (int i = 0; i < n; ++i) {
      const Vec3 p{0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng)};
      const Vec3 q2 = from_eigen(r * to_eigen(p)) + t;
      src.push_back(p);
      dst.push_back(q2);
      noisy.push_back(q2 + Vec3{noise(rng), noise(rng), noise(rng)});
    }
    const RigidTransform est = solve_rigid_transform(src, dst);
    worst_rot = std::max(worst_rot, rotation_angle_between(est.rotation(), r));
    worst_trans = std::max(worst_trans, distance(est.translation(), t));
    const RigidTransform est_noisy = solve_rigid_transform(src, noisy);
    double ss = 0;
    for (int i = 0; i < n; ++i) ss += std::pow(distance(est_noisy.apply(src[i]), noisy[i]), 2);
    worst_rms = std::max(worst_rms, std::sqrt(ss / n));
  }
  o.require(worst_rot < 1e-7, "rotation error " + fmt(worst_rot));
  o.require(worst_trans < 1e-9, "translation error " + fmt(worst_trans));
  o.require(worst_rms < 0.003, "noisy rms " + fmt(worst_rms));
  o.note("max rot err " + fmt(worst_rot, 3) + " rad, max trans err " + fmt(worst_trans, 3) +
         " m, max noisy rms " + fmt(worst_rms * 1000, 4) + " mm");
  return o;
}

/// Random structurally valid messages of every type.
Message random_message(std::mt19937_64& rng) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto vec = [&] { return Vec3{real(-1, 1), real(-1, 1), real(-1, 1)}; };
  auto hand = [&] { return pick(2) ? HandId::Left : HandId::Right; };
  auto frame = [&] {
    HandFrame h{real(0, 1e4), hand(), vec(), normalized(vec() + Vec3{0, 0, 2}), {}};
    for (std::size_t i = 0, n = 1 + pick(25); i < n; ++i) h.joints.push_back(vec());
    return h;
  };
  auto text = [&] {
    static const char* const tokens[] = {"a", "Z", "7", " ", "\"", "\\", "\n", "{", ":", "\xc3\xa9"};
    std::string s;
    for (std::size_t i = 0, n = pick(16); i < n; ++i) s += tokens[pick(std::size(tokens))];
    return s;
  };
  switch (pick(8)) {
    case 0: return Hello{static_cast<DeviceKind>(pick(5)), kProtocolVersion,
                         pick(3) == 0 ? std::nullopt : std::optional<bool>(pick(2) == 1)};
    case 1: return HrUpdate{{real(0, 1e5), real(0, 250)}};
    case 2: return HandUpdate{static_cast<FrameId>(pick(3)), frame()};
    case 3: {
      FrameState f{rng() >> 11, real(0, 1e5), vec(), vec(), real(1, 1.08), real(0, 6.28), real(0, 250),
                   pick(2) == 1, {}};
      for (std::size_t i = 0, n = pick(3); i < n; ++i) {
        const HandFrame h = frame();
        f.hands.push_back({h.hand, pick(2) == 1, h.palm_center, h.joints});
      }
      return f;
    }
    case 4: {
      FocalBatch b{rng() >> 11, {}};
      for (std::size_t i = 0, n = pick(20); i < n; ++i) b.commands.push_back({real(0, 1e4), hand(), vec(), real(0, 1)});
      return b;
    }
    case 5: {
      CalibrationSet c;
      for (std::size_t i = 0, n = 3 + pick(8); i < n; ++i) c.pairs.push_back({vec(), vec()});
      return c;
    }
    case 6: {
      CalibrationReply r;
      for (auto& v : r.rotation) v = real(-1, 1);
      r.translation = vec();
      r.residual = real(0, 0.01);
      return r;
    }
    default: return ErrorReply{text(), text()};
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 8 ---------------------------------------------------------------------------
Outcome determinism(const std::string& cli, const fs::path& scenarios, const fs::path& work) {
  Outcome o;
  for (const char* name : {"rest-touch", "exercise", "sweep"}) {
    const fs::path file = scenarios / (std::string(name) + ".ini");
    const fs::path a = work / (std::string(name) + "_a"), b = work / (std::string(name) + "_b");
    const int ra = run_cli(cli, "scenario " + file.string() + " --out " + a.string());
    const int rb = run_cli(cli, "scenario " + file.string() + " --out " + b.string());
    o.require(ra == 0 && rb == 0, std::string(name) + " scenario exit " + std::to_string(ra) + "/" + std::to_string(rb));
    const std::string fa = slurp(a / "focal.csv"), fb = slurp(b / "focal.csv");
    o.require(!fa.empty() && fa == fb, std::string(name) + " focal logs differ");
    o.require(slurp(a / "frames.csv") == slurp(b / "frames.csv"), std::string(name) + " frame logs differ");
  }
  std::mt19937_64 rng(99);
  std::size_t ok = 0;
  constexpr std::size_t kMessages = 10000;
  for (std::size_t i = 0; i < kMessages; ++i) {
    const Message m = random_message(rng);
    const std::string line = encode(m);
    try {
      ok += line.find('\n') == line.size() - 1 && decode(line) == m;
    } catch (const bioholo::Error&) {
    }
  }
  o.require(ok == kMessages, std::to_string(ok) + "/10000 round trips");
  o.note("3 scenarios byte-identical across runs, fuzz " + std::to_string(ok) + "/10000");
  return o;
}

// 9 ---------------------------------------------------------------------------
Outcome cadence() {
  Outcome o;
  AppConfig cfg;
  cfg.server.tcp_port = 0;
  cfg.server.ws_port = 0;
  Server server(cfg, ServerOptions{});
  std::jthread serving([&] { server.run(); });
  const Endpoint ep{"127.0.0.1", server.tcp_port()};

  LineClient observer(ep);
  observer.send(Hello{DeviceKind::Ui, kProtocolVersion, {}});
  EmulatorRun wearable;
  std::jthread hr([&] { wearable = run_wearable_emulator(HrTrace::constant(72.0), ep, 10.0); });

  std::vector<double> arrivals;
  std::uint64_t first_seq = 0, last_seq = 0;
  const auto t0 = steady::now();
  while (seconds_since(t0) < 10.0) {
    auto m = observer.receive(std::chrono::milliseconds(50));
    if (!m) continue;
    if (const auto* f = std::get_if<FrameState>(&*m)) {
      arrivals.push_back(seconds_since(t0));
      if (first_seq == 0) first_seq = f->seq;
      last_seq = f->seq;
    }
  }
  hr.join();
  // Let the session read the final reading before shutting down.
  const std::size_t readings = wearable.send_times.size();
  for (const auto t1 = steady::now(); server.stats().hr_arrivals.size() < readings && seconds_since(t1) < 1.0;) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  server.stop();
  serving.join();
  const ServerStats st = server.stats();

  o.require(arrivals.size() > 2, "no frames observed");
  if (arrivals.size() > 2) {
    const double span = arrivals.back() - arrivals.front();
    // Sequence numbers count ticks, including any frame a slow reader skipped.
    const double rate = static_cast<double>(last_seq - first_seq) / span;
    o.require(std::abs(rate - 60.0) <= 3.0, "observed tick rate " + fmt(rate));
    o.note("observer " + fmt(rate, 5) + " Hz over " + fmt(span, 4) + " s (" + std::to_string(arrivals.size()) +
           " frames)");
  }
  if (st.frame_times.size() > 2) {
    const double span = st.frame_times.back() - st.frame_times.front();
    const double rate = static_cast<double>(st.frame_times.size() - 1) / span;
    o.require(std::abs(rate - 60.0) <= 3.0, "server tick rate " + fmt(rate));
    o.note("server " + fmt(rate, 5) + " Hz");
  }
  auto check_intervals = [&](const std::vector<double>& times, const std::string& what) {
    o.require(times.size() >= 3, what + ": " + std::to_string(times.size()) + " updates");
    double worst = 0;
    for (std::size_t i = 1; i < times.size(); ++i) worst = std::max(worst, std::abs(times[i] - times[i - 1] - 5.0));
    o.require(worst <= 0.1, what + " interval off by " + fmt(worst));
    o.note(what + " " + std::to_string(times.size()) + " updates, max interval error " + fmt(worst * 1000, 3) + " ms");
  };
  check_intervals(wearable.send_times, "wearable sent");
  check_intervals(st.hr_arrivals, "server received");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  std::string scenarios = BIOHOLO_SCENARIO_DIR;
  app.add_option("--cli", cli, "Path to the bioholo executable")->required();
  app.add_option("--scenarios", scenarios, "Scenario directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path work = fs::temp_directory_path() / ("bioholo_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 STM geometry", [&] { return stm_geometry(cli, work); }},
      {"2 heartbeat sync", [&] { return heartbeat_sync(cli, work); }},
      {"3 flatline", [&] { return flatline(cli, work); }},
      {"4 intersection gate", [&] { return intersection_gate(scenarios); }},
      {"5 latency budget", [&] { return latency_budget(); }},
      {"6 focusing oracle", [&] { return focusing(cli, work); }},
      {"7 calibration", [&] { return calibration(); }},
      {"8 determinism and protocol", [&] { return determinism(cli, scenarios, work); }},
      {"9 cadence", [&] { return cadence(); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << std::endl;
  }
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
