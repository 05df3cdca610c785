#include "bioholo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/property_tree/ptree.hpp>

#include "bioholo/csv.hpp"
#include "bioholo/error.hpp"
#include "bioholo/session.hpp"

namespace bioholo {

namespace pt = boost::property_tree;

namespace {

std::string unquote(const std::string& raw) {
  std::string s = csv::trim(raw);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<double> numbers(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  try {
    for (const auto& part : csv::split(unquote(raw), ',')) {
      if (!part.empty()) out.push_back(csv::parse_double(part));
    }
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidConfig, key + ": expected numbers, got '" + raw + "'");
  }
  return out;
}

bool boolean(const std::string& key, const std::string& raw) {
  const std::string v = unquote(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::InvalidConfig, key + ": expected true/false, got '" + raw + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void require_args(const std::string& key, const std::vector<double>& args, std::size_t min,
                  std::size_t max) {
  if (args.size() < min || args.size() > max) {
    throw Error(ErrorCode::InvalidConfig, key + ": wrong number of values");
  }
}

/// Keys may carry a `.label` suffix so one check can appear several times.
Assertion parse_assertion(const std::string& full_name, const std::string& raw) {
  const std::string key = "assert." + full_name;
  const std::string text = full_name + " = " + unquote(raw);
  const std::string name = full_name.substr(0, full_name.find('.'));
  using K = Assertion::Kind;
  if (name == "static_haptics" || name == "no_commands_while_inactive") {
    if (!boolean(key, raw)) throw Error(ErrorCode::InvalidConfig, key + ": only 'true' is meaningful");
    return {name == "static_haptics" ? K::StaticHaptics : K::NoCommandsWhileInactive, {}, text};
  }
  auto args = numbers(key, raw);
  if (name == "bpm_converges") { require_args(key, args, 3, 3); return {K::BpmConverges, args, text}; }
  if (name == "envelope_period") { require_args(key, args, 2, 4); return {K::EnvelopePeriod, args, text}; }
  if (name == "haptic_onset") { require_args(key, args, 1, 2); return {K::HapticOnset, args, text}; }
  if (name == "haptic_transitions") { require_args(key, args, 0, 64); return {K::HapticTransitions, args, text}; }
  if (name == "violations") { require_args(key, args, 1, 1); return {K::Violations, args, text}; }
  if (name == "min_commands") { require_args(key, args, 1, 1); return {K::MinCommands, args, text}; }
  throw Error(ErrorCode::InvalidConfig, key + ": unknown assertion");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

bool any_active(const FrameState& f) {
  return std::any_of(f.hands.begin(), f.hands.end(), [](const HandState& h) { return h.haptic_active; });
}

struct Evaluator {
  const Scenario& s;
  const ScenarioRun& run;
  std::size_t violations;

  double frame_period() const { return 1.0 / s.config.loop.frame_rate; }

  AssertionResult bpm_converges(const Assertion& a) const {
    const double target = a.args[0], by = a.args[1], tol = a.args[2];
    std::optional<double> reached;
    for (std::size_t i = 0; i < run.frames.size(); ++i) {
      const double bpm = run.smoothed_bpm[i];
      if (!std::isnan(bpm) && std::abs(bpm - target) <= tol) {
        if (!reached) reached = run.frames[i].state.t;
      } else {
        reached.reset();
      }
    }
    if (!reached) return {a.text, false, "smoothed bpm never settled at target"};
    return {a.text, *reached <= by + 1e-9, "settled at t=" + fmt(*reached)};
  }

  AssertionResult static_haptics(const Assertion& a) const {
    if (run.commands.empty()) return {a.text, false, "no focal commands emitted"};
    const auto [rlo, rhi] = std::minmax_element(run.radii.begin(), run.radii.end());
    const auto [ilo, ihi] = std::minmax_element(
        run.commands.begin(), run.commands.end(),
        [](const FocalPointCommand& x, const FocalPointCommand& y) { return x.intensity < y.intensity; });
    const double radius_spread = *rhi - *rlo;
    const double intensity_spread = ihi->intensity - ilo->intensity;
    const bool scale_static = std::all_of(run.frames.begin(), run.frames.end(),
                                          [](const FrameRecord& f) { return f.state.scale == 1.0; });
    const bool ok = radius_spread < 1e-12 && intensity_spread == 0.0 && scale_static;
    return {a.text, ok,
            "radius spread " + std::to_string(radius_spread) + ", intensity spread " +
                std::to_string(intensity_spread) + (scale_static ? ", scale 1" : ", scale varies")};
  }

  AssertionResult envelope_period(const Assertion& a) const {
    const double expected = a.args[0];
    const double from = a.args[1];
    const double to = a.args.size() > 2 ? a.args[2] : s.duration;
    const double tol = a.args.size() > 3 ? a.args[3] : frame_period();
    const bool use_radius = s.config.loop.mode.kind() == HapticMode::Kind::PulsingRadius;
    std::vector<double> series;
    std::vector<double> times;
    for (std::size_t i = 0; i < run.commands.size(); ++i) {
      const auto& c = run.commands[i];
      if (c.hand != s.hand_id || c.t < from || c.t > to) continue;
      series.push_back(use_radius ? run.radii[i] : c.intensity);
      times.push_back(c.t);
    }
    if (series.size() < 3) return {a.text, false, "too few commands in window"};
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    const auto period = estimate_period(series, dt, 2.0 * frame_period(), 2.5);
    if (!period) return {a.text, false, "no periodic envelope found"};
    return {a.text, std::abs(*period - expected) <= tol, "measured period " + fmt(*period) + " s"};
  }

  std::vector<double> transitions() const {
    std::vector<double> out;
    bool active = false;
    for (const auto& f : run.frames) {
      const bool now = any_active(f.state);
      if (now != active) out.push_back(f.state.t);
      active = now;
    }
    return out;
  }

  AssertionResult haptic_onset(const Assertion& a) const {
    const double tol = (a.args.size() > 1 ? a.args[1] : 1.0) * frame_period();
    const auto tr = transitions();
    if (tr.empty()) return {a.text, false, "haptics never became active"};
    return {a.text, std::abs(tr.front() - a.args[0]) <= tol + 1e-9, "onset at t=" + fmt(tr.front())};
  }

  AssertionResult haptic_transitions(const Assertion& a) const {
    const double tol = s.transition_tolerance_frames * frame_period();
    const auto tr = transitions();
    std::string observed;
    for (double t : tr) observed += (observed.empty() ? "" : " ") + fmt(t);
    if (tr.size() != a.args.size()) {
      return {a.text, false, "observed " + std::to_string(tr.size()) + " transitions: " + observed};
    }
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (std::abs(tr[i] - a.args[i]) > tol + 1e-9) return {a.text, false, "observed " + observed};
    }
    return {a.text, true, "observed " + observed};
  }

  AssertionResult no_commands_while_inactive(const Assertion& a) const {
    std::size_t bad = 0;
    for (const auto& f : run.frames) {
      if (!any_active(f.state) && f.command_count > 0) ++bad;
    }
    return {a.text, bad == 0, std::to_string(bad) + " inactive frames carried commands"};
  }

  AssertionResult evaluate(const Assertion& a) const {
    using K = Assertion::Kind;
    switch (a.kind) {
      case K::BpmConverges: return bpm_converges(a);
      case K::StaticHaptics: return static_haptics(a);
      case K::EnvelopePeriod: return envelope_period(a);
      case K::HapticOnset: return haptic_onset(a);
      case K::HapticTransitions: return haptic_transitions(a);
      case K::NoCommandsWhileInactive: return no_commands_while_inactive(a);
      case K::Violations:
        return {a.text, static_cast<double>(violations) == a.args[0],
                std::to_string(violations) + " violations"};
      case K::MinCommands:
        return {a.text, static_cast<double>(run.commands.size()) >= a.args[0],
                std::to_string(run.commands.size()) + " commands"};
    }
    return {a.text, false, "unknown assertion"};
  }
};

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  const pt::ptree tree = read_config_tree(path);
  const std::filesystem::path base = path.parent_path();

  Scenario s;
  pt::ptree config_sections = tree;
  config_sections.erase("scenario");
  config_sections.erase("assert");

  const auto section = tree.get_child_optional("scenario");
  if (!section) throw Error(ErrorCode::InvalidConfig, "scenario: missing [scenario] section");

  std::optional<std::string> hr_path;
  std::optional<std::string> hand_path;
  std::optional<std::string> mode;
  Interpolation interpolation = Interpolation::Step;
  double emit_interval = 5.0;
  bool hand_loop = false;
  std::optional<double> constant_bpm;

  for (const auto& [name, node] : *section) {
    const std::string key = "scenario." + name;
    const std::string& v = node.data();
    if (name == "name") s.name = unquote(v);
    else if (name == "duration") s.duration = numbers(key, v).at(0);
    else if (name == "clock") {
      const std::string c = unquote(v);
      if (c == "virtual") s.clock = ClockMode::Virtual;
      else if (c == "wall") s.clock = ClockMode::Wall;
      else throw Error(ErrorCode::InvalidConfig, key + ": expected virtual or wall");
    }
    else if (name == "hr_trace") hr_path = unquote(v);
    else if (name == "bpm") constant_bpm = numbers(key, v).at(0);
    else if (name == "hr_interpolation") {
      const std::string m = unquote(v);
      if (m == "step") interpolation = Interpolation::Step;
      else if (m == "linear") interpolation = Interpolation::Linear;
      else throw Error(ErrorCode::InvalidConfig, key + ": expected step or linear");
    }
    else if (name == "emit_interval") emit_interval = numbers(key, v).at(0);
    else if (name == "hand_script") hand_path = unquote(v);
    else if (name == "hand") {
      try { s.hand_id = hand_from_string(unquote(v)); }
      catch (const Error&) { throw Error(ErrorCode::InvalidConfig, key + ": expected left or right"); }
    }
    else if (name == "hand_loop") hand_loop = boolean(key, v);
    else if (name == "mode") mode = unquote(v);
    else if (name == "am_frequency") {
      config_sections.put("haptics.am_frequency", unquote(v));
    }
    else if (name == "transition_tolerance_frames") s.transition_tolerance_frames = numbers(key, v).at(0);
    else throw Error(ErrorCode::InvalidConfig, key + ": unknown key");
  }
  if (mode) config_sections.put("haptics.mode", *mode);
  apply_config(config_sections, s.config);
  validate(s.config);
  if (!(s.duration > 0.0)) throw Error(ErrorCode::InvalidConfig, "scenario.duration: must be > 0");

  try {
    if (hr_path) {
      std::ifstream in(resolve(base, *hr_path));
      if (!in) throw Error(ErrorCode::InvalidConfig, "scenario.hr_trace: cannot open " + *hr_path);
      s.hr = HrTrace(read_hr_trace(in), interpolation, emit_interval);
    } else {
      s.hr = HrTrace::constant(constant_bpm.value_or(60.0), emit_interval);
    }
    if (hand_path) {
      std::ifstream in(resolve(base, *hand_path));
      if (!in) throw Error(ErrorCode::InvalidConfig, "scenario.hand_script: cannot open " + *hand_path);
      s.hand = read_hand_script(in, hand_loop);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, std::string("scenario input: ") + e.what());
  }

  if (const auto asserts = tree.get_child_optional("assert")) {
    for (const auto& [name, node] : *asserts) s.assertions.push_back(parse_assertion(name, node.data()));
  }
  return s;
}

bool ScenarioReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const AssertionResult& r) { return r.passed; });
}

void ScenarioReport::write_text(std::ostream& out) const {
  out << "scenario " << name << ": " << (passed() ? "PASS" : "FAIL") << " (" << frames
      << " frames, " << commands << " commands, " << violations << " violations)\n";
  for (const auto& r : results) {
    out << "  [" << (r.passed ? "PASS" : "FAIL") << "] " << r.name << " : " << r.detail << '\n';
  }
}

void ScenarioReport::write_csv(std::ostream& out) const {
  out << "assertion,result,detail\n";
  for (const auto& r : results) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    std::string assertion = r.name;
    std::replace(assertion.begin(), assertion.end(), ',', ';');
    out << assertion << ',' << (r.passed ? "pass" : "fail") << ',' << detail << '\n';
  }
}

std::string frame_log_header() { return "seq,t,bpm,phase,scale,flatline,left_active,right_active\n"; }

std::string frame_log_row(const FrameState& f) {
  bool left = false;
  bool right = false;
  for (const auto& h : f.hands) (h.hand == HandId::Left ? left : right) = h.haptic_active;
  char line[256];
  std::snprintf(line, sizeof line, "%llu,%.6f,%.6f,%.6f,%.6f,%d,%d,%d\n",
                static_cast<unsigned long long>(f.seq), f.t, f.bpm, f.phase, f.scale,
                f.flatline ? 1 : 0, left ? 1 : 0, right ? 1 : 0);
  return line;
}

ScenarioRun run_scenario(const Scenario& s) {
  if (s.clock != ClockMode::Virtual) {
    throw Error(ErrorCode::InvalidConfig, "scenario.clock: in-process runs need the virtual clock");
  }
  const FrameLoopConfig& lc = s.config.loop;
  FrameLoop loop(lc);
  SessionRegistry registry;
  SessionRouter router(registry, loop);

  WearableEmulator wearable(s.hr);
  std::optional<HandEmulator> hand;
  if (s.hand) hand.emplace(*s.hand, s.hand_id, s.config.tracker);

  std::ostringstream focal;
  HapticEmulator haptic(&focal, lc.mode, lc.render);

  const SessionId wearable_id = router.open();
  router.on_message(wearable_id, wearable.hello());
  SessionId hand_id = 0;
  if (hand) {
    hand_id = router.open();
    router.on_message(hand_id, hand->hello());
  }
  const SessionId haptic_id = router.open();
  router.on_message(haptic_id, haptic.hello());

  ScenarioRun run;
  std::string frame_log = frame_log_header();
  VirtualClock clock(lc.frame_rate);
  const auto ticks = static_cast<std::uint64_t>(std::llround(s.duration * lc.frame_rate));

  for (std::uint64_t i = 0; i < ticks; ++i) {
    const double now = clock.advance();
    for (auto& m : wearable.poll(now)) router.on_message(wearable_id, std::move(m), now);
    if (hand) {
      for (auto& m : hand->poll(now)) router.on_message(hand_id, std::move(m), now);
    }
    TickOutput out = loop.tick(now);

    const std::size_t before = haptic.accepted().size();
    haptic.consume(out.focal);
    const auto& accepted = haptic.accepted();
    for (std::size_t k = before; k < accepted.size(); ++k) {
      const auto& c = accepted[k];
      double radius = std::numeric_limits<double>::quiet_NaN();
      for (const auto& h : out.frame.hands) {
        if (h.hand == c.hand) radius = distance(c.pos, h.palm);
      }
      run.commands.push_back(c);
      run.radii.push_back(radius);
    }
    const auto bpm = loop.hr_buffer().smoothed_bpm(now);
    run.smoothed_bpm.push_back(bpm ? *bpm : std::numeric_limits<double>::quiet_NaN());
    frame_log += frame_log_row(out.frame);
    run.frames.push_back({std::move(out.frame), accepted.size() - before});
  }
  (void)haptic_id;

  run.focal_log = focal.str();
  run.frame_log = std::move(frame_log);

  ScenarioReport& report = run.report;
  report.name = s.name;
  report.frames = run.frames.size();
  report.commands = run.commands.size();
  report.violations = haptic.diagnostics().violations;
  const Evaluator eval{s, run, report.violations};
  for (const auto& a : s.assertions) report.results.push_back(eval.evaluate(a));
  return run;
}

void write_artifacts(const ScenarioRun& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "focal.csv") << run.focal_log;
  std::ofstream(dir / "frames.csv") << run.frame_log;
  {
    std::ofstream out(dir / "report.txt");
    run.report.write_text(out);
  }
  std::ofstream out(dir / "report.csv");
  run.report.write_csv(out);
}

}  // namespace bioholo
