#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bioholo/clock.hpp"
#include "bioholo/config.hpp"
#include "bioholo/emulators.hpp"

namespace bioholo {

/// Declarative check evaluated after a scenario run.
struct Assertion {
  enum class Kind {
    BpmConverges,      ///< target, by_time, tolerance
    StaticHaptics,     ///< every command has equal radius and intensity, scale == 1
    EnvelopePeriod,    ///< expected, from_time[, to_time[, tolerance]]
    HapticOnset,       ///< expected_time[, tolerance_frames]
    HapticTransitions, ///< expected transition times; tolerance via tolerance_frames
    NoCommandsWhileInactive,
    Violations,        ///< expected count
    MinCommands,       ///< minimum accepted focal commands
  };
  Kind kind;
  std::vector<double> args;
  std::string text;  ///< original `key = value` for the report
};

struct Scenario {
  std::string name = "scenario";
  HrTrace hr = HrTrace::constant(60.0);
  std::optional<HandScript> hand;
  HandId hand_id = HandId::Right;
  double duration = 10.0;
  ClockMode clock = ClockMode::Virtual;
  double transition_tolerance_frames = 1.0;
  std::vector<Assertion> assertions;
  AppConfig config{};
};

/// Scenario documents use the config format: a [scenario] section (name,
/// duration, clock, hr_trace, hr_interpolation, emit_interval, hand_script,
/// hand, hand_loop, mode, am_frequency), an [assert] section, and optionally
/// any config section. Relative paths resolve against the document's directory.
Scenario load_scenario(const std::filesystem::path& path);

struct AssertionResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ScenarioReport {
  std::string name;
  std::vector<AssertionResult> results;
  std::size_t frames = 0;
  std::size_t commands = 0;
  std::size_t violations = 0;

  bool passed() const;
  void write_text(std::ostream& out) const;
  void write_csv(std::ostream& out) const;
};

/// Per-frame record kept by the runner.
struct FrameRecord {
  FrameState state;
  std::size_t command_count = 0;
};

struct ScenarioRun {
  ScenarioReport report;
  std::vector<FrameRecord> frames;
  /// Accepted commands paired with the circle radius measured from the palm.
  std::vector<FocalPointCommand> commands;
  std::vector<double> radii;
  std::string focal_log;
  std::string frame_log;
  std::vector<double> smoothed_bpm;  ///< server-side smoothed bpm per frame (NaN when none)
};

/// Runs server and emulators tick by tick on the virtual clock in one thread.
/// Only virtual-clock scenarios are supported in-process; wall-clock runs go
/// through the socket server.
ScenarioRun run_scenario(const Scenario& s);

/// Writes report.txt, report.csv, focal.csv and frames.csv under `dir`.
void write_artifacts(const ScenarioRun& run, const std::filesystem::path& dir);

/// One CSV row per frame: seq,t,bpm,phase,scale,flatline,left_active,right_active.
std::string frame_log_header();
std::string frame_log_row(const FrameState& f);

}  // namespace bioholo
