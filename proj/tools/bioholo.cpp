#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "bioholo/array_physics.hpp"
#include "bioholo/config.hpp"
#include "bioholo/emulators.hpp"
#include "bioholo/error.hpp"
#include "bioholo/net_client.hpp"
#include "bioholo/scenario.hpp"
#include "bioholo/server.hpp"

using namespace bioholo;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::ParseError:
    case ErrorCode::PortInUse:
    case ErrorCode::ModulationOutOfPerceptibleRange:
      return kUsage;
    default:
      return kFailure;
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open " + path);
  return in;
}

/// Output file, or stdout when the path is empty or "-".
struct Output {
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file.open(path);
      if (!file) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file.is_open() ? file : std::cout; }
  std::ofstream file;
};

struct CommonOpts {
  std::string config_path;
  std::string host = "127.0.0.1";
  std::optional<std::uint16_t> port;
};

AppConfig load(const CommonOpts& o) {
  return load_config(o.config_path.empty() ? std::nullopt
                                           : std::optional<std::filesystem::path>(o.config_path));
}

Endpoint endpoint_for(const CommonOpts& o, const AppConfig& cfg) {
  return Endpoint{o.host, o.port.value_or(cfg.server.tcp_port)};
}

PlaneGrid parse_plane(const std::string& text) {
  const auto eq = text.find('=');
  if (eq != 1) throw Error(ErrorCode::InvalidConfig, "plane must look like z=0.2, got " + text);
  PlaneGrid g;
  switch (text[0]) {
    case 'x': g.axis = PlaneAxis::X; break;
    case 'y': g.axis = PlaneAxis::Y; break;
    case 'z': g.axis = PlaneAxis::Z; break;
    default: throw Error(ErrorCode::InvalidConfig, "plane axis must be x, y or z");
  }
  try {
    g.level = std::stod(text.substr(2));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "plane level is not a number: " + text);
  }
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mid-air haptic heart hologram: server, emulators and offline tools"};
  app.require_subcommand(1);
  CommonOpts common;

  // serve
  auto* serve = app.add_subcommand("serve", "Run the frame loop with TCP and WebSocket endpoints");
  std::optional<std::uint16_t> tcp_port, ws_port;
  bool serve_virtual = false;
  std::optional<std::uint64_t> ticks;
  std::string focal_log, frame_log, serve_mode;
  serve->add_option("--config", common.config_path, "Config file (defaults to $BIOHOLO_CONFIG)");
  serve->add_option("--tcp-port", tcp_port, "TCP line endpoint port (0 = ephemeral)");
  serve->add_option("--ws-port", ws_port, "WebSocket endpoint port (0 = ephemeral)");
  serve->add_flag("--virtual-clock", serve_virtual, "Tick back to back on simulated time");
  serve->add_option("--ticks", ticks, "Stop after this many frames");
  serve->add_option("--focal-log", focal_log, "Write every focal command to this CSV");
  serve->add_option("--frame-log", frame_log, "Write one row per frame to this CSV");
  serve->add_option("--mode", serve_mode, "Haptic mode")->check(CLI::IsMember({"radius", "intensity", "am"}));

  // emulate
  auto* emulate = app.add_subcommand("emulate", "Run a device emulator against a server");
  emulate->require_subcommand(1);
  double duration = 10.0;
  auto add_net = [&](CLI::App* sub) {
    sub->add_option("--host", common.host, "Server address");
    sub->add_option("--port", common.port, "Server TCP port");
    sub->add_option("--config", common.config_path, "Config file");
    sub->add_option("--duration", duration, "Seconds to run")->check(CLI::PositiveNumber);
  };
  auto* wearable = emulate->add_subcommand("wearable", "Stream heart-rate readings");
  double bpm = 60.0;
  std::string trace_path, interp = "step";
  double emit_interval = 5.0;
  add_net(wearable);
  wearable->add_option("--bpm", bpm, "Constant heart rate")->check(CLI::Range(0.0, kMaxBpm));
  wearable->add_option("--trace", trace_path, "CSV trace t,bpm (overrides --bpm)");
  wearable->add_option("--interpolation", interp, "Trace interpolation")->check(CLI::IsMember({"step", "linear"}));
  wearable->add_option("--emit-interval", emit_interval, "Seconds between readings")->check(CLI::PositiveNumber);

  auto* hand = emulate->add_subcommand("hand", "Stream tracked hand frames");
  std::string script_path, hand_name = "right";
  bool loop_script = false;
  add_net(hand);
  hand->add_option("--script", script_path, "Palm keyframe CSV")->required();
  hand->add_option("--hand", hand_name, "left or right")->check(CLI::IsMember({"left", "right"}));
  hand->add_flag("--loop", loop_script, "Repeat the script");

  auto* haptic = emulate->add_subcommand("haptic", "Receive, validate and log focal commands");
  std::string haptic_log, mode_name = "radius";
  double am_freq = 200.0;
  add_net(haptic);
  haptic->add_option("--log", haptic_log, "Focal command log (default stdout)");
  haptic->add_option("--mode", mode_name, "Mode echoed in the log header")->check(CLI::IsMember({"radius", "intensity", "am"}));
  haptic->add_option("--am-freq", am_freq, "AM frequency in Hz");

  // scenario
  auto* scenario = app.add_subcommand("scenario", "Run a scenario file and evaluate its assertions");
  std::string scenario_path, artifact_dir;
  bool scenario_virtual = false;
  scenario->add_option("file", scenario_path, "Scenario file")->required();
  scenario->add_option("--out", artifact_dir, "Directory for report and logs");
  scenario->add_flag("--virtual-clock", scenario_virtual, "Force the virtual clock");

  // render
  auto* render = app.add_subcommand("render", "Synthesize focal commands offline for a static palm");
  std::string render_out, render_mode = "radius", palm_text = "0,0,0.30", normal_text = "0,0,1";
  double render_bpm = 60.0, render_duration = 10.0;
  render->add_option("--bpm", render_bpm, "Constant heart rate (0 = flatline)")->check(CLI::Range(0.0, kMaxBpm));
  render->add_option("--mode", render_mode, "radius, intensity or am")->check(CLI::IsMember({"radius", "intensity", "am"}));
  render->add_option("--am-freq", am_freq, "AM frequency in Hz");
  render->add_option("--duration", render_duration, "Seconds of simulated time")->check(CLI::PositiveNumber);
  render->add_option("--palm", palm_text, "Palm center x,y,z in metres");
  render->add_option("--normal", normal_text, "Palm normal x,y,z");
  render->add_option("--out", render_out, "Focal log path (default stdout)");
  render->add_option("--config", common.config_path, "Config file");
  render->add_flag("--virtual-clock", "Accepted for symmetry; render always uses simulated time");

  // field
  auto* field = app.add_subcommand("field", "Evaluate the array pressure field on a plane");
  std::string focus_text = "0,0,0.2", plane_text = "z=0.2", field_out;
  double extent = 0.06, step = 0.002;
  field->add_option("--focus", focus_text, "Focal point x,y,z");
  field->add_option("--plane", plane_text, "Fixed coordinate, e.g. z=0.2");
  field->add_option("--extent", extent, "Half-width of the grid")->check(CLI::PositiveNumber);
  field->add_option("--step", step, "Grid spacing")->check(CLI::PositiveNumber);
  field->add_option("--out", field_out, "CSV path (default stdout)");
  field->add_option("--config", common.config_path, "Config file");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Solve the headset-to-device transform from point pairs");
  std::string calib_path;
  calibrate->add_option("file", calib_path, "CSV sx,sy,sz,dx,dy,dz")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*serve) {
      AppConfig cfg = load(common);
      if (tcp_port) cfg.server.tcp_port = *tcp_port;
      if (ws_port) cfg.server.ws_port = *ws_port;
      if (!focal_log.empty()) cfg.server.focal_log = focal_log;
      if (!frame_log.empty()) cfg.server.frame_log = frame_log;
      if (!serve_mode.empty()) cfg.loop.mode = HapticMode::parse(serve_mode, cfg.am_frequency);
      validate(cfg);
      ServerOptions opts;
      opts.clock = serve_virtual ? ClockMode::Virtual : ClockMode::Wall;
      opts.ticks = ticks;
      opts.handle_signals = true;
      if (serve_virtual && !ticks) {
        throw Error(ErrorCode::InvalidConfig, "--virtual-clock needs --ticks");
      }
      Server server(cfg, opts);
      std::cout << "listening tcp=" << server.tcp_port() << " ws=" << server.ws_port() << std::endl;
      server.run();
      const ServerStats st = server.stats();
      std::cout << "frames=" << st.frames << " last_seq=" << (st.last_seq ? std::to_string(*st.last_seq) : std::string("none"))
                << " malformed=" << st.malformed << std::endl;
      return kOk;
    }

    if (*wearable) {
      const AppConfig cfg = load(common);
      HrTrace trace = HrTrace::constant(bpm, emit_interval);
      if (!trace_path.empty()) {
        auto in = open_input(trace_path);
        trace = HrTrace(read_hr_trace(in), interp == "linear" ? Interpolation::Linear : Interpolation::Step,
                        emit_interval);
      }
      const EmulatorRun run = run_wearable_emulator(trace, endpoint_for(common, cfg), duration);
      std::cout << "sent=" << run.messages << std::endl;
      return kOk;
    }

    if (*hand) {
      const AppConfig cfg = load(common);
      auto in = open_input(script_path);
      const HandScript script = read_hand_script(in, loop_script);
      const EmulatorRun run = run_hand_emulator(script, hand_from_string(hand_name), cfg.tracker,
                                                endpoint_for(common, cfg), duration);
      std::cout << "sent=" << run.messages << std::endl;
      return kOk;
    }

    if (*haptic) {
      const AppConfig cfg = load(common);
      Output out(haptic_log);
      const HapticDiagnostics d =
          run_haptic_emulator(endpoint_for(common, cfg), &out.stream(), HapticMode::parse(mode_name, am_freq),
                              cfg.loop.render, duration);
      std::cerr << "batches=" << d.batches << " commands=" << d.commands << " violations=" << d.violations
                << std::endl;
      return d.violations == 0 ? kOk : kFailure;
    }

    if (*scenario) {
      Scenario s = load_scenario(scenario_path);
      if (scenario_virtual) s.clock = ClockMode::Virtual;
      const ScenarioRun run = run_scenario(s);
      if (!artifact_dir.empty()) write_artifacts(run, artifact_dir);
      run.report.write_text(std::cout);
      return run.report.passed() ? kOk : kFailure;
    }

    if (*render) {
      const AppConfig cfg = load(common);
      const HapticMode mode = HapticMode::parse(render_mode, am_freq);
      const Vec3 palm = parse_vec3(palm_text);
      const Vec3 normal = normalized(parse_vec3(normal_text));
      HandFrame frame{0.0, HandId::Right, palm, normal, synthesize_joints(palm, normal)};
      validate_hand_frame(frame);
      const std::optional<double> smoothed = render_bpm;
      const double dt = 1.0 / cfg.loop.frame_rate;
      const auto frames = static_cast<std::uint64_t>(std::llround(render_duration * cfg.loop.frame_rate));
      Output out(render_out);
      FocalLogWriter writer(out.stream(), mode, cfg.loop.render);
      SceneState scene = make_scene(cfg.loop.heart);
      std::size_t dropped = 0;
      for (std::uint64_t n = 0; n < frames; ++n) {
        const double t = static_cast<double>(n) * dt;
        if (n > 0) scene = update_scene(scene, smoothed, dt);
        scene.t = t;  // pin to the tick time so the accumulated sum cannot drift past it
        frame.t = t;
        const RenderOutput r = render_tick(scene, std::span(&frame, 1), mode, t, dt, cfg.loop.render);
        writer.write(r.commands);
        dropped += r.dropped_out_of_volume;
      }
      if (dropped > 0) std::cerr << "dropped_out_of_volume=" << dropped << std::endl;
      return kOk;
    }

    if (*field) {
      const AppConfig cfg = load(common);
      const Vec3 focus = parse_vec3(focus_text);
      PlaneGrid grid = parse_plane(plane_text);
      grid.center = focus;
      grid.extent = extent;
      grid.step = step;
      const auto layout = array_layout(cfg.array);
      const PhaseSolution sol = solve_phases(cfg.array, layout, focus);
      const auto samples = sweep_plane(cfg.array, layout, sol.phases, grid);
      Output out(field_out);
      std::ostream& os = out.stream();
      os << "x,y,z,re,im,abs\n";
      char buf[160];
      for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.9g,%.9g,%.9g\n", s.p.x, s.p.y, s.p.z,
                      s.value.real(), s.value.imag(), std::abs(s.value));
        os << buf;
      }
      return kOk;
    }

    if (*calibrate) {
      auto in = open_input(calib_path);
      const auto pairs = read_calibration_csv(in);
      std::vector<Vec3> src, dst;
      for (const auto& p : pairs) {
        src.push_back(p.src);
        dst.push_back(p.dst);
      }
      const RigidTransform t = solve_rigid_transform(src, dst);
      const double residual = calibration_residual(t, src, dst);
      char buf[160];
      for (int r = 0; r < 3; ++r) {
        std::snprintf(buf, sizeof buf, "R%d %.12f %.12f %.12f\n", r, t.rotation()(r, 0), t.rotation()(r, 1),
                      t.rotation()(r, 2));
        std::cout << buf;
      }
      std::snprintf(buf, sizeof buf, "t %.12f %.12f %.12f\nresidual %.3e\n", t.translation().x,
                    t.translation().y, t.translation().z, residual);
      std::cout << buf;
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kFailure;
  }
  return kUsage;
}
