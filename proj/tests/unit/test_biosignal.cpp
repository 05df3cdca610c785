#include <cmath>
#include <numbers>
#include <sstream>

#include "bioholo/biosignal.hpp"
#include "helpers.hpp"

using namespace bioholo;

namespace {

// Closed-form pulse written independently of the library.
double gaussian_pulse(double bpm, double t) {
  const double period = 60.0 / bpm;
  const double tau = t - period * std::floor(t / period);
  const double mu = 0.15 * period;
  const double sigma = 0.08 * period;
  return std::exp(-(tau - mu) * (tau - mu) / (2.0 * sigma * sigma));
}

double wrapped_diff(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

TEST_SUITE("biosignal") {

TEST_CASE("ingest keeps samples within the window of the newest") {
  HrBuffer buf;
  buf.ingest({0, 60});
  CHECK(buf.samples().size() == 1);
  buf.ingest({5, 80});
  CHECK(buf.samples().size() == 2);
  buf.ingest({10, 100});
  REQUIRE(buf.samples().size() == 2);
  CHECK(buf.samples().front() == HeartRateSample{5, 80});
}

TEST_CASE("ingest rejects late and out-of-range samples") {
  HrBuffer buf;
  buf.ingest({5, 60});
  CHECK(testing::error_code_of([&] { buf.ingest({4, 60}); }) == ErrorCode::OutOfOrderSample);
  CHECK(testing::error_code_of([&] { buf.ingest({6, 251}); }) == ErrorCode::BpmOutOfRange);
  CHECK(testing::error_code_of([&] { buf.ingest({6, -1}); }) == ErrorCode::BpmOutOfRange);
  CHECK(testing::error_code_of([&] { buf.ingest({6, NAN}); }) == ErrorCode::BpmOutOfRange);
  buf.ingest({5, 70});
  REQUIRE(buf.samples().size() == 1);
  CHECK(buf.samples().front().bpm == 70);
}

TEST_CASE("smoothed bpm: mean, hold, drop") {
  HrBuffer buf;
  CHECK_FALSE(buf.smoothed_bpm(0).has_value());
  buf.ingest({0, 60});
  CHECK(*buf.smoothed_bpm(3) == 60);
  buf.ingest({5, 80});
  CHECK(*buf.smoothed_bpm(6) == 70);
  CHECK(*buf.smoothed_bpm(11) == 80);  // t=0 has left the window
  CHECK(*buf.smoothed_bpm(12) == 80);  // window empty: hold
  CHECK(*buf.smoothed_bpm(20) == 80);  // 15 s after the newest sample
  CHECK_FALSE(buf.smoothed_bpm(20.001).has_value());
}

TEST_CASE("hold-then-drop after a single sample") {
  HrBuffer buf;
  buf.ingest({0, 60});
  for (double now = 0; now <= 15.0; now += 0.5) CHECK(buf.smoothed_bpm(now).has_value());
  CHECK_FALSE(buf.smoothed_bpm(20).has_value());
  CHECK(buf.is_flatline(20));
}

TEST_CASE("flatline predicate") {
  HrBuffer none;
  CHECK(none.is_flatline(0));
  HrBuffer zeros;
  zeros.ingest({0, 0});
  zeros.ingest({5, 0});
  CHECK(zeros.is_flatline(6));
  HrBuffer live;
  live.ingest({0, 60});
  CHECK_FALSE(live.is_flatline(3));
}

TEST_CASE("property: window bound and mean continuity") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> gap(0.1, 4.0), rate(40, 180);
  HrBuffer buf;
  double t = 0;
  for (int i = 0; i < 500; ++i) {
    t += gap(rng);
    buf.ingest({t, rate(rng)});
    const double newest = buf.samples().back().t;
    for (const auto& s : buf.samples()) CHECK(s.t >= newest - buf.config().window);
    const double mean = *buf.smoothed_bpm(t);
    HrBuffer copy = buf;
    copy.ingest({t + 1e-3, mean});
    // The oldest sample may leave the window; only check when it does not.
    if (copy.samples().size() == buf.samples().size() + 1) {
      CHECK(*copy.smoothed_bpm(t + 1e-3) == doctest::Approx(mean).epsilon(1e-12));
    }
    CHECK_FALSE(buf.is_flatline(t));
  }
}

TEST_CASE("ppg waveform closed form") {
  CHECK(ppg_waveform(60, 0.15) == doctest::Approx(1.0).epsilon(1e-12));
  const double sigma = 0.08 * 0.5;
  CHECK(ppg_waveform(120, 0.075) == doctest::Approx(1.0));
  CHECK(ppg_waveform(120, 0.075 + 3 * sigma) == doctest::Approx(std::exp(-4.5)).epsilon(1e-12));
  CHECK(std::exp(-4.5) == doctest::Approx(0.0111).epsilon(0.01));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> t(0, 100), b(1, 250);
  for (int i = 0; i < 1000; ++i) {
    const double bpm = b(rng), tt = t(rng);
    CHECK(ppg_waveform(bpm, tt) == doctest::Approx(gaussian_pulse(bpm, tt)).epsilon(1e-9));
    CHECK(std::abs(ppg_waveform(60, tt) - ppg_waveform(60, tt + 1.0)) < 1e-12);
    const double v = ppg_waveform(bpm, tt);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(testing::error_code_of([] { ppg_waveform(0, 1); }) == ErrorCode::NonPositiveBpm);
}

TEST_CASE("ppg waveform: per-period integral scales with the period") {
  auto integral = [](double bpm) {
    const double period = 60.0 / bpm;
    const int n = 20000;
    double sum = 0;
    for (int i = 0; i < n; ++i) sum += ppg_waveform(bpm, (i + 0.5) * period / n);
    return sum / n;  // integral divided by T
  };
  const double ref = integral(60);
  for (double bpm : {30.0, 45.0, 90.0, 120.0, 200.0}) CHECK(integral(bpm) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("normalize window") {
  const std::vector<TimedValue> constant{{0, 0.4}, {1, 0.4}, {2, 0.4}};
  CHECK(normalize_window(constant, 2) == 0.0);
  const std::vector<TimedValue> ramp{{0, 0.2}, {1, 0.5}, {2, 0.8}};
  CHECK(normalize_window(ramp, 2) == 1.0);
  CHECK(testing::error_code_of([&] { normalize_window(ramp, 100); }) == ErrorCode::EmptyWindow);
}

TEST_CASE("normalize window: replayed synthetic trace spans [0,1] every beat") {
  std::vector<TimedValue> trace;
  const double dt = 0.002;
  for (int i = 0; i <= 15000; ++i) trace.push_back({i * dt, gaussian_pulse(72, i * dt)});
  const double period = 60.0 / 72.0;
  for (int beat = 8; beat < 30; ++beat) {
    double lo = 1, hi = 0;
    const auto first = static_cast<std::size_t>(std::ceil(beat * period / dt));
    const auto last = static_cast<std::size_t>((beat + 1) * period / dt);
    for (std::size_t i = first; i <= last; ++i) {
      const double s = normalize_window(std::span(trace.data(), i + 1), trace[i].t);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    CHECK(lo == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(hi == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("advance phase") {
  CHECK(advance_phase(BeatPhase{0}, 60, 1.0).radians() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(advance_phase(BeatPhase{0}, 120, 0.25).radians() == doctest::Approx(std::numbers::pi));
  CHECK(advance_phase(BeatPhase{1.234}, 0, 17.0).radians() == 1.234);
  CHECK(testing::error_code_of([] { advance_phase(BeatPhase{}, 60, -1); }) == ErrorCode::InvalidArgument);
  CHECK(BeatPhase{-0.5}.radians() == doctest::Approx(kTwoPi - 0.5));
  CHECK(BeatPhase{kTwoPi}.radians() < kTwoPi);
}

TEST_CASE("property: advance phase is additive") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ph(0, kTwoPi), b(0, 250), d(0, 10);
  for (int i = 0; i < 1000; ++i) {
    const BeatPhase p{ph(rng)};
    const double bpm = b(rng), d1 = d(rng), d2 = d(rng);
    const double split = advance_phase(advance_phase(p, bpm, d1), bpm, d2).radians();
    const double whole = advance_phase(p, bpm, d1 + d2).radians();
    CHECK(wrapped_diff(split, whole) < 1e-9);
    CHECK(split >= 0.0);
    CHECK(split < kTwoPi);
  }
}

TEST_CASE("trace readers") {
  std::istringstream hr("# t,bpm\n0,60\n5,72\n");
  const auto s = read_hr_trace(hr);
  REQUIRE(s.size() == 2);
  CHECK(s[1] == HeartRateSample{5, 72});
  std::istringstream unordered("5,60\n0,72\n");
  CHECK_THROWS_AS(read_hr_trace(unordered), Error);
  std::istringstream garbage("0,sixty\n");
  CHECK(testing::error_code_of([&] { read_hr_trace(garbage); }) == ErrorCode::ParseError);
  std::istringstream ppg("0,0.1\n0.01,0.2\n");
  CHECK(read_ppg_trace(ppg).size() == 2);
}

}  // TEST_SUITE
