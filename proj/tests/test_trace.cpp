#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "conmlo/rng.hpp"
#include "conmlo/trace.hpp"

using namespace conmlo;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / name;
}

RssiTrace make_trace(int channels, std::int64_t slots, float value) {
  RssiTrace t;
  t.num_channels = channels;
  t.num_slots = slots;
  t.samples.assign(static_cast<std::size_t>(channels) * slots, value);
  return t;
}

}  // namespace

TEST_CASE("csv load echoes input") {
  const fs::path p = temp_file("trace_echo.csv");
  {
    std::ofstream out(p);
    out << "channel,slot,rssi_dbm\n";
    for (int ch = 0; ch < 2; ++ch)
      for (int t = 0; t < 4; ++t) out << ch << "," << t << ",-100\n";
  }
  RssiTrace trace = load_trace(p.string(), TraceFormat::kCsv);
  CHECK(trace.num_channels == 2);
  CHECK(trace.num_slots == 4);
  for (float v : trace.samples) CHECK(v == doctest::Approx(-100.0f));
}

TEST_CASE("csv errors name the offending row") {
  const fs::path p = temp_file("trace_bad.csv");
  {
    std::ofstream out(p);
    out << "channel,slot,rssi_dbm\n0,0,-90\n0,1,oops\n";
  }
  CHECK_THROWS_WITH_AS(load_trace(p.string(), TraceFormat::kCsv),
                       doctest::Contains("row 3"), std::runtime_error);
}

TEST_CASE("csv incomplete grid is a dimension mismatch") {
  const fs::path p = temp_file("trace_gap.csv");
  {
    std::ofstream out(p);
    out << "channel,slot,rssi_dbm\n0,0,-90\n1,3,-90\n";
  }
  CHECK_THROWS_WITH_AS(load_trace(p.string(), TraceFormat::kCsv),
                       doctest::Contains("dimension mismatch"),
                       std::runtime_error);
}

TEST_CASE("binary round trip preserves the trace") {
  RssiTrace t = make_trace(8, 2000, -100.0f);
  t.samples[3 * 2000 + 17] = -55.5f;
  const fs::path p = temp_file("trace_rt.otrc");
  save_trace(t, p.string());
  RssiTrace back = load_trace(p.string(), TraceFormat::kBinary);
  CHECK(back.num_channels == 8);
  CHECK(back.num_slots == 2000);
  CHECK(back.slot_duration_us == 10);
  CHECK(back.samples == t.samples);
}

TEST_CASE("binary short payload reports truncation") {
  RssiTrace t = make_trace(6, 100, -100.0f);
  const fs::path p = temp_file("trace_trunc.otrc");
  save_trace(t, p.string());
  fs::resize_file(p, fs::file_size(p) - 4);  // drop one f32
  CHECK_THROWS_WITH_AS(load_trace(p.string(), TraceFormat::kBinary),
                       doctest::Contains("truncated payload"),
                       std::runtime_error);
}

TEST_CASE("binary bad magic rejected") {
  const fs::path p = temp_file("trace_magic.otrc");
  {
    std::ofstream out(p, std::ios::binary);
    out << "NOPE notatrace";
  }
  CHECK_THROWS_WITH_AS(load_trace(p.string(), TraceFormat::kBinary),
                       doctest::Contains("bad magic"), std::runtime_error);
}

TEST_CASE("occupancy boundary is inclusive on the busy side") {
  RssiTrace t = make_trace(1, 3, 0.0f);
  t.samples = {-90.0f, -82.0f, -60.0f};
  OccupancyOverlay occ = derive_occupancy(t, -82.0);
  CHECK_FALSE(occ.base_at(0, 0));  // below threshold: idle
  CHECK(occ.base_at(0, 1));        // exactly at threshold: busy
  CHECK(occ.base_at(0, 2));
}

TEST_CASE("occupancy is monotone in the threshold") {
  Rng rng(7);
  RssiTrace t = make_trace(3, 500, 0.0f);
  for (float& v : t.samples)
    v = -100.0f + 60.0f * static_cast<float>(rng.uniform01());
  OccupancyOverlay lo = derive_occupancy(t, -90.0);
  OccupancyOverlay hi = derive_occupancy(t, -70.0);
  for (std::size_t i = 0; i < lo.base.size(); ++i) {
    if (hi.base[i]) CHECK(lo.base[i]);  // raising phi never creates busy
  }
  CHECK(derive_occupancy(t, -1000.0).base ==
        std::vector<std::uint8_t>(t.samples.size(), 1));
  CHECK(derive_occupancy(t, 1000.0).base ==
        std::vector<std::uint8_t>(t.samples.size(), 0));
}

TEST_CASE("inject_transmission uses half-open interval and OR semantics") {
  RssiTrace t = make_trace(2, 100000, -100.0f);
  OccupancyOverlay occ = derive_occupancy(t, -82.0);
  occ.inject_transmission(0, 100, 500);
  CHECK(occ.effective(0, 99) == occ.base_at(0, 99));
  CHECK(occ.effective(0, 100));
  CHECK(occ.effective(0, 599));
  CHECK(occ.effective(0, 600) == occ.base_at(0, 600));
  CHECK_FALSE(occ.effective(1, 100));

  auto snapshot = occ.overlay;
  occ.inject_transmission(0, 100, 500);  // idempotent
  CHECK(occ.overlay == snapshot);

  // commutes
  OccupancyOverlay a = derive_occupancy(t, -82.0);
  OccupancyOverlay b = derive_occupancy(t, -82.0);
  a.inject_transmission(0, 10, 20);
  a.inject_transmission(1, 5, 30);
  b.inject_transmission(1, 5, 30);
  b.inject_transmission(0, 10, 20);
  CHECK(a.overlay == b.overlay);
}

TEST_CASE("inject_transmission clips at the trace end") {
  RssiTrace t = make_trace(1, 100000, -100.0f);
  OccupancyOverlay occ = derive_occupancy(t, -82.0);
  occ.inject_transmission(0, 99900, 500);
  CHECK(occ.effective(0, 99900));
  CHECK(occ.effective(0, 99999));
  CHECK_THROWS_AS(occ.inject_transmission(5, 0, 1), std::out_of_range);
}

TEST_CASE("synthetic trace degenerate duty cycles") {
  SynthParams p{0.0, 300, 2, 1000, 42};
  for (float v : synth_trace(p).samples) CHECK(v == kSynthIdleDbm);
  p.duty_cycle = 1.0;
  for (float v : synth_trace(p).samples) CHECK(v == kSynthBusyDbm);
}

TEST_CASE("synthetic trace is reproducible from its seed") {
  SynthParams p{0.4, 300, 4, 20000, 99};
  CHECK(synth_trace(p).samples == synth_trace(p).samples);
  p.seed = 100;
  SynthParams q{0.4, 300, 4, 20000, 99};
  CHECK(synth_trace(p).samples != synth_trace(q).samples);
}

TEST_CASE("synthetic busy fraction converges to the duty cycle") {
  // stationarity oracle: count busy slots in the generated output
  SynthParams p{0.4, 300, 1, 1000000, 5};
  RssiTrace t = synth_trace(p);
  std::int64_t busy = 0;
  for (float v : t.samples)
    if (v >= -82.0f) ++busy;
  const double fraction = static_cast<double>(busy) / t.samples.size();
  CHECK(fraction == doctest::Approx(0.4).epsilon(0.05));
  CHECK(std::abs(fraction - 0.4) < 0.02);
}

TEST_CASE("regime presets are ordered by occupancy") {
  CHECK(regime_preset("low", 6, 1000, 0).duty_cycle <
        regime_preset("medium", 6, 1000, 0).duty_cycle);
  CHECK(regime_preset("medium", 6, 1000, 0).duty_cycle <
        regime_preset("high", 6, 1000, 0).duty_cycle);
  CHECK_THROWS_AS(regime_preset("extreme", 6, 1000, 0),
                  std::invalid_argument);
}
