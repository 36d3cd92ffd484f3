#include "conmlo/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "conmlo/rng.hpp"

namespace conmlo {

namespace {

constexpr char kMagic[4] = {'O', 'T', 'R', 'C'};
constexpr std::uint16_t kVersion = 1;

[[noreturn]] void load_fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("load_trace(" + path + "): " + what);
}

template <typename T>
T read_le(std::istream& in, const std::string& path, const char* field) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) {
    load_fail(path, std::string("truncated header reading ") + field +
                        " at byte offset " + std::to_string(in.tellg()));
  }
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

RssiTrace load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) load_fail(path, "cannot open file");

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    load_fail(path, "bad magic, expected OTRC");
  const auto version = read_le<std::uint16_t>(in, path, "version");
  if (version != kVersion)
    load_fail(path, "unsupported version " + std::to_string(version));

  RssiTrace trace;
  trace.num_channels =
      static_cast<int>(read_le<std::uint32_t>(in, path, "num_channels"));
  trace.num_slots =
      static_cast<std::int64_t>(read_le<std::uint64_t>(in, path, "num_slots"));
  trace.slot_duration_us =
      static_cast<int>(read_le<std::uint32_t>(in, path, "slot_duration_us"));

  const std::size_t count =
      static_cast<std::size_t>(trace.num_channels) * trace.num_slots;
  trace.samples.resize(count);
  in.read(reinterpret_cast<char*>(trace.samples.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float)) {
    load_fail(path, "truncated payload: expected " +
                        std::to_string(count * sizeof(float)) +
                        " payload bytes, got " + std::to_string(in.gcount()));
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(trace.samples[i])) {
      load_fail(path, "non-finite sample at payload index " +
                          std::to_string(i) + " (byte offset " +
                          std::to_string(22 + i * sizeof(float)) + ")");
    }
  }
  trace.validate();
  return trace;
}

RssiTrace load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) load_fail(path, "cannot open file");

  std::string line;
  if (!std::getline(in, line)) load_fail(path, "empty file");
  // tolerate trailing \r from CRLF files
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "channel,slot,rssi_dbm")
    load_fail(path, "bad CSV header at row 1, expected channel,slot,rssi_dbm");

  struct Row {
    int channel;
    std::int64_t slot;
    float rssi;
  };
  std::vector<Row> rows;
  int max_channel = -1;
  std::int64_t max_slot = -1;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Row r;
    long long slot_ll = 0;
    char trailing;
    if (std::sscanf(line.c_str(), "%d,%lld,%f%c", &r.channel, &slot_ll, &r.rssi,
                    &trailing) != 3) {
      load_fail(path, "malformed row " + std::to_string(row_no));
    }
    r.slot = slot_ll;
    if (r.channel < 0 || r.slot < 0)
      load_fail(path, "negative index at row " + std::to_string(row_no));
    if (!std::isfinite(r.rssi))
      load_fail(path, "non-finite sample at row " + std::to_string(row_no));
    max_channel = std::max(max_channel, r.channel);
    max_slot = std::max(max_slot, r.slot);
    rows.push_back(r);
  }
  if (rows.empty()) load_fail(path, "no samples");

  RssiTrace trace;
  trace.num_channels = max_channel + 1;
  trace.num_slots = max_slot + 1;
  const std::size_t count =
      static_cast<std::size_t>(trace.num_channels) * trace.num_slots;
  if (rows.size() != count) {
    load_fail(path, "dimension mismatch: " + std::to_string(rows.size()) +
                        " rows for a " + std::to_string(trace.num_channels) +
                        "x" + std::to_string(trace.num_slots) + " grid");
  }
  trace.samples.assign(count, 0.0f);
  std::vector<std::uint8_t> seen(count, 0);
  for (const Row& r : rows) {
    const std::size_t i =
        static_cast<std::size_t>(r.channel) * trace.num_slots + r.slot;
    if (seen[i]) {
      load_fail(path, "duplicate cell channel " + std::to_string(r.channel) +
                          " slot " + std::to_string(r.slot));
    }
    seen[i] = 1;
    trace.samples[i] = r.rssi;
  }
  trace.validate();
  return trace;
}

}  // namespace

void RssiTrace::validate() const {
  if (num_channels <= 0 || num_slots <= 0)
    throw std::invalid_argument("RssiTrace: empty dimensions");
  if (slot_duration_us <= 0)
    throw std::invalid_argument("RssiTrace: slot_duration_us must be > 0");
  if (samples.size() !=
      static_cast<std::size_t>(num_channels) * static_cast<std::size_t>(num_slots))
    throw std::invalid_argument("RssiTrace: sample count does not match dimensions");
  for (float v : samples) {
    if (!std::isfinite(v))
      throw std::invalid_argument("RssiTrace: non-finite sample");
  }
}

void OccupancyOverlay::inject_transmission(int link, std::int64_t start_slot,
                                           std::int64_t duration_slots) {
  if (link < 0 || link >= num_channels)
    throw std::out_of_range("inject_transmission: link " +
                            std::to_string(link) + " out of range");
  if (start_slot < 0 || duration_slots <= 0 || start_slot >= num_slots) return;
  const std::int64_t end = std::min(start_slot + duration_slots, num_slots);
  const std::size_t off = static_cast<std::size_t>(link) * num_slots;
  std::fill(overlay.begin() + off + start_slot, overlay.begin() + off + end, 1);
}

void SynthParams::validate() const {
  if (duty_cycle < 0.0 || duty_cycle > 1.0)
    throw std::invalid_argument("SynthParams: duty_cycle must be in [0,1]");
  if (mean_busy_burst_slots < 1)
    throw std::invalid_argument("SynthParams: mean_busy_burst_slots must be >= 1");
  if (num_channels <= 0 || num_slots <= 0)
    throw std::invalid_argument("SynthParams: empty dimensions");
}

RssiTrace load_trace(const std::string& path, TraceFormat format) {
  return format == TraceFormat::kBinary ? load_binary(path) : load_csv(path);
}

void save_trace(const RssiTrace& trace, const std::string& path) {
  trace.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_trace: cannot open " + path);
  out.write(kMagic, 4);
  write_le<std::uint16_t>(out, kVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(trace.num_channels));
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(trace.num_slots));
  write_le<std::uint32_t>(out,
                          static_cast<std::uint32_t>(trace.slot_duration_us));
  out.write(reinterpret_cast<const char*>(trace.samples.data()),
            static_cast<std::streamsize>(trace.samples.size() * sizeof(float)));
  if (!out) throw std::runtime_error("save_trace: write failed for " + path);
}

OccupancyOverlay derive_occupancy(const RssiTrace& trace,
                                  double ed_threshold_dbm) {
  trace.validate();
  OccupancyOverlay occ;
  occ.num_channels = trace.num_channels;
  occ.num_slots = trace.num_slots;
  occ.base.resize(trace.samples.size());
  occ.overlay.assign(trace.samples.size(), 0);
  for (std::size_t i = 0; i < trace.samples.size(); ++i)
    occ.base[i] = trace.samples[i] >= ed_threshold_dbm ? 1 : 0;
  return occ;
}

RssiTrace synth_trace(const SynthParams& params) {
  params.validate();
  RssiTrace trace;
  trace.num_channels = params.num_channels;
  trace.num_slots = params.num_slots;
  trace.samples.resize(static_cast<std::size_t>(params.num_channels) *
                       params.num_slots);

  Rng rng(params.seed);
  const double p_busy_to_idle = 1.0 / static_cast<double>(params.mean_busy_burst_slots);
  // Stationary busy fraction duty_cycle; degenerate duty 0/1 short-circuit.
  const double p_idle_to_busy =
      params.duty_cycle >= 1.0
          ? 1.0
          : std::min(1.0, params.duty_cycle /
                              ((1.0 - params.duty_cycle) *
                               static_cast<double>(params.mean_busy_burst_slots)));

  for (int ch = 0; ch < params.num_channels; ++ch) {
    float* row = trace.samples.data() +
                 static_cast<std::size_t>(ch) * params.num_slots;
    if (params.duty_cycle <= 0.0) {
      std::fill(row, row + params.num_slots, kSynthIdleDbm);
      continue;
    }
    if (params.duty_cycle >= 1.0) {
      std::fill(row, row + params.num_slots, kSynthBusyDbm);
      continue;
    }
    bool busy = rng.uniform01() < params.duty_cycle;
    for (std::int64_t t = 0; t < params.num_slots; ++t) {
      row[t] = busy ? kSynthBusyDbm : kSynthIdleDbm;
      const double flip = busy ? p_busy_to_idle : p_idle_to_busy;
      if (rng.uniform01() < flip) busy = !busy;
    }
  }
  return trace;
}

SynthParams regime_preset(const std::string& name, int num_channels,
                          std::int64_t num_slots, std::uint64_t seed) {
  SynthParams p;
  p.num_channels = num_channels;
  p.num_slots = num_slots;
  p.seed = seed;
  p.mean_busy_burst_slots = 300;  // 3 ms at 10 us slots
  if (name == "low")
    p.duty_cycle = 0.10;
  else if (name == "medium")
    p.duty_cycle = 0.40;
  else if (name == "high")
    p.duty_cycle = 0.70;
  else
    throw std::invalid_argument("unknown regime preset: " + name);
  return p;
}

}  // namespace conmlo
