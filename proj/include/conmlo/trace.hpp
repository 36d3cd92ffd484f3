#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace conmlo {

// RSSI used for synthetic busy/idle slots. Only the comparison against the
// ED threshold matters; both values sit well clear of the -82 dBm default.
inline constexpr float kSynthBusyDbm = -60.0f;
inline constexpr float kSynthIdleDbm = -100.0f;

enum class TraceFormat { kBinary, kCsv };

// Multi-channel RSSI history at fixed slot resolution, channel-major.
// Immutable after load/synthesis.
struct RssiTrace {
  int num_channels = 0;
  std::int64_t num_slots = 0;
  int slot_duration_us = 10;
  std::vector<float> samples;

  float at(int channel, std::int64_t slot) const {
    return samples[static_cast<std::size_t>(channel) * num_slots + slot];
  }

  void validate() const;  // throws std::invalid_argument on bad shape/values
};

// Binary busy/idle view of a trace plus a mutable overlay where simulated
// transmissions are written back. Effective occupancy is base OR overlay.
struct OccupancyOverlay {
  int num_channels = 0;
  std::int64_t num_slots = 0;
  std::vector<std::uint8_t> base;
  std::vector<std::uint8_t> overlay;

  bool base_at(int channel, std::int64_t slot) const {
    return base[static_cast<std::size_t>(channel) * num_slots + slot] != 0;
  }
  bool effective(int channel, std::int64_t slot) const {
    const std::size_t i = static_cast<std::size_t>(channel) * num_slots + slot;
    return (base[i] | overlay[i]) != 0;
  }

  // OR-writes one transmission. Clipped at the trace end; the link index
  // must be valid.
  void inject_transmission(int link, std::int64_t start_slot,
                           std::int64_t duration_slots);
};

struct SynthParams {
  double duty_cycle = 0.0;                  // stationary busy fraction target
  std::int64_t mean_busy_burst_slots = 1;   // mean busy run length
  int num_channels = 1;
  std::int64_t num_slots = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

RssiTrace load_trace(const std::string& path, TraceFormat format);
void save_trace(const RssiTrace& trace, const std::string& path);

// base(l,t) = 1 iff sample >= ed_threshold_dbm (busy boundary inclusive).
OccupancyOverlay derive_occupancy(const RssiTrace& trace,
                                  double ed_threshold_dbm);

// Independent two-state Markov chain per channel. Bit-identical for
// identical params.
RssiTrace synth_trace(const SynthParams& params);

// Presets approximating the low/medium/high occupancy regimes.
// Throws on an unknown name.
SynthParams regime_preset(const std::string& name, int num_channels,
                          std::int64_t num_slots, std::uint64_t seed);

}  // namespace conmlo
