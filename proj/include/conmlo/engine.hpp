#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "conmlo/channel_access.hpp"
#include "conmlo/trace.hpp"

namespace conmlo {

enum class CollisionMode { kPermissive, kAbort };

struct DeviceConfig {
  std::string id;
  AccessMode mode = AccessMode::kSlo;
  std::vector<int> links;
  TimingConfig timing;
};

struct TraceFile {
  std::string path;
  TraceFormat format = TraceFormat::kBinary;
};

struct Scenario {
  std::variant<TraceFile, SynthParams> trace;
  std::vector<DeviceConfig> devices;
  double ed_threshold_dbm = -82.0;
  std::int64_t duration_slots = 0;  // 0 = whole trace
  std::uint64_t seed = 0;
  std::string regime_label = "custom";
  CollisionMode collision_mode = CollisionMode::kPermissive;
};

struct TxEvent {
  int device = 0;  // index into Scenario::devices
  int link = 0;    // channel index
  Slot start_slot = 0;
  Slot duration_slots = 0;

  Slot end_slot() const { return start_slot + duration_slots; }
  friend bool operator==(const TxEvent&, const TxEvent&) = default;
};

struct RunLog {
  std::uint64_t scenario_hash = 0;
  std::uint64_t seed = 0;
  Slot duration_slots = 0;
  int txop_slots = 0;
  int slot_us = 10;
  std::vector<std::vector<TxEvent>> events;  // per device, start order
  std::vector<DeviceState> final_states;
  std::int64_t collisions = 0;  // same-slot same-link start events
};

// Slot loop over the trace for all devices, with interference write-back:
// each device senses the base occupancy plus every other device's
// transmissions, never its own. Deterministic in (scenario, seed).
RunLog run(const Scenario& scenario);
RunLog run(const Scenario& scenario, const RssiTrace& trace);

// Literal per-slot transcription of the access state machine over full
// occupancy matrices. Same contract and same RNG stream as run(); kept
// unoptimized as the cross-check oracle.
RunLog run_reference(const Scenario& scenario);
RunLog run_reference(const Scenario& scenario, const RssiTrace& trace);

RssiTrace materialize_trace(const Scenario& scenario);

// Stable digest of everything the result depends on besides the seed.
std::uint64_t scenario_hash(const Scenario& scenario, const RssiTrace& trace);

// JSON-lines serialization of the event log, one TxEvent per line.
std::string runlog_to_jsonl(const RunLog& log, const Scenario& scenario);

}  // namespace conmlo
