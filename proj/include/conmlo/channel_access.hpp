#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conmlo/rng.hpp"

namespace conmlo {

using Slot = std::int64_t;

// All durations are integer multiples of the 10 us basic slot. SIFS and the
// empty-slot time are carried for config parity; sensing is whole-slot.
struct TimingConfig {
  int slot_us = 10;
  int empty_slot_us = 10;
  int difs_us = 30;
  int sifs_us = 10;
  int aifs_slots = 3;    // DIFS / slot
  int txop_slots = 500;  // 5 ms
  int cw = 8;
  int delta_slots = 11;  // aifs + cw: worst-case fresh backoff on idle air
  bool bo_exclusive = false;  // draw from [0, cw-1] instead of [0, cw]

  void validate() const;  // throws std::invalid_argument
};

enum class AccessMode { kSlo, kMlo, kConMlo };

AccessMode parse_mode(const std::string& name);
std::string mode_name(AccessMode mode);

enum class LinkPhase { kTransmit, kSense, kWait };

struct LinkState {
  LinkPhase phase = LinkPhase::kSense;
  int backoff = 0;
  Slot idle_streak = 0;  // consecutive idle slots observed, AIFS gate
  std::optional<Slot> tx_started_at;
};

struct SlotDecision {
  // (channel, slot) of a transmission started this slot, if any.
  std::optional<std::pair<int, Slot>> start_tx;
  // channels whose backoff was serviced (decremented or frozen) this slot
  std::vector<int> sensed_links;
};

// One station. links holds channel indices, ascending; link_states and
// active are parallel to it. active marks membership in the contention set
// (the transmitting link, if any, is excluded).
struct DeviceState {
  AccessMode mode = AccessMode::kSlo;
  std::vector<int> links;
  std::vector<LinkState> link_states;
  std::vector<std::uint8_t> active;
  // deferred winner: (position in links, scheduled start slot)
  std::optional<std::pair<int, Slot>> pending_tx;
  std::int64_t n_tx = 0;
  TimingConfig timing;

  static DeviceState make(AccessMode mode, std::vector<int> links,
                          TimingConfig timing);

  // Contention is anticipated by delta only in ConMLO; MLO and SLO restart
  // at transmission end.
  int effective_delta() const {
    return mode == AccessMode::kConMlo ? timing.delta_slots : 0;
  }
  // position of the TRANSMIT link, or -1
  int transmitting_index() const;
};

// Redraws backoff on the given link positions (ascending), moves them to
// SENSE, and resets their AIFS streak.
void start_bo(DeviceState& device, std::span<const int> link_positions,
              Rng& rng);
void start_bo_all(DeviceState& device, Rng& rng);

// Advances one slot. sensed is parallel to device.links (nonzero = busy)
// and must cover every link. now must be strictly increasing across calls.
SlotDecision step_slot(DeviceState& device,
                       std::span<const std::uint8_t> sensed, Slot now,
                       Rng& rng);

// Collision-abort support: reverts a transmission started this slot and
// redraws that link's backoff.
void cancel_transmission(DeviceState& device, Rng& rng);

}  // namespace conmlo
