#include "conmlo/channel_access.hpp"

#include <algorithm>
#include <stdexcept>

namespace conmlo {

void TimingConfig::validate() const {
  if (slot_us <= 0) throw std::invalid_argument("TimingConfig: slot_us must be > 0");
  for (int d : {empty_slot_us, difs_us, sifs_us}) {
    if (d <= 0 || d % slot_us != 0)
      throw std::invalid_argument(
          "TimingConfig: durations must be positive multiples of slot_us");
  }
  if (aifs_slots < 1) throw std::invalid_argument("TimingConfig: aifs_slots must be >= 1");
  if (txop_slots < 1) throw std::invalid_argument("TimingConfig: txop_slots must be >= 1");
  if (cw < 1) throw std::invalid_argument("TimingConfig: cw must be >= 1");
  if (delta_slots < 0 || delta_slots > txop_slots)
    throw std::invalid_argument("TimingConfig: delta_slots must be in [0, txop_slots]");
}

AccessMode parse_mode(const std::string& name) {
  if (name == "SLO" || name == "slo") return AccessMode::kSlo;
  if (name == "MLO" || name == "mlo") return AccessMode::kMlo;
  if (name == "CONMLO" || name == "conmlo" || name == "ConMLO")
    return AccessMode::kConMlo;
  throw std::invalid_argument("unknown access mode: " + name);
}

std::string mode_name(AccessMode mode) {
  switch (mode) {
    case AccessMode::kSlo: return "SLO";
    case AccessMode::kMlo: return "MLO";
    case AccessMode::kConMlo: return "CONMLO";
  }
  return "?";
}

DeviceState DeviceState::make(AccessMode mode, std::vector<int> links,
                              TimingConfig timing) {
  if (links.empty()) throw std::invalid_argument("device needs at least one link");
  if (mode == AccessMode::kSlo && links.size() != 1)
    throw std::invalid_argument("SLO device must have exactly one link");
  std::sort(links.begin(), links.end());
  if (std::adjacent_find(links.begin(), links.end()) != links.end())
    throw std::invalid_argument("duplicate link in device link set");

  DeviceState d;
  d.mode = mode;
  d.links = std::move(links);
  d.link_states.assign(d.links.size(), LinkState{});
  d.active.assign(d.links.size(), 1);
  d.timing = timing;
  return d;
}

int DeviceState::transmitting_index() const {
  for (std::size_t i = 0; i < link_states.size(); ++i)
    if (link_states[i].phase == LinkPhase::kTransmit) return static_cast<int>(i);
  return -1;
}

namespace {

int draw_backoff(const TimingConfig& t, Rng& rng) {
  const int hi = t.bo_exclusive ? t.cw - 1 : t.cw;
  return rng.uniform_int(0, std::max(0, hi));
}

// Restarts contention on links currently parked in WAIT. Links already in
// SENSE keep their in-progress countdown.
void start_bo_waiting(DeviceState& d, Rng& rng) {
  for (std::size_t i = 0; i < d.links.size(); ++i) {
    if (!d.active[i] || d.link_states[i].phase != LinkPhase::kWait) continue;
    LinkState& ls = d.link_states[i];
    ls.backoff = draw_backoff(d.timing, rng);
    ls.phase = LinkPhase::kSense;
    ls.idle_streak = 0;
  }
}

void begin_transmission(DeviceState& d, int pos, Slot now, SlotDecision& dec,
                        Rng& rng) {
  LinkState& ls = d.link_states[pos];
  ls.phase = LinkPhase::kTransmit;
  ls.tx_started_at = now;
  ls.idle_streak = 0;
  d.active[pos] = 0;
  dec.start_tx = {d.links[pos], now};
  // delta == txop means contention restarts on the other links right away
  if (d.effective_delta() == d.timing.txop_slots) start_bo_waiting(d, rng);
}

}  // namespace

void start_bo(DeviceState& device, std::span<const int> link_positions,
              Rng& rng) {
  for (int pos : link_positions) {
    if (pos < 0 || static_cast<std::size_t>(pos) >= device.links.size())
      throw std::out_of_range("start_bo: link position out of range");
    LinkState& ls = device.link_states[pos];
    ls.backoff = draw_backoff(device.timing, rng);
    ls.phase = LinkPhase::kSense;
    ls.idle_streak = 0;
  }
}

void start_bo_all(DeviceState& device, Rng& rng) {
  for (std::size_t i = 0; i < device.links.size(); ++i) {
    const int pos = static_cast<int>(i);
    start_bo(device, std::span<const int>(&pos, 1), rng);
  }
}

SlotDecision step_slot(DeviceState& d, std::span<const std::uint8_t> sensed,
                       Slot now, Rng& rng) {
  if (sensed.size() != d.links.size())
    throw std::invalid_argument("step_slot: sensed map must cover every link");

  SlotDecision dec;

  // 1. Sensing: service backoff on contending links. Links given a fresh
  //    backoff later this slot start observing the medium next slot.
  std::vector<int> winners;
  for (std::size_t i = 0; i < d.links.size(); ++i) {
    LinkState& ls = d.link_states[i];
    if (!d.active[i] || ls.phase != LinkPhase::kSense) continue;
    if (sensed[i]) {
      ls.idle_streak = 0;  // busy: freeze, AIFS must be re-earned
    } else {
      ++ls.idle_streak;
      if (ls.idle_streak > d.timing.aifs_slots) {
        if (ls.backoff > 0) --ls.backoff;
        if (ls.backoff == 0) winners.push_back(static_cast<int>(i));
      }
    }
    dec.sensed_links.push_back(d.links[i]);
  }

  // 2. Transmission bookkeeping: anticipation and end-of-TXOP.
  const int tx = d.transmitting_index();
  if (tx >= 0) {
    const Slot t0 = *d.link_states[tx].tx_started_at;
    const Slot end = t0 + d.timing.txop_slots;
    const Slot anticipate = end - d.effective_delta();
    if (now == anticipate && now != end && !d.pending_tx)
      start_bo_waiting(d, rng);
    if (now == end) {
      ++d.n_tx;
      d.link_states[tx].phase = LinkPhase::kSense;
      d.link_states[tx].tx_started_at.reset();
      if (d.effective_delta() == 0) start_bo_waiting(d, rng);
      d.active[tx] = 1;
      start_bo(d, std::span<const int>(&tx, 1), rng);
      if (d.pending_tx) {
        const int pos = d.pending_tx->first;
        d.pending_tx.reset();
        begin_transmission(d, pos, now, dec, rng);
      }
    }
  }

  // 3. Winner resolution.
  if (!winners.empty()) {
    const int w =
        winners[rng.uniform_int(0, static_cast<int>(winners.size()) - 1)];
    for (std::size_t i = 0; i < d.links.size(); ++i) {
      if (d.active[i] && d.link_states[i].phase == LinkPhase::kSense)
        d.link_states[i].phase = LinkPhase::kWait;
    }
    const int ongoing = d.transmitting_index();
    if (ongoing < 0) {
      begin_transmission(d, w, now, dec, rng);
    } else {
      // winner during the anticipation window: deferred start at the
      // ongoing transmission's end slot
      d.pending_tx = {w, *d.link_states[ongoing].tx_started_at +
                             d.timing.txop_slots};
    }
  }

  return dec;
}

void cancel_transmission(DeviceState& device, Rng& rng) {
  const int tx = device.transmitting_index();
  if (tx < 0) throw std::logic_error("cancel_transmission: no ongoing transmission");
  device.link_states[tx].phase = LinkPhase::kSense;
  device.link_states[tx].tx_started_at.reset();
  device.active[tx] = 1;
  start_bo(device, std::span<const int>(&tx, 1), rng);
}

}  // namespace conmlo
