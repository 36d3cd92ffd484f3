// Literal transcription of the per-slot access state machine over full
// occupancy matrices. Deliberately naive: every device, link, and slot is
// visited; sensing reads complete per-device overlay matrices. Serves as
// the equivalence oracle for the optimized engine in engine.cpp.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "conmlo/engine.hpp"
#include "conmlo/rng.hpp"

namespace conmlo {

namespace {

enum class RefPhase { kTransmit, kSense, kWait };

struct RefDevice {
  AccessMode mode;
  TimingConfig timing;
  std::vector<int> links;        // channel indices, ascending
  std::vector<RefPhase> state;   // S_l
  std::vector<int> backoff;      // BO_l
  std::vector<Slot> streak;      // consecutive idle observations
  std::vector<Slot> last_bo_at;  // slot of the most recent Start-BO
  std::vector<bool> in_set;      // membership in the contention set L'
  int tx_pos = -1;
  Slot tx_t0 = 0;
  bool has_pending = false;
  int pending_pos = -1;
  std::int64_t n_tx = 0;

  int delta() const {
    return mode == AccessMode::kConMlo ? timing.delta_slots : 0;
  }
};

void ref_start_bo(RefDevice& d, int pos, Slot now, Rng& rng) {
  const int hi = d.timing.bo_exclusive ? d.timing.cw - 1 : d.timing.cw;
  d.backoff[pos] = rng.uniform_int(0, std::max(0, hi));
  d.state[pos] = RefPhase::kSense;
  d.streak[pos] = 0;
  d.last_bo_at[pos] = now;
}

// Start-BO over the contention set: restarts links parked in WAIT. Links
// already counting down in SENSE are left alone.
void ref_start_bo_set(RefDevice& d, Slot now, Rng& rng) {
  for (std::size_t i = 0; i < d.links.size(); ++i)
    if (d.in_set[i] && d.state[i] == RefPhase::kWait)
      ref_start_bo(d, static_cast<int>(i), now, rng);
}

void ref_begin_tx(RefDevice& d, int pos, Slot now, Rng& rng) {
  d.state[pos] = RefPhase::kTransmit;
  d.tx_pos = pos;
  d.tx_t0 = now;
  d.in_set[pos] = false;
  if (d.delta() == d.timing.txop_slots) ref_start_bo_set(d, now, rng);
}

}  // namespace

RunLog run_reference(const Scenario& scenario) {
  const RssiTrace trace = materialize_trace(scenario);
  return run_reference(scenario, trace);
}

RunLog run_reference(const Scenario& scenario, const RssiTrace& trace) {
  for (const auto& dc : scenario.devices) dc.timing.validate();
  const Slot total = scenario.duration_slots == 0 ? trace.num_slots
                                                  : scenario.duration_slots;
  if (total < 0 || total > trace.num_slots)
    throw std::invalid_argument(
        "scenario validation error: duration_slots exceeds trace length");
  const int num_devices = static_cast<int>(scenario.devices.size());
  if (num_devices == 0)
    throw std::invalid_argument("scenario validation error: no devices");

  const OccupancyOverlay base = derive_occupancy(trace, scenario.ed_threshold_dbm);

  // one full write-back matrix per device so self-exclusion is literal
  std::vector<OccupancyOverlay> overlays;
  for (int d = 0; d < num_devices; ++d)
    overlays.push_back(derive_occupancy(trace, scenario.ed_threshold_dbm));

  std::vector<Rng> rngs;
  std::vector<RefDevice> devs;
  for (const auto& dc : scenario.devices) {
    rngs.emplace_back(derive_stream(scenario.seed, dc.id));
    RefDevice d;
    d.mode = dc.mode;
    d.timing = dc.timing;
    d.links = dc.links;
    std::sort(d.links.begin(), d.links.end());
    if (dc.mode == AccessMode::kSlo && d.links.size() != 1)
      throw std::invalid_argument("SLO device must have exactly one link");
    for (int l : d.links) {
      if (l < 0 || l >= trace.num_channels)
        throw std::invalid_argument("scenario validation error: device '" +
                                    dc.id + "' link index out of range: " +
                                    std::to_string(l));
    }
    const std::size_t n = d.links.size();
    d.state.assign(n, RefPhase::kSense);
    d.backoff.assign(n, 0);
    d.streak.assign(n, 0);
    d.last_bo_at.assign(n, -1);
    d.in_set.assign(n, true);
    devs.push_back(std::move(d));
  }
  for (int d = 0; d < num_devices; ++d)
    for (std::size_t i = 0; i < devs[d].links.size(); ++i)
      ref_start_bo(devs[d], static_cast<int>(i), -1, rngs[d]);

  RunLog log;
  log.seed = scenario.seed;
  log.duration_slots = total;
  log.txop_slots = scenario.devices.front().timing.txop_slots;
  log.slot_us = trace.slot_duration_us;
  log.events.resize(num_devices);

  std::vector<std::vector<std::uint8_t>> sensed(num_devices);
  for (Slot t = 0; t < total; ++t) {
    // snapshot: base occupancy plus every OTHER device's overlay
    for (int d = 0; d < num_devices; ++d) {
      const RefDevice& dev = devs[d];
      sensed[d].assign(dev.links.size(), 0);
      for (std::size_t i = 0; i < dev.links.size(); ++i) {
        const int ch = dev.links[i];
        bool busy = base.base_at(ch, t);
        for (int d2 = 0; d2 < num_devices && !busy; ++d2)
          if (d2 != d && overlays[d2].overlay[static_cast<std::size_t>(ch) *
                                                  overlays[d2].num_slots + t])
            busy = true;
        sensed[d][i] = busy ? 1 : 0;
      }
    }

    struct Start {
      int dev;
      int pos;
    };
    std::vector<Start> starts;

    for (int d = 0; d < num_devices; ++d) {
      RefDevice& dev = devs[d];
      Rng& rng = rngs[d];
      std::vector<int> winner_set;  // L_w

      for (std::size_t i = 0; i < dev.links.size(); ++i) {
        const int pos = static_cast<int>(i);
        switch (dev.state[i]) {
          case RefPhase::kSense: {
            if (!dev.in_set[i]) break;
            if (dev.last_bo_at[i] == t) break;  // fresh backoff senses next slot
            if (sensed[d][i]) {
              dev.streak[i] = 0;
            } else {
              dev.streak[i] += 1;
              if (dev.streak[i] > dev.timing.aifs_slots) {
                if (dev.backoff[i] > 0) dev.backoff[i] -= 1;
                if (dev.backoff[i] == 0) winner_set.push_back(pos);
              }
            }
            break;
          }
          case RefPhase::kTransmit: {
            if (t == dev.tx_t0 + dev.timing.txop_slots - dev.delta() &&
                t != dev.tx_t0 + dev.timing.txop_slots && !dev.has_pending)
              ref_start_bo_set(dev, t, rng);
            if (t == dev.tx_t0 + dev.timing.txop_slots) {
              dev.n_tx += 1;
              dev.state[i] = RefPhase::kSense;
              dev.tx_pos = -1;
              if (dev.delta() == 0) ref_start_bo_set(dev, t, rng);
              dev.in_set[i] = true;
              ref_start_bo(dev, pos, t, rng);
              if (dev.has_pending) {
                const int p = dev.pending_pos;
                dev.has_pending = false;
                dev.pending_pos = -1;
                ref_begin_tx(dev, p, t, rng);
                starts.push_back({d, p});
              }
            }
            break;
          }
          case RefPhase::kWait:
            // Do nothing.
            break;
        }
      }

      if (!winner_set.empty()) {
        const int w = winner_set[rng.uniform_int(
            0, static_cast<int>(winner_set.size()) - 1)];
        for (std::size_t i = 0; i < dev.links.size(); ++i)
          if (dev.in_set[i] && dev.state[i] == RefPhase::kSense)
            dev.state[i] = RefPhase::kWait;
        if (dev.tx_pos < 0) {
          ref_begin_tx(dev, w, t, rng);
          starts.push_back({d, w});
        } else {
          dev.has_pending = true;
          dev.pending_pos = w;
        }
      }
    }

    // collision handling, identical rule to the optimized engine
    std::map<int, std::vector<int>> by_channel;
    for (const Start& s : starts)
      by_channel[devs[s.dev].links[s.pos]].push_back(s.dev);
    std::vector<Start> kept;
    for (const Start& s : starts) {
      const int ch = devs[s.dev].links[s.pos];
      if (by_channel[ch].size() > 1 &&
          scenario.collision_mode == CollisionMode::kAbort) {
        RefDevice& dev = devs[s.dev];
        dev.state[s.pos] = RefPhase::kSense;
        dev.tx_pos = -1;
        dev.in_set[s.pos] = true;
        ref_start_bo(dev, s.pos, t, rngs[s.dev]);
      } else {
        kept.push_back(s);
      }
    }
    for (const auto& [ch, ds] : by_channel)
      if (ds.size() > 1) ++log.collisions;

    for (const Start& s : kept) {
      const int ch = devs[s.dev].links[s.pos];
      const Slot dur = std::min<Slot>(devs[s.dev].timing.txop_slots, total - t);
      log.events[s.dev].push_back({s.dev, ch, t, dur});
      overlays[s.dev].inject_transmission(ch, t, dur);
    }
  }

  for (int d = 0; d < num_devices; ++d)
    if (devs[d].tx_pos >= 0) ++devs[d].n_tx;

  // final states in the public representation
  for (int d = 0; d < num_devices; ++d) {
    const RefDevice& rd = devs[d];
    DeviceState ds = DeviceState::make(rd.mode, rd.links, rd.timing);
    for (std::size_t i = 0; i < rd.links.size(); ++i) {
      LinkState& ls = ds.link_states[i];
      ls.backoff = rd.backoff[i];
      ls.idle_streak = rd.streak[i];
      ls.phase = rd.state[i] == RefPhase::kTransmit ? LinkPhase::kTransmit
                 : rd.state[i] == RefPhase::kSense  ? LinkPhase::kSense
                                                    : LinkPhase::kWait;
      ds.active[i] = rd.in_set[i] ? 1 : 0;
    }
    if (rd.tx_pos >= 0) ds.link_states[rd.tx_pos].tx_started_at = rd.tx_t0;
    ds.n_tx = rd.n_tx;
    log.final_states.push_back(std::move(ds));
  }
  log.scenario_hash = scenario_hash(scenario, trace);
  return log;
}

}  // namespace conmlo
