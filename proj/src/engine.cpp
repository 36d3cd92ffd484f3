#include "conmlo/engine.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "conmlo/rng.hpp"

namespace conmlo {

std::uint64_t scenario_hash(const Scenario& s, const RssiTrace& trace) {
  std::ostringstream os;
  if (const auto* f = std::get_if<TraceFile>(&s.trace))
    os << "file:" << f->path << ":" << (f->format == TraceFormat::kBinary ? "bin" : "csv");
  else if (const auto* p = std::get_if<SynthParams>(&s.trace))
    os << "synth:" << p->duty_cycle << ":" << p->mean_busy_burst_slots << ":"
       << p->num_channels << ":" << p->num_slots << ":" << p->seed;
  os << "|" << trace.num_channels << "x" << trace.num_slots << "|phi="
     << s.ed_threshold_dbm << "|T=" << s.duration_slots << "|"
     << s.regime_label << "|col="
     << (s.collision_mode == CollisionMode::kAbort ? "abort" : "permissive");
  for (const auto& d : s.devices) {
    os << "|dev:" << d.id << ":" << mode_name(d.mode) << ":links=";
    for (int l : d.links) os << l << ",";
    const auto& t = d.timing;
    os << "slot=" << t.slot_us << ",aifs=" << t.aifs_slots
       << ",txop=" << t.txop_slots << ",cw=" << t.cw
       << ",delta=" << t.delta_slots << ",boexcl=" << t.bo_exclusive;
  }
  return stable_hash(os.str());
}

namespace {

Slot resolve_duration(const Scenario& s, const RssiTrace& trace) {
  if (s.duration_slots == 0) return trace.num_slots;
  if (s.duration_slots < 0 || s.duration_slots > trace.num_slots)
    throw std::invalid_argument(
        "scenario validation error: duration_slots exceeds trace length");
  return s.duration_slots;
}

void validate_scenario(const Scenario& s, const RssiTrace& trace) {
  if (s.devices.empty())
    throw std::invalid_argument("scenario validation error: no devices");
  for (const auto& d : s.devices) {
    d.timing.validate();
    for (int l : d.links) {
      if (l < 0 || l >= trace.num_channels)
        throw std::invalid_argument("scenario validation error: device '" +
                                    d.id + "' link index out of range: " +
                                    std::to_string(l));
    }
  }
}

std::vector<Rng> make_device_rngs(const Scenario& s) {
  std::vector<Rng> rngs;
  rngs.reserve(s.devices.size());
  for (const auto& d : s.devices)
    rngs.emplace_back(derive_stream(s.seed, d.id));
  return rngs;
}

}  // namespace

RssiTrace materialize_trace(const Scenario& scenario) {
  if (const auto* f = std::get_if<TraceFile>(&scenario.trace))
    return load_trace(f->path, f->format);
  return synth_trace(std::get<SynthParams>(scenario.trace));
}

RunLog run(const Scenario& scenario) {
  const RssiTrace trace = materialize_trace(scenario);
  return run(scenario, trace);
}

RunLog run(const Scenario& scenario, const RssiTrace& trace) {
  validate_scenario(scenario, trace);
  const Slot total = resolve_duration(scenario, trace);
  const int num_devices = static_cast<int>(scenario.devices.size());

  OccupancyOverlay occ = derive_occupancy(trace, scenario.ed_threshold_dbm);
  std::vector<Rng> rngs = make_device_rngs(scenario);

  std::vector<DeviceState> devices;
  devices.reserve(num_devices);
  for (const auto& dc : scenario.devices)
    devices.push_back(DeviceState::make(dc.mode, dc.links, dc.timing));
  for (int d = 0; d < num_devices; ++d) start_bo_all(devices[d], rngs[d]);

  RunLog log;
  log.scenario_hash = scenario_hash(scenario, trace);
  log.seed = scenario.seed;
  log.duration_slots = total;
  log.txop_slots = scenario.devices.front().timing.txop_slots;
  log.slot_us = trace.slot_duration_us;
  log.events.resize(num_devices);

  // Ongoing transmission per device: (channel, start, logical end). Sensing
  // consults these instead of the overlay so a device never sees itself.
  struct Ongoing {
    int link = -1;
    Slot start = 0;
    Slot end = 0;
  };
  std::vector<Ongoing> ongoing(num_devices);

  auto sensed_busy = [&](int dev, int channel, Slot t) -> bool {
    if (occ.base_at(channel, t)) return true;
    for (int d2 = 0; d2 < num_devices; ++d2) {
      if (d2 == dev) continue;
      const Ongoing& o = ongoing[d2];
      if (o.link == channel && o.start <= t && t < o.end) return true;
    }
    return false;
  };

  std::vector<std::vector<std::uint8_t>> sensed(num_devices);
  std::vector<std::uint8_t> will_step(num_devices);
  struct Start {
    int dev;
    int link;
  };
  std::vector<Start> starts;

  for (Slot t = 0; t < total; ++t) {
    // A transmitting device with an empty contention set is inert until its
    // next bookkeeping slot; skip it without touching its RNG.
    for (int d = 0; d < num_devices; ++d) {
      will_step[d] = 1;
      const DeviceState& dev = devices[d];
      const int tx = dev.transmitting_index();
      if (tx < 0) continue;
      bool any_sensing = false;
      for (std::size_t i = 0; i < dev.links.size(); ++i) {
        if (dev.active[i] && dev.link_states[i].phase == LinkPhase::kSense) {
          any_sensing = true;
          break;
        }
      }
      if (any_sensing) continue;
      const Slot end = *dev.link_states[tx].tx_started_at + dev.timing.txop_slots;
      const Slot next_event =
          dev.pending_tx ? end : std::min(end - dev.effective_delta(), end);
      if (t < next_event) will_step[d] = 0;
    }

    // pre-slot snapshot: no device sees another's same-slot decision
    for (int d = 0; d < num_devices; ++d) {
      if (!will_step[d]) continue;
      const DeviceState& dev = devices[d];
      sensed[d].resize(dev.links.size());
      for (std::size_t i = 0; i < dev.links.size(); ++i)
        sensed[d][i] = sensed_busy(d, dev.links[i], t) ? 1 : 0;
    }

    starts.clear();
    for (int d = 0; d < num_devices; ++d) {
      if (!will_step[d]) continue;
      SlotDecision dec = step_slot(devices[d], sensed[d], t, rngs[d]);
      if (dec.start_tx) starts.push_back({d, dec.start_tx->first});
    }

    // same-slot same-link starts by multiple devices
    if (starts.size() > 1 && scenario.collision_mode == CollisionMode::kAbort) {
      std::map<int, std::vector<int>> by_link;
      for (const Start& s : starts) by_link[s.link].push_back(s.dev);
      std::vector<Start> kept;
      for (const Start& s : starts) {
        if (by_link[s.link].size() > 1) {
          cancel_transmission(devices[s.dev], rngs[s.dev]);
        } else {
          kept.push_back(s);
        }
      }
      for (const auto& [link, devs] : by_link)
        if (devs.size() > 1) ++log.collisions;
      starts = kept;
    } else if (starts.size() > 1) {
      std::map<int, int> by_link;
      for (const Start& s : starts) ++by_link[s.link];
      for (const auto& [link, n] : by_link)
        if (n > 1) ++log.collisions;
    }

    for (const Start& s : starts) {
      const int txop = devices[s.dev].timing.txop_slots;
      const Slot dur = std::min<Slot>(txop, total - t);
      log.events[s.dev].push_back({s.dev, s.link, t, dur});
      occ.inject_transmission(s.link, t, dur);
      ongoing[s.dev] = {s.link, t, t + txop};
    }
  }

  // A transmission still in flight at the end of the trace is clipped and
  // counted as a completed acquisition.
  for (int d = 0; d < num_devices; ++d)
    if (devices[d].transmitting_index() >= 0) ++devices[d].n_tx;

  log.final_states = std::move(devices);
  return log;
}

std::string runlog_to_jsonl(const RunLog& log, const Scenario& scenario) {
  std::ostringstream os;
  for (std::size_t d = 0; d < log.events.size(); ++d) {
    for (const TxEvent& e : log.events[d]) {
      os << "{\"device\":\"" << scenario.devices[d].id << "\",\"link\":"
         << e.link << ",\"start_slot\":" << e.start_slot
         << ",\"duration_slots\":" << e.duration_slots
         << ",\"end_slot\":" << e.end_slot() << "}\n";
    }
  }
  return os.str();
}

}  // namespace conmlo
