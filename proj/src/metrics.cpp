#include "conmlo/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace conmlo {

namespace {

std::string format_prob(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

RunMetrics compute_metrics(const RunLog& log, int device_index,
                           std::int64_t total_slots, int txop_slots,
                           int slot_us) {
  if (device_index < 0 ||
      static_cast<std::size_t>(device_index) >= log.events.size())
    throw std::out_of_range("compute_metrics: device index out of range");
  if (total_slots <= 0 || txop_slots <= 0)
    throw std::invalid_argument("compute_metrics: bad slot counts");

  const auto& events = log.events[device_index];
  RunMetrics m;
  m.collisions = log.collisions;
  m.n_tx = static_cast<std::int64_t>(events.size());

  std::int64_t occupied = 0;
  std::int64_t run_len = 0;
  std::int64_t run_occupied = 0;
  Slot prev_end = -1;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const TxEvent& e = events[i];
    if (i > 0) {
      if (e.start_slot < prev_end)
        throw std::runtime_error(
            "compute_metrics: overlapping or unsorted events at index " +
            std::to_string(i));
      if (e.start_slot == prev_end) {
        // zero-gap: the chain continues
        ++run_len;
        run_occupied += e.duration_slots;
      } else {
        m.continuity_runs.push_back(run_len);
        m.hold_durations_ms.push_back(
            static_cast<double>(run_occupied) * slot_us / 1000.0);
        run_len = 1;
        run_occupied = e.duration_slots;
      }
    } else {
      run_len = 1;
      run_occupied = e.duration_slots;
    }
    occupied += e.duration_slots;
    prev_end = e.end_slot();
  }
  if (run_len > 0) {
    m.continuity_runs.push_back(run_len);
    m.hold_durations_ms.push_back(static_cast<double>(run_occupied) * slot_us /
                                  1000.0);
  }

  m.airtime = static_cast<double>(occupied) / static_cast<double>(total_slots);
  return m;
}

AggregateReport aggregate(const std::vector<RunMetrics>& metrics, CellKey key,
                          RunStatistic statistic) {
  if (metrics.empty())
    throw std::invalid_argument("aggregate: empty metrics group for regime '" +
                                key.regime + "'");

  AggregateReport rep;
  rep.key = std::move(key);
  rep.n_traces = metrics.size();

  double airtime_sum = 0.0;
  std::vector<std::int64_t> values;
  for (const RunMetrics& m : metrics) {
    airtime_sum += m.airtime;
    if (statistic == RunStatistic::kMaxPerTrace) {
      std::int64_t mx = 0;
      for (std::int64_t r : m.continuity_runs) mx = std::max(mx, r);
      values.push_back(mx);
    } else {
      values.insert(values.end(), m.continuity_runs.begin(),
                    m.continuity_runs.end());
    }
    for (double h : m.hold_durations_ms) ++rep.hold_histogram[h];
  }
  rep.mean_airtime = airtime_sum / static_cast<double>(metrics.size());

  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool last_of_value =
        i + 1 == values.size() || values[i + 1] != values[i];
    if (last_of_value)
      rep.nca_cdf.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  return rep;
}

std::string airtime_csv_header() { return "regime,L,mode,mean_airtime,n_traces\n"; }
std::string nca_cdf_csv_header() { return "regime,L,mode,value,cum_prob\n"; }
std::string holds_csv_header() { return "regime,L,mode,duration_ms,count\n"; }

void append_airtime_rows(std::string& out, const AggregateReport& r) {
  out += r.key.regime + "," + std::to_string(r.key.num_links) + "," +
         r.key.mode + "," + format_prob(r.mean_airtime) + "," +
         std::to_string(r.n_traces) + "\n";
}

void append_nca_cdf_rows(std::string& out, const AggregateReport& r) {
  for (const auto& [value, prob] : r.nca_cdf) {
    out += r.key.regime + "," + std::to_string(r.key.num_links) + "," +
           r.key.mode + "," + std::to_string(value) + "," + format_prob(prob) +
           "\n";
  }
}

void append_holds_rows(std::string& out, const AggregateReport& r) {
  for (const auto& [duration_ms, count] : r.hold_histogram) {
    char dur[32];
    std::snprintf(dur, sizeof(dur), "%.3f", duration_ms);
    out += r.key.regime + "," + std::to_string(r.key.num_links) + "," +
           r.key.mode + "," + dur + "," + std::to_string(count) + "\n";
  }
}

}  // namespace conmlo
