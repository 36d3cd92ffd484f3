#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "conmlo/engine.hpp"

namespace conmlo {

struct RunMetrics {
  double airtime = 0.0;
  std::int64_t n_tx = 0;
  // maximal chains of back-to-back acquisitions (0-slot gaps)
  std::vector<std::int64_t> continuity_runs;
  std::vector<double> hold_durations_ms;
  std::int64_t collisions = 0;
};

// Airtime counts actually occupied slots, so it stays exact when the final
// event is clipped at the trace end. Throws on overlapping events.
RunMetrics compute_metrics(const RunLog& log, int device_index,
                           std::int64_t total_slots, int txop_slots,
                           int slot_us = 10);

enum class RunStatistic { kMaxPerTrace, kPooled };

struct CellKey {
  std::string regime;
  int num_links = 0;
  std::string mode;
};

struct AggregateReport {
  CellKey key;
  double mean_airtime = 0.0;
  std::size_t n_traces = 0;
  // empirical CDF over the chosen per-trace statistic: (value, cum_prob)
  std::vector<std::pair<std::int64_t, double>> nca_cdf;
  // hold-duration histogram: duration_ms -> count
  std::map<double, std::int64_t> hold_histogram;
};

AggregateReport aggregate(const std::vector<RunMetrics>& metrics, CellKey key,
                          RunStatistic statistic = RunStatistic::kMaxPerTrace);

// CSV emission, fixed column orders:
//   airtime.csv  regime,L,mode,mean_airtime,n_traces
//   nca_cdf.csv  regime,L,mode,value,cum_prob
//   holds.csv    regime,L,mode,duration_ms,count
std::string airtime_csv_header();
std::string nca_cdf_csv_header();
std::string holds_csv_header();
void append_airtime_rows(std::string& out, const AggregateReport& report);
void append_nca_cdf_rows(std::string& out, const AggregateReport& report);
void append_holds_rows(std::string& out, const AggregateReport& report);

}  // namespace conmlo
