#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conmlo/engine.hpp"
#include "conmlo/metrics.hpp"

namespace conmlo {

// Parsed configuration file: a Scenario template plus run bookkeeping.
struct AppConfig {
  Scenario scenario;  // seed field unset; one run per entry in seeds
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  RunStatistic run_statistic = RunStatistic::kMaxPerTrace;
};

// Loads and validates a JSON config. Unknown keys are rejected with the
// offending key path; all defaults match the standard parameter set.
AppConfig load_config(const std::string& path);
AppConfig parse_config(const std::string& json_text, const std::string& origin);

}  // namespace conmlo
