#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "conmlo/config.hpp"
#include "conmlo/engine.hpp"
#include "conmlo/metrics.hpp"
#include "conmlo/trace.hpp"

namespace py = pybind11;
using namespace conmlo;

namespace {

py::array_t<float> trace_samples(const RssiTrace& t) {
  py::array_t<float> arr({static_cast<py::ssize_t>(t.num_channels),
                          static_cast<py::ssize_t>(t.num_slots)});
  std::copy(t.samples.begin(), t.samples.end(), arr.mutable_data());
  return arr;
}

py::array_t<std::uint8_t> occupancy_base(const OccupancyOverlay& o) {
  py::array_t<std::uint8_t> arr({static_cast<py::ssize_t>(o.num_channels),
                                 static_cast<py::ssize_t>(o.num_slots)});
  std::copy(o.base.begin(), o.base.end(), arr.mutable_data());
  return arr;
}

py::dict metrics_dict(const RunMetrics& m) {
  py::dict d;
  d["airtime"] = m.airtime;
  d["n_tx"] = m.n_tx;
  d["continuity_runs"] = m.continuity_runs;
  d["hold_durations_ms"] = m.hold_durations_ms;
  d["collisions"] = m.collisions;
  return d;
}

// runs a scenario given as config-file JSON, returns events and per-device
// metrics as plain python structures
py::dict run_config_json(const std::string& json_text, std::uint64_t seed,
                         bool reference) {
  AppConfig cfg = parse_config(json_text, "<python>");
  Scenario s = cfg.scenario;
  s.seed = seed;
  RunLog log = reference ? run_reference(s) : run(s);

  py::dict out;
  out["seed"] = log.seed;
  out["duration_slots"] = log.duration_slots;
  out["collisions"] = log.collisions;
  py::list devices;
  for (std::size_t d = 0; d < log.events.size(); ++d) {
    py::dict dev;
    dev["id"] = s.devices[d].id;
    py::list events;
    for (const TxEvent& e : log.events[d]) {
      py::dict ev;
      ev["link"] = e.link;
      ev["start_slot"] = e.start_slot;
      ev["duration_slots"] = e.duration_slots;
      events.append(ev);
    }
    dev["events"] = events;
    dev["metrics"] = metrics_dict(
        compute_metrics(log, static_cast<int>(d), log.duration_slots,
                        s.devices[d].timing.txop_slots, log.slot_us));
    devices.append(dev);
  }
  out["devices"] = devices;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "slot-based simulator of SLO / MLO / ConMLO channel access";

  py::class_<RssiTrace>(m, "RssiTrace")
      .def_readonly("num_channels", &RssiTrace::num_channels)
      .def_readonly("num_slots", &RssiTrace::num_slots)
      .def_readonly("slot_duration_us", &RssiTrace::slot_duration_us)
      .def_property_readonly("samples", &trace_samples);

  py::class_<OccupancyOverlay>(m, "OccupancyOverlay")
      .def_readonly("num_channels", &OccupancyOverlay::num_channels)
      .def_readonly("num_slots", &OccupancyOverlay::num_slots)
      .def_property_readonly("base", &occupancy_base)
      .def("inject_transmission", &OccupancyOverlay::inject_transmission,
           py::arg("link"), py::arg("start_slot"), py::arg("duration_slots"))
      .def("effective", &OccupancyOverlay::effective, py::arg("channel"),
           py::arg("slot"));

  m.def(
      "synth_trace",
      [](double duty_cycle, std::int64_t mean_busy_burst_slots,
         int num_channels, std::int64_t num_slots, std::uint64_t seed) {
        return synth_trace(
            {duty_cycle, mean_busy_burst_slots, num_channels, num_slots, seed});
      },
      py::arg("duty_cycle"), py::arg("mean_busy_burst_slots"),
      py::arg("num_channels"), py::arg("num_slots"), py::arg("seed") = 0);

  m.def(
      "load_trace",
      [](const std::string& path, const std::string& format) {
        return load_trace(path, format == "csv" ? TraceFormat::kCsv
                                                : TraceFormat::kBinary);
      },
      py::arg("path"), py::arg("format") = "binary");
  m.def("save_trace", &save_trace, py::arg("trace"), py::arg("path"));
  m.def("derive_occupancy", &derive_occupancy, py::arg("trace"),
        py::arg("ed_threshold_dbm") = -82.0);
  m.def("run_config", &run_config_json, py::arg("config_json"),
        py::arg("seed") = 0, py::arg("reference") = false);
}
