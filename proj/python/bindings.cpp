#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tdwn/analytics.hpp"
#include "tdwn/figures.hpp"
#include "tdwn/scenario_file.hpp"
#include "tdwn/sim_engine.hpp"

namespace py = pybind11;
using namespace tdwn;

namespace {

ScenarioFile scenario_from(const std::string& path, const std::vector<std::string>& overrides) {
  return path.empty() ? default_scenario(overrides) : load_scenario(path, overrides);
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  for (const auto& [k, v] : m.key_values()) d[py::str(k)] = v;
  return d;
}

py::dict entry_dict(const std::string& key, const std::vector<std::string>& values, double expires_at) {
  py::dict d;
  d["key"] = key;
  d["values"] = values;
  d["expires_at"] = expires_at;
  return d;
}

py::dict snapshot_dict(const Snapshot& s) {
  py::dict d;
  d["at"] = s.at;
  py::list priority, normal, txs;
  for (const auto& e : s.priority) priority.append(entry_dict(e.key.str(), e.values(), e.expires_at));
  for (const auto& e : s.normal) normal.append(entry_dict(e.key.str(), e.values(), e.expires_at));
  for (const auto& t : s.transactions) {
    py::dict tx;
    tx["question"] = t.question.str();
    tx["mode"] = std::string(to_string(t.mode));
    tx["failure_count"] = t.failure_count;
    tx["outstanding"] = t.outstanding;
    tx["holdon"] = t.holdon;
    tx["priority_blocked"] = t.priority_blocked;
    tx["validated"] = t.validated;
    txs.append(tx);
  }
  d["priority"] = priority;
  d["normal"] = normal;
  d["transactions"] = txs;
  return d;
}

/// Simulator that owns its event-log buffer.
class PySimulator {
 public:
  PySimulator(const std::string& path, const std::vector<std::string>& overrides)
      : sim_(scenario_from(path, overrides).scenario, &log_) {}

  void advance_to(double t) { sim_.advance_to(t); }
  void run() { sim_.run(); }
  double now() const { return sim_.now(); }
  py::dict snapshot() const { return snapshot_dict(sim_.snapshot()); }
  py::dict metrics() const { return metrics_dict(sim_.metrics()); }
  std::string event_log() const { return log_.str(); }
  std::uint64_t inject_client_query(double at, const std::string& qname) {
    return sim_.inject_client_query(at, QuestionKey::make(qname));
  }
  void inject_auth_update(double at) { sim_.inject_auth_update(at); }

 private:
  std::ostringstream log_;
  Simulator sim_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "TDWN defense simulator and closed-form analytics";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);
  py::register_exception<UnreachableTarget>(m, "UnreachableTarget", PyExc_ValueError);

  m.def("guess_space_size",
        [](std::uint64_t id_space, std::uint64_t port_space, double n_auth, bool product) {
          return guess_space_size(id_space, port_space, n_auth, product ? GuessForm::Product : GuessForm::Additive);
        },
        py::arg("id_space") = 65536, py::arg("port_space") = 64000, py::arg("n_auth") = 2.5,
        py::arg("product") = false);
  m.def("effective_outstanding", &effective_outstanding, py::arg("resolver_cap"), py::arg("response_time"),
        py::arg("send_rate"));

  m.def("p_round_fail", &p_round_fail, py::arg("h"), py::arg("d"), py::arg("g"));
  m.def("success_within_rounds", &success_within_rounds, py::arg("rounds"), py::arg("h"), py::arg("d"),
        py::arg("g"));
  m.def("independence_bound", &independence_bound, py::arg("i_update"), py::arg("i_ttl"));

  py::class_<TimeToSuccess>(m, "TimeToSuccess")
      .def_readonly("rounds", &TimeToSuccess::rounds)
      .def_readonly("round_period", &TimeToSuccess::round_period)
      .def_readonly("seconds", &TimeToSuccess::seconds)
      .def_property_readonly("years", &TimeToSuccess::years);
  m.def("time_to_success", &time_to_success, py::arg("target_prob"), py::arg("lifecycle"), py::arg("tod"),
        py::arg("d"), py::arg("g"), py::arg("response_time") = 0.02, py::arg("caching_enabled") = true);

  py::class_<SuccessCurve>(m, "SuccessCurve")
      .def_readonly("points", &SuccessCurve::points)
      .def_readonly("round_period", &SuccessCurve::round_period)
      .def("at", &SuccessCurve::at);
  m.def("success_curve", &success_curve, py::arg("horizon"), py::arg("lifecycle"), py::arg("tod"), py::arg("d"),
        py::arg("g"));

  py::class_<QueryEventTrace>(m, "QueryEventTrace")
      .def_readonly("query_times", &QueryEventTrace::query_times)
      .def_property_readonly("triggers",
                             [](const QueryEventTrace& t) {
                               std::vector<std::string> out;
                               for (auto k : t.triggers) out.emplace_back(to_string(k));
                               return out;
                             })
      .def("__len__", &QueryEventTrace::size);
  m.def(
      "query_event_process",
      [](const std::string& ttl, std::vector<double> updates, double horizon, std::uint64_t seed,
         bool redraw_every_query) {
        std::mt19937_64 rng(seed);
        return query_event_process(TtlDistribution::parse(ttl), updates, horizon, rng,
                                   redraw_every_query ? TtlRedraw::OnEveryQuery : TtlRedraw::OnExpiry);
      },
      py::arg("ttl"), py::arg("update_times"), py::arg("horizon"), py::arg("seed") = 1,
      py::arg("redraw_every_query") = false);

  py::class_<QueryIntervalStats>(m, "QueryIntervalStats")
      .def_readonly("mean_interval", &QueryIntervalStats::mean_interval)
      .def_readonly("interval_half_width", &QueryIntervalStats::interval_half_width)
      .def_readonly("ttl_triggered_ratio", &QueryIntervalStats::ttl_triggered_ratio)
      .def_readonly("ratio_half_width", &QueryIntervalStats::ratio_half_width)
      .def_readonly("queries", &QueryIntervalStats::queries)
      .def_readonly("ttl_triggered", &QueryIntervalStats::ttl_triggered)
      .def_readonly("update_triggered", &QueryIntervalStats::update_triggered);
  m.def(
      "mc_query_intervals",
      [](const std::string& ttl, double update_mean, std::uint64_t n_updates, std::uint64_t seed) {
        py::gil_scoped_release release;
        return mc_query_intervals(TtlDistribution::parse(ttl), update_mean, n_updates, seed);
      },
      py::arg("ttl"), py::arg("update_mean"), py::arg("n_updates") = 100000, py::arg("seed") = 1);

  py::class_<Metrics>(m, "Metrics")
      .def("as_dict", &metrics_dict)
      .def("to_csv", &Metrics::to_csv)
      .def("rounds_csv", &Metrics::rounds_csv)
      .def_readonly("dnssec_query_times", &Metrics::dnssec_query_times);

  m.def(
      "simulate",
      [](const std::string& path, const std::vector<std::string>& overrides) {
        const auto file = scenario_from(path, overrides);
        std::ostringstream log;
        Metrics metrics;
        {
          py::gil_scoped_release release;
          metrics = run(file.scenario, &log);
        }
        return py::make_tuple(metrics, log.str());
      },
      py::arg("scenario") = "", py::arg("overrides") = std::vector<std::string>{},
      "Runs a scenario file (or the defaults) and returns (Metrics, event_log).");

  py::class_<PySimulator>(m, "Simulator")
      .def(py::init<const std::string&, const std::vector<std::string>&>(), py::arg("scenario") = "",
           py::arg("overrides") = std::vector<std::string>{})
      .def("advance_to", &PySimulator::advance_to)
      .def("run", &PySimulator::run)
      .def_property_readonly("now", &PySimulator::now)
      .def("snapshot", &PySimulator::snapshot)
      .def("metrics", &PySimulator::metrics)
      .def("event_log", &PySimulator::event_log)
      .def("inject_client_query", &PySimulator::inject_client_query, py::arg("at"), py::arg("qname"))
      .def("inject_auth_update", &PySimulator::inject_auth_update, py::arg("at"));

  m.def("figure_names", &figure_names);
  m.def(
      "figure_csv",
      [](const std::string& name, const std::string& path, const std::vector<std::string>& overrides,
         std::size_t replications) {
        const auto file = scenario_from(path, overrides);
        FigureOptions options;
        options.replications = replications;
        py::gil_scoped_release release;
        return figure_csv(name, file, options);
      },
      py::arg("name"), py::arg("scenario") = "", py::arg("overrides") = std::vector<std::string>{},
      py::arg("replications") = 1);
}
