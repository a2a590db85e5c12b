// Scenario runner and figure driver.
//
//   tdwn simulate <scenario.ini> --out DIR [--seed N] [--override k=v]...
//   tdwn figure <fig5..fig11> --out DIR [--scenario FILE] [--replications N]
//   tdwn validate-config <scenario.ini> [--override k=v]...
//
// Exit codes: 0 ok, 1 I/O or usage error, 2 config error or unknown figure,
// 3 invariant or safety violation during a run.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdwn/figures.hpp"
#include "tdwn/scenario_file.hpp"
#include "tdwn/sim_engine.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kIoError = 1;
constexpr int kConfigError = 2;
constexpr int kInvariantError = 3;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

tdwn::ScenarioFile load(const std::string& path, std::vector<std::string> overrides,
                        std::optional<std::uint64_t> seed) {
  if (seed) overrides.push_back("experiment.seed=" + std::to_string(*seed));
  return path.empty() ? tdwn::default_scenario(overrides) : tdwn::load_scenario(path, overrides);
}

std::string dnssec_csv(const tdwn::Metrics& m) {
  std::string out = "index,time_s\n";
  for (std::size_t i = 0; i < m.dnssec_query_times.size(); ++i)
    out += std::to_string(i) + "," + tdwn::format_double(m.dnssec_query_times[i]) + "\n";
  return out;
}

int simulate(const std::string& path, const std::string& out_dir, const std::vector<std::string>& overrides,
             std::optional<std::uint64_t> seed) {
  const auto file = load(path, overrides, seed);
  fs::create_directories(out_dir);
  std::ostringstream log;
  tdwn::Metrics metrics;
  try {
    tdwn::Simulator sim(file.scenario, file.record_events ? &log : nullptr);
    sim.run();
    metrics = sim.metrics();
  } catch (const tdwn::InvariantViolation& e) {
    write_file(fs::path(out_dir) / "events.log", log.str());
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariantError;
  }
  write_file(fs::path(out_dir) / "events.log", log.str());
  write_file(fs::path(out_dir) / "metrics.csv", metrics.to_csv());
  write_file(fs::path(out_dir) / "rounds.csv", metrics.rounds_csv());
  write_file(fs::path(out_dir) / "dnssec_queries.csv", dnssec_csv(metrics));
  if (metrics.safety_violations > 0) {
    std::cerr << "safety violation: " << metrics.safety_violations
              << " forged records accepted past the defense\n";
    return kInvariantError;
  }
  std::cout << "client_queries=" << metrics.client_queries << " dnssec_queries=" << metrics.dnssec_queries_issued
            << " poisoning_successes=" << metrics.poisoning_successes
            << " aware_path_poisonings=" << metrics.aware_path_poisonings << "\n";
  return 0;
}

int figure(const std::string& name, const std::string& scenario, const std::string& out_dir,
           const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed, std::size_t reps) {
  if (!tdwn::is_figure_name(name)) {
    std::cerr << "unknown figure '" << name << "'; expected one of fig5..fig11\n";
    return kConfigError;
  }
  const auto file = load(scenario, overrides, seed);
  fs::create_directories(out_dir);
  tdwn::FigureOptions options;
  options.replications = reps;
  write_file(fs::path(out_dir) / (name + ".csv"), tdwn::figure_csv(name, file, options));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TDWN defense simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = ".", figure_name;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::size_t replications = 1;

  auto* sim = app.add_subcommand("simulate", "run one scenario; writes metrics.csv and events.log");
  sim->add_option("scenario", scenario_path, "scenario file (omit for defaults)");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "master seed (overrides experiment.seed)");
  sim->add_option("--override", overrides, "section.key=value, repeatable");
  sim->add_option("--replications", replications, "ignored for simulate");

  auto* fig = app.add_subcommand("figure", "reproduce one figure as CSV");
  fig->add_option("name", figure_name, "fig5 .. fig11")->required();
  fig->add_option("--scenario", scenario_path, "scenario file (omit for defaults)");
  fig->add_option("--out", out_dir, "output directory");
  fig->add_option("--seed", seed, "master seed");
  fig->add_option("--replications", replications, "Monte Carlo replications per point")
      ->check(CLI::PositiveNumber);
  fig->add_option("--override", overrides, "section.key=value, repeatable");

  auto* val = app.add_subcommand("validate-config", "parse a scenario and print the resolved values");
  val->add_option("scenario", scenario_path, "scenario file")->required();
  val->add_option("--override", overrides, "section.key=value, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sim) return simulate(scenario_path, out_dir, overrides, seed);
    if (*fig) return figure(figure_name, scenario_path, out_dir, overrides, seed, replications);
    if (*val) {
      const auto f = load(scenario_path, overrides, std::nullopt);
      const auto& s = f.scenario;
      std::cout << "tod=" << s.resolver.detector.tod << "\noutstanding_cap=" << s.resolver.max_identical_outstanding
                << "\nlifecycle_s=" << tdwn::format_double(f.lifecycle) << "\nttl=" << s.ttl.str()
                << "\nupdate=" << s.auth.updates.str() << "\nidentity_space=" << s.resolver.identities.size()
                << "\nguess_space=" << f.guess_space() << "\nd=" << f.outstanding()
                << "\nattacker=" << (s.attacker ? "enabled" : "disabled") << "\nseed=" << s.seed << "\n";
      return 0;
    }
  } catch (const tdwn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const tdwn::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariantError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kIoError;
}
