#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tdwn/dns_model.hpp"
#include "tdwn/sim_engine.hpp"

namespace tdwn {

/// Bad scenario text or value. line() is 1-based, or 0 when the value came
/// from a command-line override.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& origin, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// A parsed scenario: the simulator inputs plus the analytic and experiment
/// settings that only the figure drivers use.
struct ScenarioFile {
  Scenario scenario;
  double n_auth = 2.5;
  GuessForm guess_form = GuessForm::Additive;
  /// Validating-record lifecycle (the TTL used when `ttl` is absent).
  double lifecycle = 36000.0;
  bool record_events = true;
  std::uint64_t n_updates = 100000;
  double horizon = 10.0 * 365.0 * 86400.0;

  /// Guess space G for the closed forms.
  std::uint64_t guess_space() const;
  /// Identical outstanding queries D an attacker achieves per round.
  int outstanding() const;
};

/// Raw section.key -> value table with the line each value came from.
class ScenarioText {
 public:
  /// Parses INI-style text: [section] headers, key = value lines, '#' or ';'
  /// comments. Unknown sections or keys and duplicates are rejected.
  static ScenarioText parse(std::string_view text, std::string origin = "<scenario>",
                            std::filesystem::path base_dir = {});
  static ScenarioText load(const std::filesystem::path& path);

  /// Applies "section.key=value" (or "key=value" when the key name is unique).
  void apply_override(std::string_view assignment);

  /// Fills every absent key with its default and converts.
  ScenarioFile build() const;

  /// Every accepted "section.key", in order.
  static const std::vector<std::string>& known_keys();

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::string origin_ = "<scenario>";
  std::filesystem::path base_dir_;
  std::map<std::string, Entry> values_;
};

/// load + overrides + build in one step.
ScenarioFile load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
ScenarioFile default_scenario(const std::vector<std::string>& overrides = {});

}  // namespace tdwn
