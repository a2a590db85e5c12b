#include "tdwn/scenario_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tdwn/attacker.hpp"

namespace tdwn {

namespace {

struct KeyDef {
  std::string_view name;
  std::string_view fallback;
};

// Section-qualified keys with their defaults. An empty default means "derived".
constexpr KeyDef kKeys[] = {
    {"resolver.outstanding_cap", "20"},
    {"resolver.tod", "3"},
    {"resolver.lifecycle_s", "36000"},
    {"resolver.timeout_s", "3"},
    {"resolver.chain_depth", "1"},
    {"resolver.priority_cache", "true"},
    {"resolver.resolver_qps", "100"},
    {"resolver.workload_names", "100"},
    {"resolver.malformed_qps", "0"},
    {"resolver.arrivals", "deterministic"},
    {"attacker.enabled", "true"},
    {"attacker.target", "foo.com"},
    {"attacker.attacker_qps", "1000"},
    {"attacker.bogus_qps", "100"},
    {"attacker.guess", "uniform"},
    {"attacker.rounds", "0"},
    {"attacker.forged_value", "Y.Y.Y.Y"},
    {"attacker.start_s", "0"},
    {"attacker.forge_offset_s", "0"},
    {"attacker.forged_ttl_s", "86400"},
    {"attacker.arrivals", "poisson"},
    {"auth.id_space", "65536"},
    {"auth.port_space", "64000"},
    {"auth.port_min", "1024"},
    {"auth.n_auth", "2.5"},
    {"auth.servers", ""},
    {"auth.window_s", "0.02"},
    {"auth.auth_qps", "100"},
    {"auth.outstanding_cap", "100"},
    {"auth.update", "none"},
    {"auth.ttl", ""},
    {"auth.guess_form", "additive"},
    {"auth.genuine_value", "X.X.X.X"},
    {"auth.host_value", "W.W.W.W"},
    {"experiment.seed", "1"},
    {"experiment.duration_s", "86400"},
    {"experiment.record_events", "true"},
    {"experiment.n_updates", "100000"},
    {"experiment.horizon_s", "315360000"},
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_known(std::string_view key) {
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyDef& k) { return k.name == key; });
}

/// Converts one value; errors carry the origin and line of that value.
class Reader {
 public:
  Reader(std::string origin, const std::map<std::string, std::pair<std::string, int>>& values)
      : origin_(std::move(origin)), values_(values) {}

  const std::string& raw(const std::string& key) const { return values_.at(key).first; }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    const auto& [value, line] = values_.at(key);
    const std::string where = line > 0 ? origin_ : line == 0 ? "override" : "default";
    throw ConfigError(where, std::max(line, 0), key + " = '" + value + "': " + why);
  }

  double number(const std::string& key) const {
    const auto& text = raw(key);
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(v)) fail(key, "not a number");
    return v;
  }

  double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t lo) const {
    const auto& text = raw(key);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) fail(key, "not an integer");
    if (v < lo) fail(key, "must be >= " + std::to_string(lo));
    return v;
  }

  bool boolean(const std::string& key) const {
    const auto& v = raw(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(key, "expected true or false");
  }

  Arrivals arrivals(const std::string& key) const {
    const auto& v = raw(key);
    if (v == "deterministic") return Arrivals::Deterministic;
    if (v == "poisson") return Arrivals::Poisson;
    fail(key, "expected deterministic or poisson");
  }

 private:
  std::string origin_;
  const std::map<std::string, std::pair<std::string, int>>& values_;
};

std::vector<SimTime> parse_time_list(std::string_view text) {
  std::vector<SimTime> out;
  std::string buf(text);
  std::replace(buf.begin(), buf.end(), ',', ' ');
  std::istringstream in(buf);
  std::string token;
  while (in >> token) {
    if (token.front() == '#') {
      std::getline(in, token);
      continue;
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || p != token.data() + token.size() || !std::isfinite(v))
      throw std::invalid_argument("bad update time '" + token + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(const std::string& origin, int line, const std::string& message)
    : std::runtime_error(line > 0 ? origin + ":" + std::to_string(line) + ": " + message
                                  : origin + ": " + message),
      line_(line) {}

std::uint64_t ScenarioFile::guess_space() const {
  const auto& ids = scenario.resolver.identities;
  return guess_space_size(ids.id_space, ids.port_space, n_auth, guess_form);
}

int ScenarioFile::outstanding() const {
  const double qps = scenario.attacker ? scenario.attacker->client_query_rate : 1000.0;
  return effective_outstanding(scenario.resolver.max_identical_outstanding, scenario.auth.response_time, qps);
}

const std::vector<std::string>& ScenarioText::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& k : kKeys) out.emplace_back(k.name);
    return out;
  }();
  return keys;
}

ScenarioText ScenarioText::parse(std::string_view text, std::string origin, std::filesystem::path base_dir) {
  ScenarioText st;
  st.origin_ = std::move(origin);
  st.base_dir_ = std::move(base_dir);
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(st.origin_, line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "resolver" && section != "attacker" && section != "auth" && section != "experiment")
        throw ConfigError(st.origin_, line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(st.origin_, line_no, "expected key = value");
    if (section.empty()) throw ConfigError(st.origin_, line_no, "key outside of any section");
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!is_known(key)) throw ConfigError(st.origin_, line_no, "unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(st.origin_, line_no, "empty value for '" + key + "'");
    if (st.values_.count(key)) throw ConfigError(st.origin_, line_no, "duplicate key '" + key + "'");
    st.values_[key] = {value, line_no};
  }
  return st;
}

ScenarioText ScenarioText::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string(), path.parent_path());
}

void ScenarioText::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override", 0, "expected key=value, got '" + std::string(assignment) + "'");
  std::string key(trim(assignment.substr(0, eq)));
  const std::string value(trim(assignment.substr(eq + 1)));
  if (key.find('.') == std::string::npos) {
    std::vector<std::string> matches;
    for (const auto& k : known_keys())
      if (k.substr(k.find('.') + 1) == key) matches.push_back(k);
    if (matches.size() != 1)
      throw ConfigError("override", 0,
                        matches.empty() ? "unknown key '" + key + "'"
                                        : "ambiguous key '" + key + "'; qualify it with a section");
    key = matches.front();
  }
  if (!is_known(key)) throw ConfigError("override", 0, "unknown key '" + key + "'");
  if (value.empty()) throw ConfigError("override", 0, "empty value for '" + key + "'");
  values_[key] = {value, 0};
}

ScenarioFile ScenarioText::build() const {
  std::map<std::string, std::pair<std::string, int>> all;
  for (const auto& k : kKeys) all[std::string(k.name)] = {std::string(k.fallback), -1};
  for (const auto& [k, e] : values_) all[k] = {e.value, e.line};
  Reader r(origin_, all);

  ScenarioFile f;
  Scenario& s = f.scenario;

  f.n_auth = r.positive("auth.n_auth");
  if (all["auth.servers"].first.empty()) all["auth.servers"].first = std::to_string(std::lround(f.n_auth));
  f.lifecycle = r.positive("resolver.lifecycle_s");
  if (all["auth.ttl"].first.empty()) all["auth.ttl"].first = "constant:" + format_double(f.lifecycle);

  auto& ids = s.resolver.identities;
  ids.id_space = static_cast<std::uint64_t>(r.integer("auth.id_space", 1));
  ids.port_space = static_cast<std::uint64_t>(r.integer("auth.port_space", 1));
  const auto port_min = r.integer("auth.port_min", 0);
  if (port_min + static_cast<std::int64_t>(ids.port_space) > 65536)
    r.fail("auth.port_min", "port range exceeds 65535");
  ids.port_min = static_cast<std::uint32_t>(port_min);
  const auto servers = r.integer("auth.servers", 1);
  ids.servers.clear();
  for (std::int64_t i = 0; i < servers; ++i) ids.servers.push_back("ns-" + std::to_string(i));

  const auto& form = r.raw("auth.guess_form");
  if (form == "additive")
    f.guess_form = GuessForm::Additive;
  else if (form == "product")
    f.guess_form = GuessForm::Product;
  else
    r.fail("auth.guess_form", "expected additive or product");

  s.resolver.max_identical_outstanding = static_cast<int>(r.integer("resolver.outstanding_cap", 1));
  s.resolver.detector.tod = static_cast<int>(r.integer("resolver.tod", 1));
  s.resolver.transaction_timeout = r.positive("resolver.timeout_s");
  s.resolver.priority_cache_enabled = r.boolean("resolver.priority_cache");
  s.auth.chain_depth = static_cast<int>(r.integer("resolver.chain_depth", 0));
  s.workload.rate = r.number("resolver.resolver_qps");
  if (s.workload.rate < 0.0) r.fail("resolver.resolver_qps", "must be non-negative");
  s.workload.names = static_cast<int>(r.integer("resolver.workload_names", 1));
  s.workload.arrivals = r.arrivals("resolver.arrivals");
  s.malformed_rate = r.number("resolver.malformed_qps");
  if (s.malformed_rate < 0.0) r.fail("resolver.malformed_qps", "must be non-negative");

  std::string zone;
  try {
    zone = normalize_qname(r.raw("attacker.target"));
  } catch (const std::invalid_argument& e) {
    r.fail("attacker.target", e.what());
  }
  s.auth.zone = zone;
  s.auth.ns_value = r.raw("auth.genuine_value");
  s.auth.host_value = r.raw("auth.host_value");
  s.auth.response_time = r.positive("auth.window_s");
  s.auth.respond_rate = r.positive("auth.auth_qps");
  s.auth.outstanding_cap = static_cast<int>(r.integer("auth.outstanding_cap", 1));

  const std::string update = r.raw("auth.update");
  try {
    if (update == "none") {
      s.auth.updates = UpdateProcess::none();
    } else if (update.rfind("exp:", 0) == 0) {
      double mean = 0.0;
      const auto body = std::string_view(update).substr(4);
      auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), mean);
      if (ec != std::errc{} || p != body.data() + body.size()) throw std::invalid_argument("bad mean");
      s.auth.updates = UpdateProcess::exponential(mean);
    } else if (update.rfind("scripted:", 0) == 0) {
      const std::string target = update.substr(9);
      std::vector<SimTime> times;
      const bool inline_list = !target.empty() && target.find_first_not_of("0123456789.,eE+- ") == std::string::npos;
      if (inline_list) {
        times = parse_time_list(target);
      } else {
        std::filesystem::path p(target);
        if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
        std::ifstream in(p);
        if (!in) throw std::invalid_argument("cannot open " + p.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        times = parse_time_list(buf.str());
      }
      s.auth.updates = UpdateProcess::scripted(std::move(times));
    } else {
      throw std::invalid_argument("expected none, exp:mean or scripted:file");
    }
  } catch (const std::invalid_argument& e) {
    r.fail("auth.update", e.what());
  }

  try {
    s.ttl = TtlDistribution::parse(r.raw("auth.ttl"));
  } catch (const std::invalid_argument& e) {
    r.fail("auth.ttl", e.what());
  }

  if (r.boolean("attacker.enabled")) {
    AttackConfig a;
    a.target_domain = zone;
    a.client_query_rate = r.positive("attacker.attacker_qps");
    a.bogus_response_rate = r.positive("attacker.bogus_qps");
    const auto& guess = r.raw("attacker.guess");
    if (guess == "uniform")
      a.guess_strategy = GuessStrategy::UniformRandom;
    else if (guess == "sweep")
      a.guess_strategy = GuessStrategy::SequentialSweep;
    else
      r.fail("attacker.guess", "expected uniform or sweep");
    const auto rounds = r.integer("attacker.rounds", 0);
    if (rounds > 0) a.rounds = static_cast<int>(rounds);
    a.forged_value = r.raw("attacker.forged_value");
    a.start = r.number("attacker.start_s");
    if (a.start < 0.0) r.fail("attacker.start_s", "must be non-negative");
    a.forge_offset = r.number("attacker.forge_offset_s");
    if (a.forge_offset < 0.0) r.fail("attacker.forge_offset_s", "must be non-negative");
    a.forged_ttl = r.positive("attacker.forged_ttl_s");
    a.arrivals = r.arrivals("attacker.arrivals");
    s.attacker = a;
  } else {
    s.attacker.reset();
  }

  s.seed = static_cast<std::uint64_t>(r.integer("experiment.seed", 0));
  s.duration = r.positive("experiment.duration_s");
  f.record_events = r.boolean("experiment.record_events");
  f.n_updates = static_cast<std::uint64_t>(r.integer("experiment.n_updates", 1));
  f.horizon = r.positive("experiment.horizon_s");

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin_, 0, e.what());
  }
  return f;
}

ScenarioFile load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  auto text = ScenarioText::load(path);
  for (const auto& o : overrides) text.apply_override(o);
  return text.build();
}

ScenarioFile default_scenario(const std::vector<std::string>& overrides) {
  auto text = ScenarioText::parse("", "<defaults>");
  for (const auto& o : overrides) text.apply_override(o);
  return text.build();
}

}  // namespace tdwn
