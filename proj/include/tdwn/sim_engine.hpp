#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "tdwn/attacker.hpp"
#include "tdwn/dns_model.hpp"
#include "tdwn/random.hpp"
#include "tdwn/resolver.hpp"

namespace tdwn {

/// Thrown when a run breaks a simulator invariant (causality, conservation).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class UpdateKind { None, Exponential, Scripted };

struct UpdateProcess {
  UpdateKind kind = UpdateKind::None;
  double mean = 0.0;
  std::vector<SimTime> times;

  static UpdateProcess none() { return {}; }
  static UpdateProcess exponential(double mean_seconds);
  static UpdateProcess scripted(std::vector<SimTime> times);
  std::string str() const;
};

/// The zone's authoritative servers. Every name under the zone resolves to
/// host_value; the zone's name server host (the record attacks aim at)
/// resolves to the current nameserver value, which AuthUpdate events change.
struct AuthServerModel {
  std::string zone = "foo.com.";
  std::string host_value = "W.W.W.W";
  std::string ns_value = "X.X.X.X";
  /// One-way query-to-response delay, the attacker's window of opportunity.
  double response_time = 0.02;
  /// Responses per second; responses are served FIFO no faster than this.
  double respond_rate = 100.0;
  /// Queries waiting for a response beyond this are dropped silently.
  int outstanding_cap = 100;
  UpdateProcess updates;
  /// Extra DNSSEC round trips needed before a validating response validates.
  int chain_depth = 1;

  void validate() const;
};

/// Legitimate clients querying names under the zone.
struct WorkloadConfig {
  double rate = 100.0;
  int names = 100;
  Arrivals arrivals = Arrivals::Deterministic;
};

struct Scenario {
  ResolverConfig resolver;
  std::optional<AttackConfig> attacker = AttackConfig{};
  AuthServerModel auth;
  WorkloadConfig workload;
  /// Background rate of malformed (failure) responses from negligent peers.
  double malformed_rate = 0.0;
  std::uint64_t seed = 1;
  SimTime duration = 86400.0;
  TtlDistribution ttl = TtlDistribution::constant(36000.0);

  /// Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

enum class EventKind {
  ClientQuery,
  UpstreamResponse,
  ForgedResponse,
  ValidatingResponse,
  Timeout,
  AuthUpdate,
  TtlExpiry,
  RoundStart,
  MalformedResponse,
};

std::string_view to_string(EventKind kind);

enum class ClientSource { Workload, Attacker, Injected };

struct ClientQueryEvent {
  ClientId client = 0;
  QuestionKey question;
  ClientSource source = ClientSource::Workload;
};

struct UpstreamEvent {
  UpstreamQuery query;
};

struct ForgeryEvent {
  int round = 0;
};

struct TimeoutEvent {
  TransactionId tx = 0;
};

struct MarkerEvent {};

using EventPayload =
    std::variant<ClientQueryEvent, UpstreamEvent, ForgeryEvent, TimeoutEvent, MarkerEvent>;

struct Event {
  SimTime at = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::TtlExpiry;
  EventPayload payload;
};

/// Min-heap on (time, insertion sequence): simultaneous events run FIFO.
class EventQueue {
 public:
  void push(SimTime at, EventKind kind, EventPayload payload);
  Event pop();
  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

struct RoundOutcome {
  int round = 0;
  std::string qname;
  SimTime start = 0.0;
  SimTime end = 0.0;
  int outstanding = 0;
  int forgeries = 0;
  bool escalated = false;
  bool success = false;
};

struct Metrics {
  SimTime duration = 0.0;
  std::uint64_t events = 0;
  std::uint64_t client_queries = 0;
  std::uint64_t answered = 0;
  std::uint64_t servfail = 0;
  std::uint64_t upstream_queries = 0;
  std::uint64_t dropped_by_auth = 0;

  std::uint64_t dnssec_queries_issued = 0;
  std::vector<SimTime> dnssec_query_times;
  /// DNSSEC transactions started by ToD escalation (the protecting record had
  /// expired) versus by a proactive update (authoritative data changed).
  std::uint64_t ttl_triggered = 0;
  std::uint64_t update_triggered = 0;
  std::vector<SimTime> dnssec_trigger_times;

  std::uint64_t escalations = 0;
  std::uint64_t held_on = 0;
  std::uint64_t discarded = 0;
  std::uint64_t failures_counted = 0;
  std::uint64_t proactive_updates = 0;
  std::uint64_t auth_updates = 0;

  std::uint64_t poisoning_attempts = 0;
  std::uint64_t poisoning_successes = 0;
  std::uint64_t oblivious_poisonings = 0;
  std::uint64_t aware_path_poisonings = 0;
  std::uint64_t safety_violations = 0;
  std::optional<SimTime> first_success;

  std::vector<RoundOutcome> rounds;

  /// Mean gap between consecutive DNSSEC transactions; 0 with fewer than two.
  double dnssec_interval_mean() const;
  std::uint64_t round_successes() const;

  /// Ordered key/value export.
  std::vector<std::pair<std::string, std::string>> key_values() const;
  std::string to_csv() const;
  std::string rounds_csv() const;
};

struct Snapshot {
  SimTime at = 0.0;
  std::vector<CachedValidatedRecord> priority;
  std::vector<CachedNormalRecord> normal;
  std::vector<TransactionView> transactions;

  const CachedValidatedRecord* priority_entry(const RecordKey& key) const;
};

/// Deterministic discrete-event run of one resolver, its authoritative
/// servers, a legitimate workload and an optional attacker. Single-threaded;
/// the scenario seed fully determines the trace.
class Simulator {
 public:
  /// Validates the scenario before anything is scheduled. `event_log` may be
  /// null; otherwise one line per event record is written to it.
  explicit Simulator(Scenario scenario, std::ostream* event_log = nullptr);

  const Scenario& scenario() const { return scenario_; }
  SimTime now() const { return now_; }

  /// Processes every event with time <= t.
  void advance_to(SimTime t);
  /// Runs until no events remain, then checks conservation.
  void run();

  Snapshot snapshot() const;
  const Metrics& metrics() const { return metrics_; }
  const Resolver& resolver() const { return resolver_; }
  const std::string& current_ns_value() const { return ns_value_; }

  /// Scripted inputs for tests and replays.
  ClientId inject_client_query(SimTime at, const QuestionKey& question);
  void inject_auth_update(SimTime at);

 private:
  void process(const Event& ev);
  void drain();
  void write_log(SimTime at, std::string_view kind, const std::string& question,
                 std::string_view verdict, const std::string& detail);

  void on_client_query(const ClientQueryEvent& ev);
  void on_upstream_response(const UpstreamEvent& ev, bool validating);
  void on_forgery(const ForgeryEvent& ev);
  void on_round_start();
  void on_auth_update();
  void on_malformed();

  void send_to_auth(const UpstreamQuery& query);
  ResponseMsg authoritative_response(const UpstreamQuery& query);
  ResourceRecord zone_record(const RecordKey& key, bool is_signed);
  std::vector<RecordKey> support_keys() const;

  void schedule_workload(SimTime after);
  void schedule_update(SimTime after);
  void schedule_malformed(SimTime after);
  void finish_round(const ClientReply& reply);
  std::optional<SimTime> protecting_record_expiry() const;

  Scenario scenario_;
  std::ostream* event_log_;
  Resolver resolver_;
  std::unique_ptr<Attacker> attacker_;
  std::mt19937_64 update_rng_;
  std::mt19937_64 ttl_rng_;
  std::mt19937_64 workload_rng_;
  std::mt19937_64 malformed_rng_;

  EventQueue queue_;
  SimTime now_ = 0.0;
  Metrics metrics_;
  ClientId next_client_ = 1;
  std::unordered_set<ClientId> pending_clients_;
  std::unordered_set<ClientId> round_clients_;
  bool round_escalated_ = false;
  int round_outstanding_ = 0;
  std::deque<SimTime> auth_backlog_;
  SimTime auth_last_delivery_ = -std::numeric_limits<SimTime>::infinity();
  std::string ns_value_;
  int ns_version_ = 0;
  std::size_t scripted_next_ = 0;
};

/// Runs a scenario to completion.
Metrics run(const Scenario& scenario, std::ostream* event_log = nullptr);

}  // namespace tdwn
