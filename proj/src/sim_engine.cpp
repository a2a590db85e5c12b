#include "tdwn/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace tdwn {

namespace {

constexpr std::string_view kMalformedSource = "malformed-src";
constexpr double kInfinity = std::numeric_limits<double>::infinity();

std::string fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string parent_of(const std::string& name) {
  const auto dot = name.find('.');
  return dot + 1 >= name.size() ? "." : name.substr(dot + 1);
}

bool within_zone(const std::string& name, const std::string& zone) {
  return name.size() >= zone.size() && name.compare(name.size() - zone.size(), zone.size(), zone) == 0 &&
         (name.size() == zone.size() || name[name.size() - zone.size() - 1] == '.');
}

}  // namespace

UpdateProcess UpdateProcess::exponential(double mean_seconds) {
  if (!(mean_seconds > 0.0)) throw std::invalid_argument("update mean must be positive");
  return {UpdateKind::Exponential, mean_seconds, {}};
}

UpdateProcess UpdateProcess::scripted(std::vector<SimTime> times) {
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::invalid_argument("scripted update times must be sorted");
  if (!times.empty() && times.front() < 0.0)
    throw std::invalid_argument("scripted update times must be non-negative");
  return {UpdateKind::Scripted, 0.0, std::move(times)};
}

std::string UpdateProcess::str() const {
  switch (kind) {
    case UpdateKind::None: return "none";
    case UpdateKind::Exponential: return "exp:" + format_double(mean);
    case UpdateKind::Scripted: return "scripted(" + std::to_string(times.size()) + ")";
  }
  return "none";
}

void AuthServerModel::validate() const {
  normalize_qname(zone);
  if (host_value.empty() || ns_value.empty()) throw std::invalid_argument("zone values must be non-empty");
  if (!(response_time > 0.0)) throw std::invalid_argument("window_s must be positive");
  if (!(respond_rate > 0.0)) throw std::invalid_argument("auth_qps must be positive");
  if (outstanding_cap < 1) throw std::invalid_argument("auth outstanding_cap must be >= 1");
  if (chain_depth < 0) throw std::invalid_argument("chain_depth must be >= 0");
  if (updates.kind == UpdateKind::Exponential && !(updates.mean > 0.0))
    throw std::invalid_argument("update mean must be positive");
}

void Scenario::validate() const {
  resolver.validate();
  auth.validate();
  if (attacker) {
    attacker->validate();
    if (normalize_qname(attacker->target_domain) != normalize_qname(auth.zone))
      throw std::invalid_argument("attacker target must be the auth zone");
  }
  if (workload.rate < 0.0) throw std::invalid_argument("resolver_qps must be non-negative");
  if (workload.names < 1) throw std::invalid_argument("workload_names must be >= 1");
  if (malformed_rate < 0.0) throw std::invalid_argument("malformed_qps must be non-negative");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw std::invalid_argument("duration must be positive");
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::ClientQuery: return "ClientQuery";
    case EventKind::UpstreamResponse: return "UpstreamResponse";
    case EventKind::ForgedResponse: return "ForgedResponse";
    case EventKind::ValidatingResponse: return "ValidatingResponse";
    case EventKind::Timeout: return "Timeout";
    case EventKind::AuthUpdate: return "AuthUpdate";
    case EventKind::TtlExpiry: return "TtlExpiry";
    case EventKind::RoundStart: return "RoundStart";
    case EventKind::MalformedResponse: return "MalformedResponse";
  }
  return "?";
}

void EventQueue::push(SimTime at, EventKind kind, EventPayload payload) {
  heap_.push(Event{at, next_seq_++, kind, std::move(payload)});
}

Event EventQueue::pop() {
  Event ev = heap_.top();
  heap_.pop();
  return ev;
}

double Metrics::dnssec_interval_mean() const {
  if (dnssec_trigger_times.size() < 2) return 0.0;
  return (dnssec_trigger_times.back() - dnssec_trigger_times.front()) /
         static_cast<double>(dnssec_trigger_times.size() - 1);
}

std::uint64_t Metrics::round_successes() const {
  return static_cast<std::uint64_t>(
      std::count_if(rounds.begin(), rounds.end(), [](const RoundOutcome& r) { return r.success; }));
}

std::vector<std::pair<std::string, std::string>> Metrics::key_values() const {
  auto n = [](std::uint64_t v) { return std::to_string(v); };
  return {
      {"duration_s", format_double(duration)},
      {"events", n(events)},
      {"client_queries", n(client_queries)},
      {"answered", n(answered)},
      {"servfail", n(servfail)},
      {"upstream_queries", n(upstream_queries)},
      {"dropped_by_auth", n(dropped_by_auth)},
      {"dnssec_queries_issued", n(dnssec_queries_issued)},
      {"dnssec_transactions", n(dnssec_trigger_times.size())},
      {"ttl_triggered", n(ttl_triggered)},
      {"update_triggered", n(update_triggered)},
      {"dnssec_interval_mean_s", format_double(dnssec_interval_mean())},
      {"escalations", n(escalations)},
      {"failures_counted", n(failures_counted)},
      {"held_on", n(held_on)},
      {"discarded", n(discarded)},
      {"proactive_updates", n(proactive_updates)},
      {"auth_updates", n(auth_updates)},
      {"poisoning_attempts", n(poisoning_attempts)},
      {"poisoning_successes", n(poisoning_successes)},
      {"oblivious_poisonings", n(oblivious_poisonings)},
      {"aware_path_poisonings", n(aware_path_poisonings)},
      {"safety_violations", n(safety_violations)},
      {"first_success_s", first_success ? format_double(*first_success) : "none"},
      {"rounds", n(rounds.size())},
      {"round_successes", n(round_successes())},
  };
}

std::string Metrics::to_csv() const {
  std::string out = "key,value\n";
  for (const auto& [k, v] : key_values()) out += k + "," + v + "\n";
  return out;
}

std::string Metrics::rounds_csv() const {
  std::string out = "round,qname,start_s,end_s,outstanding,forgeries,escalated,success\n";
  for (const auto& r : rounds) {
    out += std::to_string(r.round) + "," + r.qname + "," + format_double(r.start) + "," +
           format_double(r.end) + "," + std::to_string(r.outstanding) + "," +
           std::to_string(r.forgeries) + "," + (r.escalated ? "1" : "0") + "," +
           (r.success ? "1" : "0") + "\n";
  }
  return out;
}

const CachedValidatedRecord* Snapshot::priority_entry(const RecordKey& key) const {
  for (const auto& e : priority)
    if (e.key == key) return &e;
  return nullptr;
}

Simulator::Simulator(Scenario scenario, std::ostream* event_log)
    : scenario_((scenario.validate(), std::move(scenario))),
      event_log_(event_log),
      resolver_(scenario_.resolver, derive_seed(scenario_.seed, stream::kResolver)),
      update_rng_(derive_seed(scenario_.seed, stream::kUpdates)),
      ttl_rng_(derive_seed(scenario_.seed, stream::kAuthTtl)),
      workload_rng_(derive_seed(scenario_.seed, stream::kWorkload)),
      malformed_rng_(derive_seed(scenario_.seed, stream::kMalformed)) {
  scenario_.auth.zone = normalize_qname(scenario_.auth.zone);
  ns_value_ = scenario_.auth.ns_value;
  metrics_.duration = scenario_.duration;

  if (scenario_.attacker) {
    attacker_ = std::make_unique<Attacker>(*scenario_.attacker, scenario_.resolver.identities,
                                           derive_seed(scenario_.seed, stream::kAttacker));
    if (scenario_.attacker->start < scenario_.duration)
      queue_.push(scenario_.attacker->start, EventKind::RoundStart, MarkerEvent{});
  }
  if (scenario_.workload.rate > 0.0) {
    const double first = scenario_.workload.arrivals == Arrivals::Deterministic
                             ? 0.0
                             : std::exponential_distribution<double>(scenario_.workload.rate)(workload_rng_);
    if (first < scenario_.duration) schedule_workload(first);
  }
  if (scenario_.auth.updates.kind == UpdateKind::Exponential) {
    schedule_update(0.0);
  } else if (scenario_.auth.updates.kind == UpdateKind::Scripted) {
    for (SimTime t : scenario_.auth.updates.times)
      if (t < scenario_.duration) queue_.push(t, EventKind::AuthUpdate, MarkerEvent{});
  }
  if (scenario_.malformed_rate > 0.0) schedule_malformed(0.0);
}

void Simulator::schedule_workload(SimTime at) {
  const auto& zone = scenario_.auth.zone;
  std::uniform_int_distribution<int> pick(0, scenario_.workload.names - 1);
  ClientQueryEvent ev{next_client_++,
                      QuestionKey{"h" + std::to_string(pick(workload_rng_)) + "." + zone, RrType::A,
                                  RrClass::IN},
                      ClientSource::Workload};
  queue_.push(at, EventKind::ClientQuery, std::move(ev));
}

void Simulator::schedule_update(SimTime after) {
  const SimTime at = after + std::exponential_distribution<double>(1.0 / scenario_.auth.updates.mean)(update_rng_);
  if (at < scenario_.duration) queue_.push(at, EventKind::AuthUpdate, MarkerEvent{});
}

void Simulator::schedule_malformed(SimTime after) {
  const SimTime at = after + std::exponential_distribution<double>(scenario_.malformed_rate)(malformed_rng_);
  if (at < scenario_.duration) queue_.push(at, EventKind::MalformedResponse, MarkerEvent{});
}

ClientId Simulator::inject_client_query(SimTime at, const QuestionKey& question) {
  if (at < now_) throw std::invalid_argument("cannot inject an event in the past");
  const ClientId id = next_client_++;
  queue_.push(at, EventKind::ClientQuery, ClientQueryEvent{id, question, ClientSource::Injected});
  return id;
}

void Simulator::inject_auth_update(SimTime at) {
  if (at < now_) throw std::invalid_argument("cannot inject an event in the past");
  queue_.push(at, EventKind::AuthUpdate, MarkerEvent{});
}

void Simulator::advance_to(SimTime t) {
  while (!queue_.empty() && queue_.top().at <= t) {
    const Event ev = queue_.pop();
    if (ev.at < now_) throw InvariantViolation("event queue went backwards in time");
    now_ = ev.at;
    ++metrics_.events;
    process(ev);
    drain();
  }
  if (std::isfinite(t)) now_ = std::max(now_, t);
}

void Simulator::run() {
  advance_to(kInfinity);
  if (!pending_clients_.empty())
    throw InvariantViolation(std::to_string(pending_clients_.size()) +
                             " client queries never answered");
  if (metrics_.answered + metrics_.servfail != metrics_.client_queries)
    throw InvariantViolation("client query conservation broken");
}

Snapshot Simulator::snapshot() const {
  Snapshot snap;
  snap.at = now_;
  for (auto& e : resolver_.cache().priority_entries())
    if (e.expires_at > now_) snap.priority.push_back(std::move(e));
  for (auto& e : resolver_.cache().normal_entries())
    if (e.expires_at > now_) snap.normal.push_back(std::move(e));
  snap.transactions = resolver_.transactions();
  return snap;
}

void Simulator::process(const Event& ev) {
  switch (ev.kind) {
    case EventKind::ClientQuery:
      on_client_query(std::get<ClientQueryEvent>(ev.payload));
      break;
    case EventKind::UpstreamResponse:
      on_upstream_response(std::get<UpstreamEvent>(ev.payload), false);
      break;
    case EventKind::ValidatingResponse:
      on_upstream_response(std::get<UpstreamEvent>(ev.payload), true);
      break;
    case EventKind::ForgedResponse:
      on_forgery(std::get<ForgeryEvent>(ev.payload));
      break;
    case EventKind::Timeout:
      resolver_.on_timeout(std::get<TimeoutEvent>(ev.payload).tx, now_);
      break;
    case EventKind::AuthUpdate:
      on_auth_update();
      break;
    case EventKind::TtlExpiry:
      if (const auto n = resolver_.expire(now_); n > 0)
        write_log(now_, "expire", "-", "evicted", std::to_string(n));
      break;
    case EventKind::RoundStart:
      on_round_start();
      break;
    case EventKind::MalformedResponse:
      on_malformed();
      break;
  }
}

void Simulator::on_client_query(const ClientQueryEvent& ev) {
  ++metrics_.client_queries;
  pending_clients_.insert(ev.client);
  if (ev.source == ClientSource::Workload) {
    const double gap = scenario_.workload.arrivals == Arrivals::Deterministic
                           ? 1.0 / scenario_.workload.rate
                           : std::exponential_distribution<double>(scenario_.workload.rate)(workload_rng_);
    if (now_ + gap < scenario_.duration) schedule_workload(now_ + gap);
  }
  resolver_.on_client_query(ev.question, now_, ev.client);
}

void Simulator::on_upstream_response(const UpstreamEvent& ev, bool validating) {
  if (now_ + 1e-9 < ev.query.query.sent_at + scenario_.auth.response_time)
    throw InvariantViolation("response delivered before the response time elapsed");
  const ResponseMsg msg = authoritative_response(ev.query);
  if (validating)
    resolver_.on_validating_response(msg, now_);
  else
    resolver_.on_response(msg, now_);
}

void Simulator::on_forgery(const ForgeryEvent& ev) {
  if (!attacker_ || !attacker_->state().active || attacker_->state().current_round != ev.round) return;
  ++metrics_.poisoning_attempts;
  const ResponseMsg forged = attacker_->forge();
  resolver_.on_response(forged, now_);
  const double next = now_ + attacker_->next_gap(scenario_.attacker->bogus_response_rate);
  queue_.push(next, EventKind::ForgedResponse, ForgeryEvent{ev.round});
}

std::optional<SimTime> Simulator::protecting_record_expiry() const {
  const RecordKey key{nameserver_owner(scenario_.auth.zone), RrType::A};
  if (const auto* e = resolver_.cache().priority_entry(key, now_)) return e->expires_at;
  return std::nullopt;
}

void Simulator::on_round_start() {
  if (!attacker_ || attacker_->state().active || attacker_->rounds_exhausted()) return;
  const SimTime start = schedule_next_round(now_, protecting_record_expiry());
  if (start > now_) {
    // A validated record still protects the target; wait for it to lapse.
    write_log(now_, "round", "-", "deferred", fixed6(start));
    if (start < scenario_.duration) queue_.push(start, EventKind::RoundStart, MarkerEvent{});
    return;
  }
  const auto& cfg = *scenario_.attacker;
  attacker_->begin_round(now_);
  const QuestionKey q = attacker_->current_question();
  // A round needs at least one query to poison even when rate x window < 1.
  const int d = std::max(1, effective_outstanding(scenario_.resolver.max_identical_outstanding,
                                                  scenario_.auth.response_time, cfg.client_query_rate));
  round_clients_.clear();
  round_escalated_ = false;
  round_outstanding_ = d;
  SimTime t = now_;
  for (int k = 0; k < d; ++k) {
    if (k > 0) t += attacker_->next_gap(cfg.client_query_rate);
    const ClientId id = next_client_++;
    round_clients_.insert(id);
    queue_.push(t, EventKind::ClientQuery, ClientQueryEvent{id, q, ClientSource::Attacker});
  }
  SimTime first = now_ + cfg.forge_offset;
  if (cfg.arrivals == Arrivals::Poisson) first += attacker_->next_gap(cfg.bogus_response_rate);
  queue_.push(first, EventKind::ForgedResponse, ForgeryEvent{attacker_->state().current_round});
  write_log(now_, "round", q.str(), "start", std::to_string(attacker_->state().current_round));
}

void Simulator::finish_round(const ClientReply& reply) {
  const auto& st = attacker_->state();
  RoundOutcome out;
  out.round = st.current_round;
  out.qname = st.current_qname;
  out.start = st.round_started;
  out.end = now_;
  out.outstanding = round_outstanding_;
  out.forgeries = st.attempts_this_round;
  out.escalated = round_escalated_;
  out.success = std::any_of(reply.records.begin(), reply.records.end(), [](const ResourceRecord& r) {
    return !GroundTruth::is_authentic(r);
  });
  metrics_.rounds.push_back(out);
  attacker_->end_round(out.success);
  round_clients_.clear();
  write_log(now_, "round", reply.question.str(), out.success ? "success" : "fail",
            std::to_string(out.forgeries));
  if (!attacker_->rounds_exhausted()) {
    const SimTime next = schedule_next_round(now_, protecting_record_expiry());
    if (next < scenario_.duration) queue_.push(next, EventKind::RoundStart, MarkerEvent{});
  }
}

void Simulator::on_auth_update() {
  ++ns_version_;
  ns_value_ = scenario_.auth.ns_value + "/u" + std::to_string(ns_version_);
  ++metrics_.auth_updates;
  write_log(now_, "update", RecordKey{nameserver_owner(scenario_.auth.zone), RrType::A}.str(), "changed",
            ns_value_);
  if (scenario_.auth.updates.kind == UpdateKind::Exponential) schedule_update(now_);
}

void Simulator::on_malformed() {
  schedule_malformed(now_);
  const auto txs = resolver_.transactions();
  std::vector<const TransactionView*> open;
  for (const auto& t : txs)
    if (!t.outstanding_queries.empty()) open.push_back(&t);
  if (open.empty()) return;
  std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
  const TransactionView& tx = *open[pick(malformed_rng_)];
  ResponseMsg msg;
  msg.question = tx.question;
  msg.identity = tx.outstanding_queries.front().identity;
  msg.identity.server_addr = std::string(kMalformedSource);
  resolver_.on_response(msg, now_);
}

std::vector<RecordKey> Simulator::support_keys() const {
  std::vector<RecordKey> keys;
  const auto& zone = scenario_.auth.zone;
  std::string owner = zone;
  for (int j = 1; j <= scenario_.auth.chain_depth; ++j) {
    if (j == 1) {
      keys.push_back({nameserver_owner(zone), RrType::A});
      continue;
    }
    if (owner == ".") break;
    keys.push_back({owner, RrType::DNSKEY});
    owner = parent_of(owner);
  }
  return keys;
}

ResourceRecord Simulator::zone_record(const RecordKey& key, bool is_signed) {
  const double ttl = scenario_.ttl.draw(ttl_rng_);
  std::string value;
  if (key.rtype == RrType::DNSKEY)
    value = "key:" + key.owner;
  else if (key.owner == nameserver_owner(scenario_.auth.zone))
    value = ns_value_;
  else
    value = scenario_.auth.host_value;
  return ResourceRecord(key.owner, key.rtype, value, ttl, is_signed, true);
}

ResponseMsg Simulator::authoritative_response(const UpstreamQuery& query) {
  ResponseMsg msg;
  msg.question = query.query.question;
  msg.identity = query.query.identity;
  msg.is_validating = query.dnssec;
  const RecordKey asked{msg.question.qname, msg.question.qtype};
  if (!within_zone(asked.owner, scenario_.auth.zone) && asked.rtype != RrType::DNSKEY) return msg;

  const auto support = support_keys();
  const bool is_support = std::find(support.begin(), support.end(), asked) != support.end();
  if (!query.dnssec) {
    msg.records.push_back(zone_record(asked, false));
    const RecordKey glue{nameserver_owner(scenario_.auth.zone), RrType::A};
    if (glue != asked) msg.records.push_back(zone_record(glue, false));
    return msg;
  }
  if (query.purpose == DnssecPurpose::Chain || is_support) {
    // A chain fetch returns the requested record with its signature.
    msg.records.push_back(zone_record(asked, true));
    return msg;
  }
  msg.records.push_back(zone_record(asked, true));
  const RecordKey glue{nameserver_owner(scenario_.auth.zone), RrType::A};
  if (glue != asked) {
    const bool glue_supported = std::find(support.begin(), support.end(), glue) != support.end();
    msg.records.push_back(zone_record(glue, !glue_supported));
  }
  for (const auto& key : support)
    if (key.rtype == RrType::DNSKEY) msg.records.push_back(zone_record(key, false));
  return msg;
}

void Simulator::send_to_auth(const UpstreamQuery& query) {
  while (!auth_backlog_.empty() && auth_backlog_.front() <= now_) auth_backlog_.pop_front();
  if (auth_backlog_.size() >= static_cast<std::size_t>(scenario_.auth.outstanding_cap)) {
    ++metrics_.dropped_by_auth;
    write_log(now_, "drop", query.query.question.str(), "auth-cap", query.query.identity.server_addr);
    return;
  }
  const SimTime deliver = std::max(now_ + scenario_.auth.response_time,
                                   auth_last_delivery_ + 1.0 / scenario_.auth.respond_rate);
  auth_last_delivery_ = deliver;
  auth_backlog_.push_back(deliver);
  queue_.push(deliver, query.dnssec ? EventKind::ValidatingResponse : EventKind::UpstreamResponse,
              UpstreamEvent{query});
}

void Simulator::drain() {
  Effects fx = resolver_.take_effects();
  if (fx.empty()) return;

  for (const auto& rec : fx.log) {
    write_log(rec.at, rec.kind, rec.question.str(), rec.verdict, rec.detail);
    if (rec.kind == "mode") {
      ++metrics_.escalations;
      if (attacker_ && attacker_->state().active && rec.question == attacker_->current_question())
        round_escalated_ = true;
    } else if (rec.kind == "holdon") {
      ++metrics_.held_on;
    } else if (rec.kind == "discard") {
      ++metrics_.discarded;
    } else if (rec.kind == "failure") {
      ++metrics_.failures_counted;
    }
  }

  for (const auto& a : fx.acceptances) {
    const bool poisoned = std::any_of(a.records.begin(), a.records.end(), [](const ResourceRecord& r) {
      return !GroundTruth::is_authentic(r);
    });
    if (!poisoned) continue;
    ++metrics_.poisoning_successes;
    if (!metrics_.first_success) metrics_.first_success = now_;
    const int tod = scenario_.resolver.detector.tod;
    if (a.mode == Mode::Aware || a.priority_blocked) {
      ++metrics_.aware_path_poisonings;
      ++metrics_.safety_violations;
      write_log(now_, "audit", a.question.str(), "violation", "aware-path");
    } else if (a.failure_count >= tod) {
      ++metrics_.oblivious_poisonings;
      ++metrics_.safety_violations;
      write_log(now_, "audit", a.question.str(), "violation", "past-threshold");
    } else {
      ++metrics_.oblivious_poisonings;
      write_log(now_, "audit", a.question.str(), "poisoned", std::to_string(a.failure_count));
    }
  }

  for (const auto& q : fx.queries) {
    ++metrics_.upstream_queries;
    if (q.dnssec) {
      ++metrics_.dnssec_queries_issued;
      metrics_.dnssec_query_times.push_back(now_);
      if (q.purpose == DnssecPurpose::Escalation) {
        ++metrics_.ttl_triggered;
        metrics_.dnssec_trigger_times.push_back(now_);
      } else if (q.purpose == DnssecPurpose::Proactive) {
        ++metrics_.update_triggered;
        ++metrics_.proactive_updates;
        metrics_.dnssec_trigger_times.push_back(now_);
      }
    }
    send_to_auth(q);
  }

  for (const auto& t : fx.timers) queue_.push(t.at, EventKind::Timeout, TimeoutEvent{t.tx});
  for (SimTime at : fx.priority_expiries) queue_.push(at, EventKind::TtlExpiry, MarkerEvent{});

  for (const auto& r : fx.replies) {
    if (pending_clients_.erase(r.client) == 0)
      throw InvariantViolation("client " + std::to_string(r.client) + " answered twice");
    if (r.outcome == ClientOutcome::Answered)
      ++metrics_.answered;
    else
      ++metrics_.servfail;
    if (attacker_ && attacker_->state().active && round_clients_.count(r.client) > 0) finish_round(r);
  }
}

void Simulator::write_log(SimTime at, std::string_view kind, const std::string& question,
                          std::string_view verdict, const std::string& detail) {
  if (!event_log_) return;
  *event_log_ << fixed6(at) << '\t' << kind << '\t' << question << '\t' << verdict << '\t'
              << (detail.empty() ? "-" : detail) << '\n';
}

Metrics run(const Scenario& scenario, std::ostream* event_log) {
  Simulator sim(scenario, event_log);
  sim.run();
  return sim.metrics();
}

}  // namespace tdwn
