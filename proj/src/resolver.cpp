#include "tdwn/resolver.hpp"

#include <algorithm>
#include <stdexcept>

namespace tdwn {

namespace {

std::string join_values(const std::vector<ResourceRecord>& records) {
  std::string out;
  for (const auto& [key, values] : value_sets(records)) {
    if (!out.empty()) out += ' ';
    out += key.str() + "=";
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + values[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::Oblivious ? "oblivious" : "aware"; }

std::string_view to_string(DnssecPurpose purpose) {
  switch (purpose) {
    case DnssecPurpose::Escalation:
      return "escalation";
    case DnssecPurpose::Chain:
      return "chain";
    case DnssecPurpose::Proactive:
      return "proactive";
    case DnssecPurpose::Reissue:
      return "reissue";
  }
  return "?";
}

void ResolverConfig::validate() const {
  if (max_identical_outstanding < 1)
    throw std::invalid_argument("max_identical_outstanding must be at least 1");
  if (!(transaction_timeout > 0.0)) throw std::invalid_argument("transaction_timeout must be positive");
  detector.validate();
  identities.validate();
  // One extra slot for the DNSSEC-aware query that shares the identity pool.
  if (identities.size() <= static_cast<std::uint64_t>(max_identical_outstanding))
    throw std::invalid_argument("identity space too small for the outstanding-query cap");
}

Resolver::Resolver(ResolverConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed), detector_(config_.detector) {
  config_.validate();
}

Resolver::Transaction* Resolver::find(const QuestionKey& question) {
  auto it = transactions_.find(question);
  return it == transactions_.end() ? nullptr : &it->second;
}

Resolver::Transaction* Resolver::find(TransactionId id) {
  for (auto& [q, tx] : transactions_)
    if (tx.id == id) return &tx;
  return nullptr;
}

std::size_t Resolver::expire(SimTime now) { return cache_.expire(now); }

Effects Resolver::take_effects() { return std::exchange(effects_, Effects{}); }

void Resolver::log(SimTime now, std::string kind, const QuestionKey& q, std::string verdict,
                   std::string detail) {
  effects_.log.push_back({now, std::move(kind), q, std::move(verdict), std::move(detail)});
}

QueryIdentity Resolver::fresh_identity(const Transaction& tx) {
  std::uniform_int_distribution<std::uint64_t> pick(0, config_.identities.size() - 1);
  for (;;) {
    QueryIdentity id = config_.identities.at(pick(rng_));
    const bool taken =
        std::any_of(tx.outstanding.begin(), tx.outstanding.end(),
                    [&](const OutstandingQuery& q) { return q.identity == id; }) ||
        (tx.dnssec_inflight && tx.dnssec_inflight->query.identity == id);
    if (!taken) return id;
  }
}

void Resolver::send_upstream(Transaction& tx, SimTime now) {
  OutstandingQuery q{tx.question, fresh_identity(tx), now};
  tx.outstanding.push_back(q);
  effects_.queries.push_back({tx.id, std::move(q), false, DnssecPurpose::Escalation});
}

void Resolver::send_dnssec(Transaction& tx, const QuestionKey& question, DnssecPurpose purpose,
                           SimTime now) {
  OutstandingQuery q{question, fresh_identity(tx), now};
  tx.dnssec_inflight = PendingDnssec{q, purpose};
  tx.validating_request_sent = true;
  effects_.queries.push_back({tx.id, std::move(q), true, purpose});
  log(now, "dnssec", tx.question, std::string(to_string(purpose)), question.str());
}

void Resolver::escalate(Transaction& tx, SimTime now, const std::string& reason) {
  if (tx.mode == Mode::Aware) return;
  tx.mode = Mode::Aware;
  log(now, "mode", tx.question, "aware", reason);
  if (!tx.validating_request_sent) send_dnssec(tx, tx.question, DnssecPurpose::Escalation, now);
}

ClientAction Resolver::on_client_query(const QuestionKey& question, SimTime now, ClientId client) {
  cache_.expire(now);
  if (auto hit = cache_.lookup({question.qname, question.qtype}, now)) {
    effects_.replies.push_back({client, question, ClientOutcome::Answered, hit->records});
    return {ClientActionKind::AnswerFromCache, std::move(hit->records)};
  }

  if (Transaction* tx = find(question)) {
    tx->clients.push_back(client);
    if (tx->outstanding.size() < static_cast<std::size_t>(config_.max_identical_outstanding)) {
      send_upstream(*tx, now);
      return {ClientActionKind::NewOutstandingQuery, {}};
    }
    return {ClientActionKind::JoinExistingTransaction, {}};
  }

  Transaction tx;
  tx.id = next_tx_++;
  tx.question = question;
  tx.deadline = now + config_.transaction_timeout;
  tx.clients.push_back(client);
  detector_.open(question, now);
  auto [it, inserted] = transactions_.emplace(question, std::move(tx));
  send_upstream(it->second, now);
  effects_.timers.push_back({it->second.id, it->second.deadline});
  return {ClientActionKind::NewOutstandingQuery, {}};
}

bool Resolver::consistent_with(const std::vector<ResourceRecord>& validated,
                               const std::vector<ResourceRecord>& candidate) const {
  if (candidate.empty()) return false;
  const auto trusted = value_sets(validated);
  for (const auto& [key, values] : value_sets(candidate)) {
    auto it = std::find_if(trusted.begin(), trusted.end(),
                           [&](const auto& kv) { return kv.first == key; });
    if (it == trusted.end() || it->second != values) return false;
  }
  return true;
}

void Resolver::accept(Transaction& tx, const std::vector<ResourceRecord>& records, SimTime now,
                      const std::string& verdict) {
  effects_.acceptances.push_back(
      {tx.question, tx.mode, tx.priority_blocked, detector_.count(tx.question), records});
  cache_.insert_normal(records, now);
  log(now, "accept", tx.question, verdict, join_values(records));
  finish(tx, ClientOutcome::Answered, records);
}

void Resolver::finish(Transaction& tx, ClientOutcome outcome,
                      const std::vector<ResourceRecord>& records) {
  for (ClientId c : tx.clients) effects_.replies.push_back({c, tx.question, outcome, records});
  const QuestionKey question = tx.question;
  detector_.close(question);
  transactions_.erase(question);
}

ResponseAction Resolver::on_response(const ResponseMsg& resp, SimTime now) {
  cache_.expire(now);
  Transaction* tx = find(resp.question);
  if (!tx) {
    log(now, "discard", resp.question, "unrelated");
    return {ResponseActionKind::Discarded, {}, false};
  }

  const MatchResult match = match_response(resp, tx->outstanding);
  switch (match.kind) {
    case MatchKind::Unrelated:
      log(now, "discard", resp.question, "unrelated");
      return {ResponseActionKind::Discarded, {}, false};

    case MatchKind::FailureAttempt: {
      const int count = detector_.record_failure(resp.question, now);
      log(now, "failure", resp.question, std::string(to_string(tx->mode)),
          "count=" + std::to_string(count));
      bool escalated = false;
      if (tx->mode == Mode::Oblivious && detector_.should_escalate(resp.question)) {
        escalate(*tx, now, "tod");
        escalated = true;
      }
      return {ResponseActionKind::CountedAsFailure, {}, escalated};
    }

    case MatchKind::GenuineMatch:
      break;
  }

  if (tx->validated) {
    if (consistent_with(*tx->validated, resp.records)) {
      auto records = resp.records;
      accept(*tx, records, now, "validated");
      return {ResponseActionKind::Accepted, std::move(records), false};
    }
    log(now, "discard", resp.question, "inconsistent", join_values(resp.records));
    return {ResponseActionKind::Discarded, {}, false};
  }

  if (tx->mode == Mode::Aware) {
    tx->holdon.push_back(resp);
    log(now, "holdon", resp.question, "aware", join_values(resp.records));
    return {ResponseActionKind::HeldOn, {}, false};
  }

  if (config_.priority_cache_enabled) {
    const auto consistency = cache_.check_consistency(resp.records, now);
    if (!consistency.consistent) {
      tx->priority_blocked = true;
      tx->holdon.push_back(resp);
      log(now, "holdon", resp.question, "priority-conflict", consistency.conflicts.front().str());
      return {ResponseActionKind::HeldOn, {}, false};
    }
  }

  auto records = resp.records;
  accept(*tx, records, now, "accepted");
  return {ResponseActionKind::Accepted, std::move(records), false};
}

ValidatingAction Resolver::on_validating_response(const ResponseMsg& resp, SimTime now) {
  cache_.expire(now);
  Transaction* tx = nullptr;
  for (auto& [q, candidate] : transactions_) {
    const auto& inflight = candidate.dnssec_inflight;
    if (inflight && inflight->query.question == resp.question &&
        inflight->query.identity == resp.identity) {
      tx = &candidate;
      break;
    }
  }
  if (!tx) {
    log(now, "discard", resp.question, "unsolicited-validating");
    return {ValidatingActionKind::Ignored, std::nullopt, {}};
  }

  const DnssecPurpose purpose = tx->dnssec_inflight->purpose;
  tx->dnssec_inflight.reset();
  if (purpose == DnssecPurpose::Chain) {
    const RecordKey fetched{resp.question.qname, resp.question.qtype};
    std::erase_if(tx->pending_validation,
                  [&](const ResourceRecord& r) { return r.key() == fetched; });
    for (const auto& r : resp.records)
      if (r.key() == fetched) tx->pending_validation.push_back(r);
  } else {
    tx->pending_validation = resp.records;
  }

  const ValidationResult result = ValidationOracle::validate(tx->pending_validation);
  if (result.status == ValidationStatus::Bogus) {
    log(now, "validate", tx->question, "bogus");
    tx->pending_validation.clear();
    send_dnssec(*tx, tx->question, DnssecPurpose::Reissue, now);
    return {ValidatingActionKind::Reissued, std::nullopt, {}};
  }
  if (result.status == ValidationStatus::MissingSignature) {
    QuestionKey chain{result.missing->owner, result.missing->rtype, RrClass::IN};
    log(now, "validate", tx->question, "needs-chain", chain.str());
    send_dnssec(*tx, chain, DnssecPurpose::Chain, now);
    return {ValidatingActionKind::NeedsChainQuery, std::move(chain), {}};
  }

  tx->validated = tx->pending_validation;
  tx->pending_validation.clear();
  log(now, "validate", tx->question, "valid", join_values(*tx->validated));
  if (config_.priority_cache_enabled) {
    const CacheSource source =
        tx->proactive_attempted ? CacheSource::ProactiveUpdate : CacheSource::FreshValidating;
    cache_.insert_validated(*tx->validated, now, source);
    effects_.acceptances.push_back(
        {tx->question, tx->mode, tx->priority_blocked, detector_.count(tx->question), *tx->validated});
    for (const auto& [key, values] : value_sets(*tx->validated))
      if (const auto* entry = cache_.priority_entry(key, now))
        effects_.priority_expiries.push_back(entry->expires_at);
  }

  std::optional<std::size_t> winner;
  for (std::size_t i = 0; i < tx->holdon.size(); ++i) {
    if (!winner && consistent_with(*tx->validated, tx->holdon[i].records)) {
      winner = i;
    } else {
      log(now, "discard", tx->question, "holdon-invalid", join_values(tx->holdon[i].records));
    }
  }
  if (winner) {
    auto records = tx->holdon[*winner].records;
    accept(*tx, records, now, "resolved");
    return {ValidatingActionKind::Resolved, std::nullopt, std::move(records)};
  }
  tx->holdon.clear();
  return {ValidatingActionKind::AwaitMore, std::nullopt, {}};
}

TimeoutAction Resolver::on_timeout(TransactionId id, SimTime now) {
  cache_.expire(now);
  Transaction* tx = find(id);
  if (!tx || now < tx->deadline) return {TimeoutActionKind::Ignored};

  if (config_.priority_cache_enabled && tx->priority_blocked && !tx->proactive_attempted) {
    tx->proactive_attempted = true;
    if (tx->mode == Mode::Oblivious) {
      tx->mode = Mode::Aware;
      log(now, "mode", tx->question, "aware", "priority-timeout");
    }
    tx->deadline = now + config_.transaction_timeout;
    effects_.timers.push_back({tx->id, tx->deadline});
    if (!tx->dnssec_inflight) {
      tx->validated.reset();
      tx->pending_validation.clear();
      send_dnssec(*tx, tx->question, DnssecPurpose::Proactive, now);
    }
    return {TimeoutActionKind::ProactiveUpdate};
  }

  log(now, "servfail", tx->question, "timeout",
      "holdon=" + std::to_string(tx->holdon.size()));
  finish(*tx, ClientOutcome::ServFail, {});
  return {TimeoutActionKind::ServFailToClient};
}

TransactionView Resolver::view(const Transaction& tx) const {
  TransactionView v;
  v.id = tx.id;
  v.question = tx.question;
  v.mode = tx.mode;
  v.priority_blocked = tx.priority_blocked;
  v.validating_request_sent = tx.validating_request_sent;
  v.validated = tx.validated.has_value();
  v.proactive_attempted = tx.proactive_attempted;
  v.failure_count = detector_.count(tx.question);
  v.outstanding = tx.outstanding.size();
  v.holdon = tx.holdon.size();
  v.clients = tx.clients.size();
  v.deadline = tx.deadline;
  v.outstanding_queries = tx.outstanding;
  return v;
}

std::optional<TransactionView> Resolver::transaction(const QuestionKey& question) const {
  auto it = transactions_.find(question);
  if (it == transactions_.end()) return std::nullopt;
  return view(it->second);
}

std::vector<TransactionView> Resolver::transactions() const {
  std::vector<TransactionView> out;
  out.reserve(transactions_.size());
  for (const auto& [q, tx] : transactions_) out.push_back(view(tx));
  return out;
}

}  // namespace tdwn
