#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tdwn/detector.hpp"
#include "tdwn/dns_model.hpp"
#include "tdwn/priority_cache.hpp"

namespace tdwn {

using ClientId = std::uint64_t;
using TransactionId = std::uint64_t;

enum class Mode { Oblivious, Aware };

std::string_view to_string(Mode mode);

struct ResolverConfig {
  /// Cap on identical outstanding upstream queries for one question.
  int max_identical_outstanding = 20;
  /// Seconds from transaction start (or proactive update) to timeout.
  double transaction_timeout = 3.0;
  DetectorConfig detector;
  bool priority_cache_enabled = true;
  IdentitySpace identities;

  void validate() const;
};

/// Why a DNSSEC-aware query was sent.
enum class DnssecPurpose { Escalation, Chain, Proactive, Reissue };

std::string_view to_string(DnssecPurpose purpose);

// Side effects emitted by resolver callbacks; the owner drains them with
// Resolver::take_effects().

struct UpstreamQuery {
  TransactionId tx = 0;
  OutstandingQuery query;
  bool dnssec = false;
  DnssecPurpose purpose = DnssecPurpose::Escalation;
};

enum class ClientOutcome { Answered, ServFail };

struct ClientReply {
  ClientId client = 0;
  QuestionKey question;
  ClientOutcome outcome = ClientOutcome::Answered;
  std::vector<ResourceRecord> records;
};

struct TimerRequest {
  TransactionId tx = 0;
  SimTime at = 0.0;
};

/// Records handed to a client or written into a cache, with the transaction
/// state at that moment. The simulator audits these against ground truth.
struct Acceptance {
  QuestionKey question;
  Mode mode = Mode::Oblivious;
  bool priority_blocked = false;
  int failure_count = 0;
  std::vector<ResourceRecord> records;
};

struct LogRecord {
  SimTime at = 0.0;
  std::string kind;
  QuestionKey question;
  std::string verdict;
  std::string detail;
};

struct Effects {
  std::vector<UpstreamQuery> queries;
  std::vector<ClientReply> replies;
  std::vector<TimerRequest> timers;
  std::vector<Acceptance> acceptances;
  std::vector<LogRecord> log;
  /// Expiry times of entries newly written to the priority tier.
  std::vector<SimTime> priority_expiries;

  bool empty() const {
    return queries.empty() && replies.empty() && timers.empty() && acceptances.empty() &&
           log.empty() && priority_expiries.empty();
  }
};

enum class ClientActionKind { AnswerFromCache, NewOutstandingQuery, JoinExistingTransaction };

struct ClientAction {
  ClientActionKind kind = ClientActionKind::NewOutstandingQuery;
  std::vector<ResourceRecord> records;
};

enum class ResponseActionKind { Accepted, HeldOn, CountedAsFailure, Discarded };

struct ResponseAction {
  ResponseActionKind kind = ResponseActionKind::Discarded;
  std::vector<ResourceRecord> records;
  bool escalated = false;
};

enum class ValidatingActionKind {
  NeedsChainQuery,
  Resolved,
  AwaitMore,
  /// Oracle rejected the response; a fresh DNSSEC-aware query went out.
  Reissued,
  /// No outstanding DNSSEC-aware query matches this response.
  Ignored,
};

struct ValidatingAction {
  ValidatingActionKind kind = ValidatingActionKind::Ignored;
  std::optional<QuestionKey> chain_question;
  std::vector<ResourceRecord> records;
};

enum class TimeoutActionKind { ServFailToClient, ProactiveUpdate, Ignored };

struct TimeoutAction {
  TimeoutActionKind kind = TimeoutActionKind::Ignored;
};

/// Read-only view of a live resolution transaction.
struct TransactionView {
  TransactionId id = 0;
  QuestionKey question;
  Mode mode = Mode::Oblivious;
  bool priority_blocked = false;
  bool validating_request_sent = false;
  bool validated = false;
  bool proactive_attempted = false;
  int failure_count = 0;
  std::size_t outstanding = 0;
  std::size_t holdon = 0;
  std::size_t clients = 0;
  SimTime deadline = 0.0;
  std::vector<OutstandingQuery> outstanding_queries;
};

/// The two-mode defense. Runs as a plain resolver until the detector reports
/// ToD failure responses for a question, then holds every candidate response
/// until a validated DNSSEC answer picks the consistent one. Validated records
/// go to the priority tier and guard later resolutions; a timeout under a
/// priority conflict fetches a fresh validated answer once.
///
/// Single-threaded. Every callback takes the current simulation time.
class Resolver {
 public:
  Resolver(ResolverConfig config, std::uint64_t seed);

  const ResolverConfig& config() const { return config_; }

  ClientAction on_client_query(const QuestionKey& question, SimTime now, ClientId client);
  ResponseAction on_response(const ResponseMsg& resp, SimTime now);
  ValidatingAction on_validating_response(const ResponseMsg& resp, SimTime now);
  TimeoutAction on_timeout(TransactionId tx, SimTime now);

  /// Evicts expired cache entries; returns the number evicted.
  std::size_t expire(SimTime now);

  Effects take_effects();

  const TwoTierCache& cache() const { return cache_; }
  std::optional<TransactionView> transaction(const QuestionKey& question) const;
  std::vector<TransactionView> transactions() const;
  const Detector& detector() const { return detector_; }

 private:
  struct PendingDnssec {
    OutstandingQuery query;
    DnssecPurpose purpose = DnssecPurpose::Escalation;
  };

  struct Transaction {
    TransactionId id = 0;
    QuestionKey question;
    Mode mode = Mode::Oblivious;
    bool priority_blocked = false;
    std::vector<OutstandingQuery> outstanding;
    std::vector<ResponseMsg> holdon;
    bool validating_request_sent = false;
    std::optional<PendingDnssec> dnssec_inflight;
    std::vector<ResourceRecord> pending_validation;
    std::optional<std::vector<ResourceRecord>> validated;
    bool proactive_attempted = false;
    SimTime deadline = 0.0;
    std::vector<ClientId> clients;
  };

  Transaction* find(const QuestionKey& question);
  Transaction* find(TransactionId id);
  TransactionView view(const Transaction& tx) const;

  QueryIdentity fresh_identity(const Transaction& tx);
  void send_upstream(Transaction& tx, SimTime now);
  void send_dnssec(Transaction& tx, const QuestionKey& question, DnssecPurpose purpose,
                   SimTime now);
  void escalate(Transaction& tx, SimTime now, const std::string& reason);

  bool consistent_with(const std::vector<ResourceRecord>& validated,
                       const std::vector<ResourceRecord>& candidate) const;
  void accept(Transaction& tx, const std::vector<ResourceRecord>& records, SimTime now,
              const std::string& verdict);
  void finish(Transaction& tx, ClientOutcome outcome, const std::vector<ResourceRecord>& records);
  void log(SimTime now, std::string kind, const QuestionKey& q, std::string verdict,
           std::string detail = {});

  ResolverConfig config_;
  std::mt19937_64 rng_;
  Detector detector_;
  TwoTierCache cache_;
  std::map<QuestionKey, Transaction> transactions_;
  TransactionId next_tx_ = 1;
  Effects effects_;
};

}  // namespace tdwn
