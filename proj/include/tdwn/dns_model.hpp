#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tdwn {

/// Simulation time in seconds.
using SimTime = double;

enum class RrType : std::uint8_t { A, NS, DNSKEY, RRSIG };
enum class RrClass : std::uint8_t { IN };

std::string_view to_string(RrType type);
RrType parse_rrtype(std::string_view text);

/// Lowercases and appends the trailing dot. Throws std::invalid_argument on an
/// empty name or an empty label ("a..com").
std::string normalize_qname(std::string_view raw);

/// The <qname, qtype, qclass> triple a resolution is about.
struct QuestionKey {
  std::string qname;
  RrType qtype = RrType::A;
  RrClass qclass = RrClass::IN;

  static QuestionKey make(std::string_view name, RrType type = RrType::A);

  std::string str() const;
  auto operator<=>(const QuestionKey&) const = default;
};

struct QuestionKeyHash {
  std::size_t operator()(const QuestionKey& key) const noexcept;
};

/// Values an off-path attacker must guess: transaction ID, source port and
/// the address of the server the query went to.
struct QueryIdentity {
  std::uint32_t txid = 0;
  std::uint32_t port = 0;
  std::string server_addr;

  auto operator<=>(const QueryIdentity&) const = default;
};

/// Enumerable space of query identities. Index order is txid fastest, then
/// port, then server, so [0, size()) covers every identity exactly once.
struct IdentitySpace {
  std::uint32_t id_space = 65536;
  std::uint32_t port_min = 1024;
  std::uint32_t port_space = 64000;
  std::vector<std::string> servers{"ns-a", "ns-b", "ns-c"};

  std::uint64_t size() const;
  QueryIdentity at(std::uint64_t index) const;
  std::optional<std::uint64_t> index_of(const QueryIdentity& identity) const;
  bool contains(const QueryIdentity& identity) const { return index_of(identity).has_value(); }
  void validate() const;
};

/// How ID space, port space and server count combine into the guess space G.
/// Additive is (I + P) * N as printed for the per-attempt probability; Product
/// is the conventional I * P * N.
enum class GuessForm { Additive, Product };

std::uint64_t guess_space_size(std::uint64_t id_space, std::uint64_t port_space, double n_auth,
                               GuessForm form);

struct RecordKey {
  std::string owner;
  RrType rtype = RrType::A;

  std::string str() const;
  auto operator<=>(const RecordKey&) const = default;
};

struct RecordKeyHash {
  std::size_t operator()(const RecordKey& key) const noexcept;
};

class ValidationOracle;
struct GroundTruth;

/// A DNS record. `is_signed` models a valid RRSIG being present. Whether the
/// record really came from the zone owner is hidden: only ValidationOracle and
/// GroundTruth (the simulator's audit) can read it.
class ResourceRecord {
 public:
  ResourceRecord(std::string owner, RrType rtype, std::string value, double ttl, bool is_signed,
                 bool authentic);

  const std::string& owner() const { return owner_; }
  RrType rtype() const { return rtype_; }
  const std::string& value() const { return value_; }
  double ttl() const { return ttl_; }
  bool is_signed() const { return signed_; }
  RecordKey key() const { return {owner_, rtype_}; }

  ResourceRecord with_signature() const;

 private:
  friend class ValidationOracle;
  friend struct GroundTruth;

  std::string owner_;
  RrType rtype_;
  std::string value_;
  double ttl_;
  bool signed_;
  bool authentic_;
};

struct ResponseMsg {
  QuestionKey question;
  QueryIdentity identity;
  std::vector<ResourceRecord> records;
  bool is_validating = false;
};

struct OutstandingQuery {
  QuestionKey question;
  QueryIdentity identity;
  SimTime sent_at = 0.0;
};

enum class MatchKind { GenuineMatch, FailureAttempt, Unrelated };

struct MatchResult {
  MatchKind kind = MatchKind::Unrelated;
  /// Position of the matched query in the outstanding span (GenuineMatch only).
  std::size_t index = 0;
};

/// Classifies a response against the outstanding set: a full identity match on
/// the same question is genuine, same question with any mismatch is a failure
/// attempt, anything else is unrelated.
MatchResult match_response(const ResponseMsg& resp, std::span<const OutstandingQuery> outstanding);

enum class ValidationStatus { Valid, MissingSignature, Bogus };

struct ValidationResult {
  ValidationStatus status = ValidationStatus::Valid;
  /// First record lacking a signature (MissingSignature only).
  std::optional<RecordKey> missing;
};

/// Stand-in for DNSSEC validation. A record set validates iff every record is
/// signed and authentic; signed-but-not-authentic is bogus; an unsigned record
/// needs another round trip to fetch its signature.
class ValidationOracle {
 public:
  static ValidationResult validate(std::span<const ResourceRecord> records);
};

/// Ground-truth access for audits. Resolver logic must never call this.
struct GroundTruth {
  static bool is_authentic(const ResourceRecord& record) { return record.authentic_; }
};

/// Groups records by key and returns the value set per key, ordered by key.
std::vector<std::pair<RecordKey, std::vector<std::string>>> value_sets(
    std::span<const ResourceRecord> records);

}  // namespace tdwn
