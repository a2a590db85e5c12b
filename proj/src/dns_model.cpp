#include "tdwn/dns_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

namespace tdwn {

namespace {

std::size_t hash_combine(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

std::string_view to_string(RrType type) {
  switch (type) {
    case RrType::A:
      return "A";
    case RrType::NS:
      return "NS";
    case RrType::DNSKEY:
      return "DNSKEY";
    case RrType::RRSIG:
      return "RRSIG";
  }
  return "?";
}

RrType parse_rrtype(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "A") return RrType::A;
  if (upper == "NS") return RrType::NS;
  if (upper == "DNSKEY") return RrType::DNSKEY;
  if (upper == "RRSIG") return RrType::RRSIG;
  throw std::invalid_argument("unknown record type '" + std::string(text) + "'");
}

std::string normalize_qname(std::string_view raw) {
  if (raw.empty()) throw std::invalid_argument("empty domain name");
  std::string name(raw);
  if (name.back() == '.') name.pop_back();
  if (name.empty()) throw std::invalid_argument("domain name has no labels");

  std::string out;
  out.reserve(name.size() + 1);
  std::size_t label_len = 0;
  for (char c : name) {
    if (c == '.') {
      if (label_len == 0) throw std::invalid_argument("empty label in '" + std::string(raw) + "'");
      label_len = 0;
    } else {
      ++label_len;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (label_len == 0) throw std::invalid_argument("empty label in '" + std::string(raw) + "'");
  out.push_back('.');
  return out;
}

QuestionKey QuestionKey::make(std::string_view name, RrType type) {
  return QuestionKey{normalize_qname(name), type, RrClass::IN};
}

std::string QuestionKey::str() const {
  return qname + "/" + std::string(to_string(qtype)) + "/IN";
}

std::size_t QuestionKeyHash::operator()(const QuestionKey& key) const noexcept {
  std::size_t h = std::hash<std::string>{}(key.qname);
  h = hash_combine(h, static_cast<std::size_t>(key.qtype));
  return hash_combine(h, static_cast<std::size_t>(key.qclass));
}

std::string RecordKey::str() const { return owner + "/" + std::string(to_string(rtype)); }

std::size_t RecordKeyHash::operator()(const RecordKey& key) const noexcept {
  return hash_combine(std::hash<std::string>{}(key.owner), static_cast<std::size_t>(key.rtype));
}

std::uint64_t IdentitySpace::size() const {
  return static_cast<std::uint64_t>(id_space) * port_space * servers.size();
}

QueryIdentity IdentitySpace::at(std::uint64_t index) const {
  if (index >= size()) throw std::out_of_range("identity index outside the identity space");
  QueryIdentity id;
  id.txid = static_cast<std::uint32_t>(index % id_space);
  index /= id_space;
  id.port = port_min + static_cast<std::uint32_t>(index % port_space);
  index /= port_space;
  id.server_addr = servers[static_cast<std::size_t>(index)];
  return id;
}

std::optional<std::uint64_t> IdentitySpace::index_of(const QueryIdentity& identity) const {
  if (identity.txid >= id_space) return std::nullopt;
  if (identity.port < port_min || identity.port - port_min >= port_space) return std::nullopt;
  auto it = std::find(servers.begin(), servers.end(), identity.server_addr);
  if (it == servers.end()) return std::nullopt;
  const auto server = static_cast<std::uint64_t>(it - servers.begin());
  return identity.txid +
         static_cast<std::uint64_t>(id_space) * ((identity.port - port_min) + port_space * server);
}

void IdentitySpace::validate() const {
  if (id_space == 0) throw std::invalid_argument("id_space must be positive");
  if (port_space == 0) throw std::invalid_argument("port_space must be positive");
  if (static_cast<std::uint64_t>(port_min) + port_space > 65536)
    throw std::invalid_argument("port range exceeds 65535");
  if (servers.empty()) throw std::invalid_argument("at least one server address is required");
  for (std::size_t i = 0; i < servers.size(); ++i)
    for (std::size_t j = i + 1; j < servers.size(); ++j)
      if (servers[i] == servers[j]) throw std::invalid_argument("duplicate server address");
}

std::uint64_t guess_space_size(std::uint64_t id_space, std::uint64_t port_space, double n_auth,
                               GuessForm form) {
  if (id_space == 0 || port_space == 0 || !(n_auth > 0.0))
    throw std::invalid_argument("guess space parameters must be positive");
  const double base = form == GuessForm::Additive
                          ? static_cast<double>(id_space + port_space)
                          : static_cast<double>(id_space) * static_cast<double>(port_space);
  const double g = std::llround(base * n_auth);
  if (g < 1.0) throw std::invalid_argument("guess space rounds to zero");
  return static_cast<std::uint64_t>(g);
}

ResourceRecord::ResourceRecord(std::string owner, RrType rtype, std::string value, double ttl,
                               bool is_signed, bool authentic)
    : owner_(normalize_qname(owner)),
      rtype_(rtype),
      value_(std::move(value)),
      ttl_(ttl),
      signed_(is_signed),
      authentic_(authentic) {
  if (!(ttl_ > 0.0)) throw std::invalid_argument("record TTL must be positive");
}

ResourceRecord ResourceRecord::with_signature() const {
  ResourceRecord copy = *this;
  copy.signed_ = true;
  return copy;
}

MatchResult match_response(const ResponseMsg& resp, std::span<const OutstandingQuery> outstanding) {
  bool same_question = false;
  for (std::size_t i = 0; i < outstanding.size(); ++i) {
    const auto& q = outstanding[i];
    if (q.question != resp.question) continue;
    same_question = true;
    if (q.identity == resp.identity) return {MatchKind::GenuineMatch, i};
  }
  return {same_question ? MatchKind::FailureAttempt : MatchKind::Unrelated, 0};
}

ValidationResult ValidationOracle::validate(std::span<const ResourceRecord> records) {
  for (const auto& r : records)
    if (r.signed_ && !r.authentic_) return {ValidationStatus::Bogus, std::nullopt};
  for (const auto& r : records)
    if (!r.signed_) return {ValidationStatus::MissingSignature, r.key()};
  return {ValidationStatus::Valid, std::nullopt};
}

std::vector<std::pair<RecordKey, std::vector<std::string>>> value_sets(
    std::span<const ResourceRecord> records) {
  std::map<RecordKey, std::vector<std::string>> grouped;
  for (const auto& r : records) grouped[r.key()].push_back(r.value());
  std::vector<std::pair<RecordKey, std::vector<std::string>>> out;
  out.reserve(grouped.size());
  for (auto& [key, values] : grouped) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    out.emplace_back(key, std::move(values));
  }
  return out;
}

}  // namespace tdwn
