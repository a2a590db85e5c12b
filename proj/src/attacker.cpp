#include "tdwn/attacker.hpp"

#include <cmath>
#include <stdexcept>

namespace tdwn {

std::string_view to_string(GuessStrategy strategy) {
  return strategy == GuessStrategy::UniformRandom ? "uniform" : "sweep";
}

std::string_view to_string(Arrivals arrivals) {
  return arrivals == Arrivals::Deterministic ? "deterministic" : "poisson";
}

void AttackConfig::validate() const {
  normalize_qname(target_domain);
  if (!(client_query_rate > 0.0)) throw std::invalid_argument("attacker query rate must be positive");
  if (!(bogus_response_rate > 0.0)) throw std::invalid_argument("bogus response rate must be positive");
  if (rounds && *rounds < 0) throw std::invalid_argument("rounds must be non-negative");
  if (forged_value.empty()) throw std::invalid_argument("forged_value must be non-empty");
  if (start < 0.0 || forge_offset < 0.0) throw std::invalid_argument("attack times must be non-negative");
  if (!(forged_ttl > 0.0)) throw std::invalid_argument("forged TTL must be positive");
}

std::string nameserver_owner(const std::string& target_domain) {
  return normalize_qname("ns." + normalize_qname(target_domain));
}

int effective_outstanding(int resolver_cap, double response_time, double send_rate) {
  if (resolver_cap < 1 || !(response_time > 0.0) || !(send_rate > 0.0))
    throw std::invalid_argument("effective_outstanding inputs must be positive");
  // Guard against 1000 * 0.02 landing just under 20.
  const double window_count = std::floor(send_rate * response_time * (1.0 + 1e-12));
  return static_cast<int>(std::min<double>(resolver_cap, window_count));
}

SimTime schedule_next_round(SimTime now, std::optional<SimTime> priority_cache_expiry) {
  return priority_cache_expiry ? std::max(now, *priority_cache_expiry) : now;
}

std::vector<SimTime> arrival_times(double rate, Arrivals arrivals, SimTime start, SimTime end,
                                   std::mt19937_64& rng) {
  if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
  std::vector<SimTime> out;
  if (arrivals == Arrivals::Deterministic) {
    for (std::uint64_t k = 0;; ++k) {
      const SimTime t = start + static_cast<double>(k) / rate;
      if (t >= end) break;
      out.push_back(t);
    }
    return out;
  }
  std::exponential_distribution<double> gap(rate);
  for (SimTime t = start + gap(rng); t < end; t += gap(rng)) out.push_back(t);
  return out;
}

Attacker::Attacker(AttackConfig config, IdentitySpace identities, std::uint64_t seed)
    : config_(std::move(config)), identities_(std::move(identities)), rng_(seed) {
  config_.validate();
  identities_.validate();
  config_.target_domain = normalize_qname(config_.target_domain);
}

std::string Attacker::next_round_qname() {
  static constexpr std::string_view alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (;;) {
    std::string label(7, 'a');
    for (auto& c : label) c = alphabet[pick(rng_)];
    if (used_labels_.insert(label).second) return label + "." + config_.target_domain;
  }
}

void Attacker::begin_round(SimTime now) {
  state_.current_round += 1;
  state_.current_qname = next_round_qname();
  state_.attempts_this_round = 0;
  state_.active = true;
  state_.round_started = now;
  std::uniform_int_distribution<std::uint64_t> offset(0, identities_.size() - 1);
  sweep_offset_ = offset(rng_);
}

void Attacker::end_round(bool success) {
  state_.active = false;
  if (success) ++state_.successes;
}

bool Attacker::rounds_exhausted() const {
  return config_.rounds && state_.current_round >= *config_.rounds;
}

QuestionKey Attacker::current_question() const {
  return QuestionKey{state_.current_qname, RrType::A, RrClass::IN};
}

QueryIdentity Attacker::next_guess() {
  if (config_.guess_strategy == GuessStrategy::SequentialSweep) {
    const std::uint64_t n = identities_.size();
    return identities_.at((sweep_offset_ + static_cast<std::uint64_t>(state_.attempts_this_round)) % n);
  }
  std::uniform_int_distribution<std::uint64_t> pick(0, identities_.size() - 1);
  return identities_.at(pick(rng_));
}

ResponseMsg Attacker::forge() {
  if (!state_.active) throw std::logic_error("forge() called outside an attack round");
  ResponseMsg msg;
  msg.question = current_question();
  msg.identity = next_guess();
  msg.records.emplace_back(state_.current_qname, RrType::A, config_.forged_value,
                           config_.forged_ttl, false, false);
  msg.records.emplace_back(nameserver_owner(config_.target_domain), RrType::A,
                           config_.forged_value, config_.forged_ttl, false, false);
  ++state_.attempts_this_round;
  return msg;
}

double Attacker::next_gap(double rate) {
  if (config_.arrivals == Arrivals::Deterministic) return 1.0 / rate;
  return std::exponential_distribution<double>(rate)(rng_);
}

}  // namespace tdwn
