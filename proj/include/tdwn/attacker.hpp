#pragma once

#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "tdwn/dns_model.hpp"

namespace tdwn {

enum class GuessStrategy { UniformRandom, SequentialSweep };

/// How a rate becomes event times: fixed 1/rate spacing or exponential gaps.
enum class Arrivals { Deterministic, Poisson };

std::string_view to_string(GuessStrategy strategy);
std::string_view to_string(Arrivals arrivals);

struct AttackConfig {
  std::string target_domain = "foo.com.";
  /// Client queries per second used to build up identical outstanding queries.
  double client_query_rate = 1000.0;
  /// Forged responses per second.
  double bogus_response_rate = 100.0;
  GuessStrategy guess_strategy = GuessStrategy::UniformRandom;
  /// Number of rounds to run; nullopt runs until the simulation ends.
  std::optional<int> rounds;
  std::string forged_value = "Y.Y.Y.Y";
  Arrivals arrivals = Arrivals::Poisson;
  /// Start of the first round.
  SimTime start = 0.0;
  /// Delay from round start to the first forgery.
  double forge_offset = 0.0;
  /// TTL the forged records claim.
  double forged_ttl = 86400.0;

  void validate() const;
};

struct AttackState {
  int current_round = 0;
  std::string current_qname;
  int attempts_this_round = 0;
  int successes = 0;
  bool active = false;
  SimTime round_started = 0.0;
};

/// Name server host whose address the attack tries to poison.
std::string nameserver_owner(const std::string& target_domain);

/// D = min(resolver cap, floor(send_rate * response_time)).
int effective_outstanding(int resolver_cap, double response_time, double send_rate);

/// Earliest start for the next round: the attacker waits until the cached
/// validated record protecting the target is gone.
SimTime schedule_next_round(SimTime now, std::optional<SimTime> priority_cache_expiry);

/// Arrival times of a rate-driven source in [start, end). Deterministic
/// arrivals fall at start + k / rate for k = 0, 1, ...
std::vector<SimTime> arrival_times(double rate, Arrivals arrivals, SimTime start, SimTime end,
                                   std::mt19937_64& rng);

/// Off-path Kaminsky-style attacker: each round picks a fresh random
/// subdomain, provokes identical outstanding queries for it and sprays forged
/// responses that guess the query identity.
class Attacker {
 public:
  Attacker(AttackConfig config, IdentitySpace identities, std::uint64_t seed);

  const AttackConfig& config() const { return config_; }
  const AttackState& state() const { return state_; }

  /// Fresh random 7-character label under the target domain.
  std::string next_round_qname();

  void begin_round(SimTime now);
  void end_round(bool success);
  bool rounds_exhausted() const;

  QuestionKey current_question() const;

  /// One forged response for the current round.
  ResponseMsg forge();

  /// Gap to the next event of a source running at `rate`.
  double next_gap(double rate);

 private:
  QueryIdentity next_guess();

  AttackConfig config_;
  IdentitySpace identities_;
  std::mt19937_64 rng_;
  AttackState state_;
  std::unordered_set<std::string> used_labels_;
  std::uint64_t sweep_offset_ = 0;
};

}  // namespace tdwn
