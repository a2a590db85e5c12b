#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tdwn/dns_model.hpp"
#include "tdwn/random.hpp"

namespace tdwn {

/// The success target cannot be reached (a round never succeeds).
class UnreachableTarget : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class QueryTrigger { TtlExpiry, AuthUpdate };

std::string_view to_string(QueryTrigger trigger);

/// When a fresh TTL is drawn in the query-event process. OnExpiry keeps the
/// cached record's TTL across updates (an update restores the full TTL of the
/// record already held) and draws a new one when the record is refetched after
/// expiry. OnEveryQuery draws a new TTL at every query.
enum class TtlRedraw { OnExpiry, OnEveryQuery };

struct QueryEventTrace {
  std::vector<SimTime> query_times;
  std::vector<QueryTrigger> triggers;

  std::size_t size() const { return query_times.size(); }
  std::size_t count(QueryTrigger trigger) const;
};

/// Residual-TTL clock of one validated record. A DNSSEC query fires when the
/// clock hits zero or when the authoritative data is updated; either way the
/// clock restarts at a full TTL. Queries at exactly the horizon are included.
/// When an update lands at the same instant as an expiry, one AuthUpdate query
/// is recorded.
QueryEventTrace query_event_process(const TtlDistribution& ttl, std::span<const SimTime> update_times,
                                    SimTime horizon, std::mt19937_64& rng,
                                    TtlRedraw redraw = TtlRedraw::OnExpiry);

struct QueryIntervalStats {
  double mean_interval = 0.0;
  /// 95% normal-approximation half-width of mean_interval.
  double interval_half_width = 0.0;
  double ttl_triggered_ratio = 0.0;
  double ratio_half_width = 0.0;
  std::uint64_t queries = 0;
  std::uint64_t ttl_triggered = 0;
  std::uint64_t update_triggered = 0;
};

/// Monte Carlo estimate over a query_event_process trace driven by
/// n_updates exponential inter-update gaps with the given mean.
QueryIntervalStats mc_query_intervals(const TtlDistribution& ttl, double update_mean,
                                      std::uint64_t n_updates, std::uint64_t seed,
                                      TtlRedraw redraw = TtlRedraw::OnExpiry);

/// Superposition of two independent query streams: I_u * I_t / (I_u + I_t).
double independence_bound(double i_update, double i_ttl);

/// Probability that h forged guesses all miss d outstanding identities out
/// of g: (1 - d/g)^h. Throws std::invalid_argument unless 0 <= d <= g, h >= 0.
double p_round_fail(std::int64_t h, std::int64_t d, std::int64_t g);

/// 1 - p_round_fail(h, d, g)^rounds.
double success_within_rounds(std::int64_t rounds, std::int64_t h, std::int64_t d, std::int64_t g);

struct TimeToSuccess {
  std::int64_t rounds = 0;
  double round_period = 0.0;
  double seconds = 0.0;

  double years() const { return seconds / (365.0 * 86400.0); }
};

/// Smallest number of rounds i with 1 - P^i >= target, P = p_round_fail(tod-1, d, g),
/// times the round period (lifecycle with caching, 2 * response_time without).
TimeToSuccess time_to_success(double target_prob, double lifecycle, int tod, std::int64_t d,
                              std::int64_t g, double response_time, bool caching_enabled = true);

struct SuccessCurve {
  /// (time, cumulative success probability); the curve holds each value until
  /// the next point.
  std::vector<std::pair<double, double>> points;
  double round_period = 0.0;

  double at(double t) const;
};

/// Stair-step curve: 0 before the first round completes, then 1 - P^k from
/// k * round_period on, for every step up to the horizon.
SuccessCurve success_curve(double horizon, double lifecycle, int tod, std::int64_t d, std::int64_t g);

}  // namespace tdwn
