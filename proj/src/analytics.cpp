#include "tdwn/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tdwn {

std::string_view to_string(QueryTrigger trigger) {
  return trigger == QueryTrigger::TtlExpiry ? "TtlExpiry" : "AuthUpdate";
}

std::size_t QueryEventTrace::count(QueryTrigger trigger) const {
  return static_cast<std::size_t>(std::count(triggers.begin(), triggers.end(), trigger));
}

QueryEventTrace query_event_process(const TtlDistribution& ttl, std::span<const SimTime> update_times,
                                    SimTime horizon, std::mt19937_64& rng, TtlRedraw redraw) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!std::is_sorted(update_times.begin(), update_times.end()))
    throw std::invalid_argument("update times must be sorted");

  QueryEventTrace trace;
  double current_ttl = ttl.draw(rng);
  SimTime expiry = current_ttl;
  std::size_t u = 0;
  while (u < update_times.size() && update_times[u] < 0.0) ++u;

  for (;;) {
    const SimTime next_update =
        u < update_times.size() ? update_times[u] : std::numeric_limits<double>::infinity();
    if (next_update <= expiry) {
      if (next_update > horizon) break;
      trace.query_times.push_back(next_update);
      trace.triggers.push_back(QueryTrigger::AuthUpdate);
      ++u;
      // Several updates at one instant each fire a query; times stay ordered.
      if (redraw == TtlRedraw::OnEveryQuery) current_ttl = ttl.draw(rng);
      expiry = next_update + current_ttl;
    } else {
      if (expiry > horizon) break;
      trace.query_times.push_back(expiry);
      trace.triggers.push_back(QueryTrigger::TtlExpiry);
      current_ttl = ttl.draw(rng);
      expiry += current_ttl;
    }
  }
  return trace;
}

QueryIntervalStats mc_query_intervals(const TtlDistribution& ttl, double update_mean,
                                      std::uint64_t n_updates, std::uint64_t seed, TtlRedraw redraw) {
  if (n_updates < 1) throw std::invalid_argument("n_updates must be >= 1");
  if (!(update_mean > 0.0)) throw std::invalid_argument("update mean must be positive");

  std::mt19937_64 update_rng(derive_seed(seed, stream::kUpdates));
  std::mt19937_64 ttl_rng(derive_seed(seed, stream::kAuthTtl));
  std::exponential_distribution<double> gap(1.0 / update_mean);
  std::vector<SimTime> updates(n_updates);
  SimTime t = 0.0;
  for (auto& u : updates) u = (t += gap(update_rng));

  const auto trace = query_event_process(ttl, updates, updates.back(), ttl_rng, redraw);

  QueryIntervalStats s;
  s.queries = trace.size();
  s.ttl_triggered = trace.count(QueryTrigger::TtlExpiry);
  s.update_triggered = trace.count(QueryTrigger::AuthUpdate);
  s.ttl_triggered_ratio = s.queries ? static_cast<double>(s.ttl_triggered) / static_cast<double>(s.queries) : 0.0;
  if (s.queries)
    s.ratio_half_width = 1.96 * std::sqrt(s.ttl_triggered_ratio * (1.0 - s.ttl_triggered_ratio) /
                                          static_cast<double>(s.queries));

  // Intervals run from time 0 (the record is fetched at the start).
  const std::size_t n = trace.size();
  if (n == 0) return s;
  double sum = 0.0, sum_sq = 0.0;
  SimTime prev = 0.0;
  for (SimTime q : trace.query_times) {
    const double d = q - prev;
    sum += d;
    sum_sq += d * d;
    prev = q;
  }
  const double nn = static_cast<double>(n);
  s.mean_interval = sum / nn;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - nn * s.mean_interval * s.mean_interval) / (nn - 1.0));
    s.interval_half_width = 1.96 * std::sqrt(var / nn);
  }
  return s;
}

double independence_bound(double i_update, double i_ttl) {
  if (!(i_update > 0.0) || !(i_ttl > 0.0)) throw std::invalid_argument("intervals must be positive");
  return i_update * i_ttl / (i_update + i_ttl);
}

double p_round_fail(std::int64_t h, std::int64_t d, std::int64_t g) {
  if (h < 0 || d < 0 || g < 1) throw std::invalid_argument("p_round_fail needs h >= 0, d >= 0, g >= 1");
  if (d > g) throw std::invalid_argument("p_round_fail: d exceeds the guess space");
  if (h == 0) return 1.0;
  if (d == g) return 0.0;
  // log1p keeps precision when d/g is tiny.
  return std::exp(static_cast<double>(h) * std::log1p(-static_cast<double>(d) / static_cast<double>(g)));
}

double success_within_rounds(std::int64_t rounds, std::int64_t h, std::int64_t d, std::int64_t g) {
  if (rounds < 0) throw std::invalid_argument("rounds must be non-negative");
  const double p = p_round_fail(h, d, g);
  if (p == 0.0) return rounds > 0 ? 1.0 : 0.0;
  return -std::expm1(static_cast<double>(rounds) * std::log(p));
}

TimeToSuccess time_to_success(double target_prob, double lifecycle, int tod, std::int64_t d, std::int64_t g,
                              double response_time, bool caching_enabled) {
  if (!(target_prob > 0.0 && target_prob < 1.0)) throw std::invalid_argument("target must be in (0, 1)");
  if (tod < 1) throw std::invalid_argument("tod must be >= 1");
  const double period = caching_enabled ? lifecycle : 2.0 * response_time;
  if (!(period > 0.0)) throw std::invalid_argument("round period must be positive");

  const double p = p_round_fail(tod - 1, d, g);
  if (p >= 1.0) throw UnreachableTarget("a round can never succeed (P = 1)");
  std::int64_t rounds = 1;
  if (p > 0.0) {
    rounds = static_cast<std::int64_t>(std::ceil(std::log1p(-target_prob) / std::log(p)));
    // Guard the ceiling against rounding on either side.
    while (rounds > 1 && success_within_rounds(rounds - 1, tod - 1, d, g) >= target_prob) --rounds;
    while (success_within_rounds(rounds, tod - 1, d, g) < target_prob) ++rounds;
  }
  return {rounds, period, static_cast<double>(rounds) * period};
}

double SuccessCurve::at(double t) const {
  double value = 0.0;
  for (const auto& [time, prob] : points) {
    if (time > t) break;
    value = prob;
  }
  return value;
}

SuccessCurve success_curve(double horizon, double lifecycle, int tod, std::int64_t d, std::int64_t g) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(lifecycle > 0.0)) throw std::invalid_argument("lifecycle must be positive");
  if (tod < 1) throw std::invalid_argument("tod must be >= 1");
  SuccessCurve curve;
  curve.round_period = lifecycle;
  curve.points.emplace_back(0.0, 0.0);
  for (std::int64_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * lifecycle;
    if (t > horizon) break;
    curve.points.emplace_back(t, success_within_rounds(k, tod - 1, d, g));
  }
  return curve;
}

}  // namespace tdwn
