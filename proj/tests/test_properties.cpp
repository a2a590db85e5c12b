// Randomized checks of the invariants each module promises.

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>
#include <sstream>

#include "tdwn/analytics.hpp"
#include "tdwn/priority_cache.hpp"
#include "tdwn/replicate.hpp"
#include "tdwn/sim_engine.hpp"

using namespace tdwn;

TEST_CASE("normalization is idempotent") {
  std::mt19937_64 rng(3);
  const std::string alphabet = "abcXYZ019-";
  std::uniform_int_distribution<int> len(1, 8), labels(1, 4), ch(0, static_cast<int>(alphabet.size()) - 1);
  for (int i = 0; i < 2000; ++i) {
    std::string name;
    for (int l = labels(rng); l > 0; --l) {
      for (int c = len(rng); c > 0; --c) name += alphabet[ch(rng)];
      name += '.';
    }
    if (rng() % 2) name.pop_back();
    const auto once = normalize_qname(name);
    CHECK(normalize_qname(once) == once);
    CHECK(once.back() == '.');
  }
}

TEST_CASE("cache tiers never disagree and priority values always win") {
  std::mt19937_64 rng(17);
  const std::vector<std::string> owners{"a.foo.com.", "b.foo.com.", "ns.foo.com."};
  const std::vector<std::string> values{"1", "2", "3"};
  std::uniform_int_distribution<int> pick(0, 2), op(0, 3);
  std::uniform_real_distribution<double> ttl(1.0, 50.0), step(0.0, 5.0);
  TwoTierCache cache;
  double now = 0;
  for (int i = 0; i < 20000; ++i) {
    now += step(rng);
    const ResourceRecord r(owners[pick(rng)], RrType::A, values[pick(rng)], ttl(rng), false, true);
    switch (op(rng)) {
      case 0: cache.insert_validated(r.with_signature(), now); break;
      case 1:
      case 2: cache.insert_normal(r, now); break;
      default: cache.expire(now); break;
    }
    for (const auto& owner : owners) {
      const RecordKey key{owner, RrType::A};
      const auto* p = cache.priority_entry(key, now);
      const auto* n = cache.normal_entry(key, now);
      if (p && n) CHECK(p->values() == n->values());
      if (p) {
        const auto hit = cache.lookup(key, now);
        REQUIRE(hit);
        CHECK(hit->tier == CacheTier::Priority);
        CHECK(p->expires_at > p->inserted_at);
      }
    }
  }
}

TEST_CASE("query-event process keeps every update and matches exp(-T/m)") {
  for (double m : {300.0, 700.0, 1500.0}) {
    const auto s = mc_query_intervals(TtlDistribution::constant(1000), m, 50000, 99);
    CHECK(s.update_triggered == 50000);
    CHECK(std::abs(s.ttl_triggered_ratio - std::exp(-1000 / m)) < 4 * s.ratio_half_width / 1.96 + 1e-3);
    CHECK(s.mean_interval >= independence_bound(m, 1000) * 0.99);
  }
}

TEST_CASE("success curves are non-decreasing and bounded") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t g = 1 + rng() % 5000;
    const std::int64_t d = rng() % (g + 1);
    const int tod = 1 + static_cast<int>(rng() % 6);
    const auto c = success_curve(100.0, 1.0 + static_cast<double>(rng() % 10), tod, d, g);
    for (std::size_t k = 1; k < c.points.size(); ++k) {
      CHECK(c.points[k].second >= c.points[k - 1].second);
      CHECK(c.points[k].second <= 1.0);
      CHECK(c.points[k].second >= 0.0);
    }
  }
}

namespace {

/// One attack round pinned so exactly `h` forgeries arrive before the
/// genuine answer: four outstanding queries built in 0.3 ms, forgeries from
/// 1 ms on, genuine answer at 20 ms.
Scenario pinned_round(int tod, double bogus_rate, std::uint64_t seed) {
  Scenario s;
  s.seed = seed;
  s.duration = 10;
  s.workload.rate = 0;
  s.resolver.detector.tod = tod;
  s.resolver.max_identical_outstanding = 4;
  s.resolver.identities = IdentitySpace{64, 1024, 1, {"ns-a"}};
  AttackConfig a;
  a.rounds = 1;
  a.client_query_rate = 10000;
  a.bogus_response_rate = bogus_rate;
  a.arrivals = Arrivals::Deterministic;
  a.forge_offset = 0.001;
  s.attacker = a;
  return s;
}

}  // namespace

TEST_CASE("simulated round success agrees with the closed form at G = 64") {
  struct Case {
    int tod;
    double rate;
  };
  for (const auto c : {Case{3, 80.0}, Case{5, 180.0}}) {
    const int h = c.tod - 1;
    const std::size_t reps = 10000;
    const auto outcomes = replicate(reps, [&](std::size_t i) {
      const auto m = run(pinned_round(c.tod, c.rate, 1000 + i));
      REQUIRE(m.rounds.size() == 1);
      CHECK((m.rounds[0].success || m.rounds[0].forgeries >= h));
      CHECK(m.safety_violations == 0);
      return m.rounds[0].success ? 1 : 0;
    });
    double hits = 0;
    for (int o : outcomes) hits += o;
    const double expected = 1.0 - p_round_fail(h, 4, 64);
    const double sigma = std::sqrt(expected * (1 - expected) / reps);
    INFO("tod=" << c.tod << " measured=" << hits / reps << " expected=" << expected);
    CHECK(std::abs(hits / reps - expected) <= 3 * sigma);
  }
}

TEST_CASE("every client query ends exactly once and no forged record passes the defense") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 40; ++i) {
    Scenario s;
    s.seed = rng();
    s.duration = 300;
    s.workload.rate = 1 + static_cast<double>(rng() % 30);
    s.workload.names = 1 + static_cast<int>(rng() % 500);
    s.resolver.detector.tod = 2 + static_cast<int>(rng() % 4);
    s.resolver.priority_cache_enabled = rng() % 4 != 0;
    s.resolver.identities = IdentitySpace{static_cast<std::uint32_t>(16 + rng() % 64), 1024, 2, {"ns-a", "ns-b"}};
    s.ttl = TtlDistribution::constant(10 + static_cast<double>(rng() % 200));
    s.auth.updates = UpdateProcess::exponential(20 + static_cast<double>(rng() % 200));
    s.auth.chain_depth = static_cast<int>(rng() % 3);
    s.malformed_rate = static_cast<double>(rng() % 3);
    s.attacker->bogus_response_rate = 50 + static_cast<double>(rng() % 500);
    s.attacker->guess_strategy = rng() % 2 ? GuessStrategy::UniformRandom : GuessStrategy::SequentialSweep;
    Metrics m;
    CHECK_NOTHROW(m = run(s));  // conservation and causality are checked inside run()
    CHECK(m.answered + m.servfail == m.client_queries);
    CHECK(m.aware_path_poisonings == 0);
    CHECK(m.safety_violations == 0);
  }
}
