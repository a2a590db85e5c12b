#include <doctest.h>

#include <stdexcept>

#include <sstream>

#include "tdwn/sim_engine.hpp"

using namespace tdwn;

namespace {

const RecordKey kNs{"ns.foo.com.", RrType::A};

/// One scripted attack round: 20 outstanding queries and deterministic
/// forgeries 1 ms apart, so the detector trips on the third forgery.
Scenario fig2_scenario() {
  Scenario s;
  s.workload.rate = 0;
  s.duration = 200000;
  AttackConfig a;
  a.rounds = 1;
  a.arrivals = Arrivals::Deterministic;
  a.bogus_response_rate = 1000;
  a.forge_offset = 0.001;
  s.attacker = a;
  return s;
}

}  // namespace

TEST_CASE("event queue orders by time then insertion") {
  EventQueue q;
  q.push(2.0, EventKind::Timeout, TimeoutEvent{1});
  q.push(1.0, EventKind::Timeout, TimeoutEvent{2});
  q.push(1.0, EventKind::Timeout, TimeoutEvent{3});
  CHECK(std::get<TimeoutEvent>(q.pop().payload).tx == 2);
  CHECK(std::get<TimeoutEvent>(q.pop().payload).tx == 3);
  CHECK(std::get<TimeoutEvent>(q.pop().payload).tx == 1);
  CHECK(q.empty());
}

TEST_CASE("snapshot at time zero is empty") {
  Simulator sim(fig2_scenario());
  const auto snap = sim.snapshot();
  CHECK(snap.priority.empty());
  CHECK(snap.normal.empty());
  CHECK(snap.transactions.empty());
}

TEST_CASE("attack-free day issues no DNSSEC-aware queries") {
  Scenario s;
  s.attacker.reset();
  s.duration = 3600;
  const auto m = run(s);
  CHECK(m.client_queries == 360000);
  CHECK(m.dnssec_queries_issued == 0);
  CHECK(m.answered == m.client_queries);
  CHECK(m.servfail == 0);
}

TEST_CASE("escalation walkthrough leaves the genuine address in the priority tier") {
  std::ostringstream log;
  Simulator sim(fig2_scenario(), &log);
  sim.advance_to(1.0);
  const auto snap = sim.snapshot();
  const auto* entry = snap.priority_entry(kNs);
  REQUIRE(entry != nullptr);
  CHECK(entry->values() == std::vector<std::string>{"X.X.X.X"});
  CHECK(snap.transactions.empty());

  const auto& m = sim.metrics();
  CHECK(m.escalations == 1);
  CHECK(m.dnssec_queries_issued == 2);  // escalation plus one chain fetch
  CHECK(m.poisoning_successes == 0);
  REQUIRE(m.rounds.size() == 1);
  CHECK(m.rounds[0].escalated);
  CHECK_FALSE(m.rounds[0].success);
  CHECK(m.rounds[0].outstanding == 20);

  const std::string text = log.str();
  CHECK(text.find("\tmode\t") != std::string::npos);
  CHECK(text.find("needs-chain") != std::string::npos);
  CHECK(text.find("\tresolved\t") != std::string::npos);

  // After the lifecycle runs out the priority tier is empty.
  sim.advance_to(36000.0 + 1.0);
  CHECK(sim.snapshot().priority.empty());
  sim.run();
}

TEST_CASE("rounds wait for the protecting record, extended by a proactive update") {
  Scenario s = fig2_scenario();
  s.attacker->rounds = 2;
  Simulator sim(s);
  sim.advance_to(1.0);
  const auto* first = sim.snapshot().priority_entry(kNs);
  REQUIRE(first != nullptr);
  const double inserted = first->inserted_at;

  // The zone changes 5 h later; a client then asks for a fresh name whose
  // answer carries the new address, conflicts, times out and triggers a
  // proactive update that renews the protecting record.
  sim.inject_auth_update(inserted + 5 * 3600.0);
  sim.inject_client_query(inserted + 5 * 3600.0 + 1.0, QuestionKey::make("fresh.foo.com"));
  sim.run();

  const auto& m = sim.metrics();
  CHECK(m.proactive_updates == 1);
  REQUIRE(m.rounds.size() == 2);
  CHECK(m.rounds[1].start >= inserted + 5 * 3600.0 + 36000.0);
}

TEST_CASE("without the priority cache rounds repeat back to back") {
  Scenario s = fig2_scenario();
  s.resolver.priority_cache_enabled = false;
  s.attacker->rounds = 5;
  const auto m = run(s);
  REQUIRE(m.rounds.size() == 5);
  for (std::size_t i = 1; i < m.rounds.size(); ++i) CHECK(m.rounds[i].start - m.rounds[i - 1].end < 1e-9);
  CHECK(m.rounds.back().end < 5.0);
}

TEST_CASE("same seed gives a byte-identical log and metrics") {
  Scenario s;
  s.duration = 600;
  s.resolver.identities = IdentitySpace{64, 1024, 4, {"ns-a"}};
  s.malformed_rate = 0.5;
  s.auth.updates = UpdateProcess::exponential(200);
  std::ostringstream a, b;
  const auto ma = run(s, &a);
  const auto mb = run(s, &b);
  CHECK(a.str() == b.str());
  CHECK(ma.to_csv() == mb.to_csv());
  CHECK(ma.rounds_csv() == mb.rounds_csv());
  s.seed = 2;
  std::ostringstream c;
  run(s, &c);
  CHECK(c.str() != a.str());
}

TEST_CASE("small guess space lets oblivious-mode guesses succeed, never past the defense") {
  Scenario s;
  s.duration = 3600;
  s.workload.rate = 10;
  s.resolver.identities = IdentitySpace{16, 1024, 2, {"ns-a"}};  // 32 identities
  s.resolver.priority_cache_enabled = false;
  s.attacker->rounds = 300;
  const auto m = run(s);
  CHECK(m.poisoning_successes > 0);
  CHECK(m.round_successes() > 0);
  CHECK(m.aware_path_poisonings == 0);
  CHECK(m.safety_violations == 0);
  CHECK(m.answered + m.servfail == m.client_queries);
}

TEST_CASE("malformed background responses can trip the detector") {
  Scenario s;
  s.attacker.reset();
  s.duration = 600;
  s.workload.rate = 200;
  s.workload.names = 100000;
  s.malformed_rate = 50;
  s.resolver.detector.tod = 1;
  const auto m = run(s);
  CHECK(m.failures_counted > 0);
  CHECK(m.dnssec_queries_issued > 0);
  CHECK(m.safety_violations == 0);
}

TEST_CASE("authoritative cap drops excess queries silently") {
  Scenario s;
  s.attacker.reset();
  s.duration = 10;
  s.workload.rate = 1000;
  s.workload.names = 100000;
  s.auth.outstanding_cap = 5;
  const auto m = run(s);
  CHECK(m.dropped_by_auth > 0);
  CHECK(m.servfail > 0);
  CHECK(m.answered + m.servfail == m.client_queries);
}

TEST_CASE("responses respect the response time and the serving rate") {
  Scenario s;
  s.attacker.reset();
  s.workload.rate = 0;
  s.duration = 10;
  Simulator sim(s);
  sim.inject_client_query(1.0, QuestionKey::make("a.foo.com"));
  sim.inject_client_query(1.0, QuestionKey::make("b.foo.com"));
  sim.advance_to(1.0 + 0.02 - 1e-9);
  CHECK(sim.snapshot().normal.empty());
  sim.advance_to(1.02);
  CHECK(sim.snapshot().normal.size() == 2);  // host and glue of the first answer
  sim.advance_to(1.03);
  CHECK(sim.snapshot().normal.size() == 3);
  sim.run();
}

TEST_CASE("malformed scenarios are rejected before anything runs") {
  Scenario s;
  s.duration = 0;
  CHECK_THROWS(Simulator(s));
  s = {};
  s.attacker->target_domain = "bar.com";
  CHECK_THROWS(Simulator(s));
  s = {};
  s.auth.response_time = 0;
  CHECK_THROWS(Simulator(s));
}

TEST_CASE("metrics export") {
  Metrics m;
  m.dnssec_trigger_times = {10, 20, 40};
  CHECK(m.dnssec_interval_mean() == doctest::Approx(15));
  const auto csv = m.to_csv();
  CHECK(csv.rfind("key,value\n", 0) == 0);
  CHECK(csv.find("dnssec_interval_mean_s,15\n") != std::string::npos);
  CHECK(csv.find("first_success_s,none\n") != std::string::npos);
}

TEST_CASE("a slow attacker still sends one query per round") {
  Scenario s = fig2_scenario();
  s.attacker->client_query_rate = 10;  // 10 qps x 0.02 s rounds down to zero
  s.attacker->rounds = 3;
  s.resolver.priority_cache_enabled = false;
  s.duration = 60;
  const auto m = run(s);
  REQUIRE(m.rounds.size() == 3);
  for (const auto& r : m.rounds) CHECK(r.outstanding == 1);
}
