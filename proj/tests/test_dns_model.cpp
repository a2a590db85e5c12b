#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "tdwn/dns_model.hpp"

using namespace tdwn;

namespace {

std::vector<OutstandingQuery> identical_outstanding(const QuestionKey& q, int n) {
  std::vector<OutstandingQuery> out;
  for (int i = 0; i < n; ++i)
    out.push_back({q, QueryIdentity{static_cast<std::uint32_t>(100 + i), 5000u + i, "ns-a"}, 0.0});
  return out;
}

}  // namespace

TEST_CASE("normalize_qname folds case and adds the root dot") {
  CHECK(normalize_qname("Foo.COM") == "foo.com.");
  CHECK(normalize_qname("foo.com.") == "foo.com.");
  CHECK(normalize_qname(normalize_qname("A.b.C")) == normalize_qname("A.b.C"));
  CHECK_THROWS_AS(normalize_qname("a..com"), std::invalid_argument);
  CHECK_THROWS_AS(normalize_qname(""), std::invalid_argument);
  CHECK_THROWS_AS(normalize_qname("."), std::invalid_argument);
  CHECK_THROWS_AS(normalize_qname(".foo.com"), std::invalid_argument);
}

TEST_CASE("question key string form") {
  CHECK(QuestionKey::make("Foo.com").str() == "foo.com./A/IN");
  CHECK(QuestionKey::make("foo.com", RrType::DNSKEY).str() == "foo.com./DNSKEY/IN");
}

TEST_CASE("match_response: genuine, failure and unrelated") {
  const auto q = QuestionKey::make("asq50pn.foo.com");
  const auto outstanding = identical_outstanding(q, 20);

  SUBCASE("exact identity of one of 20 outstanding queries") {
    ResponseMsg resp{q, outstanding[7].identity, {}, false};
    const auto m = match_response(resp, outstanding);
    CHECK(m.kind == MatchKind::GenuineMatch);
    CHECK(m.index == 7);
  }
  SUBCASE("txid off by one against every outstanding query") {
    // 100..119 are used; 120 is one past the last.
    ResponseMsg resp{q, QueryIdentity{120, outstanding[19].identity.port, "ns-a"}, {}, false};
    CHECK(match_response(resp, outstanding).kind == MatchKind::FailureAttempt);
  }
  SUBCASE("wrong server address only") {
    auto id = outstanding[3].identity;
    id.server_addr = "ns-b";
    CHECK(match_response({q, id, {}, false}, outstanding).kind == MatchKind::FailureAttempt);
  }
  SUBCASE("other question") {
    ResponseMsg resp{QuestionKey::make("other.example"), outstanding[0].identity, {}, false};
    CHECK(match_response(resp, outstanding).kind == MatchKind::Unrelated);
  }
  SUBCASE("every one of the 20 identities is accepted") {
    for (const auto& o : outstanding)
      CHECK(match_response({q, o.identity, {}, false}, outstanding).kind == MatchKind::GenuineMatch);
  }
}

TEST_CASE("match_response does not depend on outstanding order") {
  const auto q = QuestionKey::make("x.foo.com");
  auto outstanding = identical_outstanding(q, 10);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    ResponseMsg resp{q, QueryIdentity{static_cast<std::uint32_t>(95 + trial % 20), 5000u + trial % 12, "ns-a"}, {}, false};
    const auto before = match_response(resp, outstanding).kind;
    std::shuffle(outstanding.begin(), outstanding.end(), rng);
    CHECK(match_response(resp, outstanding).kind == before);
  }
}

TEST_CASE("identity space enumerates every identity exactly once") {
  IdentitySpace space{4, 1024, 3, {"a", "b"}};
  CHECK(space.size() == 24);
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < space.size(); ++i) {
    const auto id = space.at(i);
    CHECK(id.txid < 4);
    CHECK(id.port >= 1024);
    CHECK(id.port < 1027);
    REQUIRE(space.index_of(id).has_value());
    CHECK(*space.index_of(id) == i);
    seen.insert(i);
  }
  CHECK(seen.size() == 24);
  CHECK_FALSE(space.contains({4, 1024, "a"}));
  CHECK_FALSE(space.contains({0, 1024, "c"}));
  CHECK_THROWS(space.at(24));
}

TEST_CASE("default identity space ranges") {
  IdentitySpace space;
  CHECK(space.id_space == 65536);
  CHECK(space.port_space == 64000);
  CHECK(space.port_min == 1024);
  const auto last = space.at(space.size() - 1);
  CHECK(last.txid == 65535);
  CHECK(last.port == 1024 + 64000 - 1);
}

TEST_CASE("guess space forms") {
  CHECK(guess_space_size(65536, 64000, 2.5, GuessForm::Additive) == 323840);
  CHECK(guess_space_size(65536, 64000, 2.5, GuessForm::Product) == 10485760000ULL);
  CHECK(guess_space_size(64, 1, 1.0, GuessForm::Product) == 64);
  CHECK_THROWS(guess_space_size(0, 1, 1.0, GuessForm::Additive));
}

TEST_CASE("resource records") {
  ResourceRecord r("NS.Foo.com", RrType::A, "X.X.X.X", 10.0, false, true);
  CHECK(r.owner() == "ns.foo.com.");
  CHECK_FALSE(r.is_signed());
  CHECK(r.with_signature().is_signed());
  CHECK(GroundTruth::is_authentic(r.with_signature()));
  CHECK_THROWS_AS(ResourceRecord("a.com", RrType::A, "v", 0.0, false, true), std::invalid_argument);
}

TEST_CASE("validation oracle") {
  const ResourceRecord good("foo.com", RrType::A, "X.X.X.X", 10, true, true);
  const ResourceRecord unsigned_ns("ns.foo.com", RrType::A, "X.X.X.X", 10, false, true);
  const ResourceRecord forged_signed("foo.com", RrType::A, "Y.Y.Y.Y", 10, true, false);

  CHECK(ValidationOracle::validate(std::vector{good}).status == ValidationStatus::Valid);
  const auto missing = ValidationOracle::validate(std::vector{good, unsigned_ns});
  CHECK(missing.status == ValidationStatus::MissingSignature);
  REQUIRE(missing.missing.has_value());
  CHECK(missing.missing->str() == "ns.foo.com./A");
  CHECK(ValidationOracle::validate(std::vector{unsigned_ns, forged_signed}).status == ValidationStatus::Bogus);
}

TEST_CASE("value_sets groups and sorts") {
  std::vector<ResourceRecord> rs{{"b.com", RrType::A, "2", 1, false, true},
                                 {"a.com", RrType::A, "9", 1, false, true},
                                 {"b.com", RrType::A, "1", 1, false, true},
                                 {"b.com", RrType::A, "2", 1, false, true}};
  const auto sets = value_sets(rs);
  REQUIRE(sets.size() == 2);
  CHECK(sets[0].first.owner == "a.com.");
  CHECK(sets[1].second == std::vector<std::string>{"1", "2"});
}

TEST_CASE("uniform forged guess hits D of G identities at rate D/G") {
  // Monte Carlo oracle for the per-attempt probability.
  IdentitySpace space{16, 1024, 4, {"s"}};  // G = 64
  const auto q = QuestionKey::make("r.foo.com");
  std::vector<OutstandingQuery> outstanding;
  for (std::uint64_t i = 0; i < 8; ++i) outstanding.push_back({q, space.at(i * 7), 0.0});
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> pick(0, space.size() - 1);
  const int trials = 200000;
  int hits = 0;
  for (int t = 0; t < trials; ++t)
    hits += match_response({q, space.at(pick(rng)), {}, false}, outstanding).kind == MatchKind::GenuineMatch;
  const double p = 8.0 / 64.0;
  const double sigma = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(static_cast<double>(hits) / trials - p) < 3 * sigma);
}
