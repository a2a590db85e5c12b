#include <doctest.h>

#include <stdexcept>

#include "tdwn/priority_cache.hpp"

using namespace tdwn;

namespace {

ResourceRecord ns(std::string value, double ttl = 36000.0, bool is_signed = false) {
  return ResourceRecord("ns.foo.com", RrType::A, std::move(value), ttl, is_signed, true);
}

const RecordKey kNs{"ns.foo.com.", RrType::A};

}  // namespace

TEST_CASE("validated insert evicts a conflicting normal entry") {
  TwoTierCache cache;
  CHECK(cache.insert_normal(ns("Y.Y.Y.Y"), 0.0) == NormalInsert::Inserted);
  cache.insert_validated(ns("X.X.X.X", 36000.0, true), 1.0);
  CHECK(cache.normal_entry(kNs, 1.0) == nullptr);
  const auto* p = cache.priority_entry(kNs, 1.0);
  REQUIRE(p != nullptr);
  CHECK(p->values() == std::vector<std::string>{"X.X.X.X"});
  CHECK(p->expires_at == doctest::Approx(36001.0));
}

TEST_CASE("newer validated record replaces the priority entry") {
  TwoTierCache cache;
  cache.insert_validated(ns("X.X.X.X", 100.0, true), 0.0);
  cache.insert_validated(ns("X2", 100.0, true), 50.0, CacheSource::ProactiveUpdate);
  const auto* p = cache.priority_entry(kNs, 60.0);
  REQUIRE(p != nullptr);
  CHECK(p->values() == std::vector<std::string>{"X2"});
  CHECK(p->expires_at == doctest::Approx(150.0));
  CHECK(p->source == CacheSource::ProactiveUpdate);
  CHECK(cache.priority_size() == 1);
}

TEST_CASE("insert into empty caches") {
  TwoTierCache cache;
  cache.insert_validated(ns("X.X.X.X", 10.0, true), 0.0);
  CHECK(cache.priority_size() == 1);
  CHECK(cache.normal_size() == 0);
}

TEST_CASE("unsigned records are rejected by the priority tier") {
  TwoTierCache cache;
  CHECK_THROWS_AS(cache.insert_validated(ns("X.X.X.X"), 0.0), std::invalid_argument);
}

TEST_CASE("normal inserts against the priority tier") {
  TwoTierCache cache;
  cache.insert_validated(ns("X.X.X.X", 100.0, true), 0.0);
  CHECK(cache.insert_normal(ns("Y.Y.Y.Y"), 1.0) == NormalInsert::BlockedByPriority);
  CHECK(cache.insert_normal(ns("X.X.X.X"), 1.0) == NormalInsert::Inserted);
  CHECK(cache.insert_normal(ResourceRecord("other.foo.com", RrType::A, "Q", 10, false, true), 1.0) ==
        NormalInsert::Inserted);
  // Once the priority entry lapses the unsigned value goes in.
  CHECK(cache.insert_normal(ns("Y.Y.Y.Y"), 100.0) == NormalInsert::Inserted);
}

TEST_CASE("consistency check") {
  TwoTierCache cache;
  cache.insert_validated(ns("X.X.X.X", 100.0, true), 0.0);
  CHECK(cache.check_consistency(std::vector{ns("X.X.X.X")}, 1.0).consistent);
  const auto conflict = cache.check_consistency(
      std::vector{ResourceRecord("a.foo.com", RrType::A, "W", 10, false, true), ns("Y.Y.Y.Y")}, 1.0);
  CHECK_FALSE(conflict.consistent);
  REQUIRE(conflict.conflicts.size() == 1);
  CHECK(conflict.conflicts[0] == kNs);
  CHECK(cache.check_consistency(std::vector{ns("Y.Y.Y.Y")}, 100.0).consistent);
}

TEST_CASE("expiry") {
  TwoTierCache cache;
  cache.insert_validated(ns("X.X.X.X", 36000.0, true), 5.0);
  CHECK(cache.expire(36004.9) == 0);
  CHECK(cache.expire(36005.0) == 1);
  CHECK(cache.priority_size() == 0);

  cache.insert_normal(ResourceRecord("a.foo.com", RrType::A, "1", 10, false, true), 0.0);
  cache.insert_normal(ResourceRecord("b.foo.com", RrType::A, "1", 30, false, true), 0.0);
  CHECK(cache.expire(20.0) == 1);
  CHECK(cache.normal_size() == 1);
}

TEST_CASE("lookup consults the priority tier first") {
  TwoTierCache cache;
  cache.insert_normal(ResourceRecord("a.foo.com", RrType::A, "1", 10, false, true), 0.0);
  auto hit = cache.lookup({"a.foo.com.", RrType::A}, 1.0);
  REQUIRE(hit);
  CHECK(hit->tier == CacheTier::Normal);
  cache.insert_validated(ResourceRecord("a.foo.com", RrType::A, "1", 10, true, true), 2.0);
  hit = cache.lookup({"a.foo.com.", RrType::A}, 3.0);
  REQUIRE(hit);
  CHECK(hit->tier == CacheTier::Priority);
  CHECK_FALSE(cache.lookup({"a.foo.com.", RrType::A}, 12.0));
}
