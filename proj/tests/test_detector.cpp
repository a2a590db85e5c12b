#include <doctest.h>

#include <stdexcept>

#include "tdwn/detector.hpp"

using namespace tdwn;

TEST_CASE("failure counting increments by one") {
  Detector det({3});
  const auto q = QuestionKey::make("asq50pn.foo.com");
  det.open(q, 0.0);
  CHECK(det.count(q) == 0);
  CHECK(det.record_failure(q, 0.1) == 1);
  CHECK(det.record_failure(q, 0.2) == 2);
  CHECK(det.count(q) == 2);
}

TEST_CASE("counter resets with the transaction") {
  Detector det({3});
  const auto q = QuestionKey::make("a.foo.com");
  det.open(q, 0.0);
  det.record_failure(q, 0.0);
  det.record_failure(q, 0.0);
  det.close(q);
  CHECK_FALSE(det.is_open(q));
  CHECK(det.count(q) == 0);
  det.open(q, 1.0);
  CHECK(det.record_failure(q, 1.0) == 1);
}

TEST_CASE("recording without an open transaction is rejected") {
  Detector det({3});
  CHECK_THROWS_AS(det.record_failure(QuestionKey::make("x.com"), 0.0), std::logic_error);
}

TEST_CASE("escalation threshold") {
  const auto q = QuestionKey::make("b.foo.com");
  Detector det({3});
  det.open(q, 0.0);
  det.record_failure(q, 0.0);
  det.record_failure(q, 0.0);
  CHECK_FALSE(det.should_escalate(q));
  det.record_failure(q, 0.0);
  CHECK(det.should_escalate(q));

  Detector one({1});
  one.open(q, 0.0);
  CHECK_FALSE(one.should_escalate(q));
  one.record_failure(q, 0.0);
  CHECK(one.should_escalate(q));
}

TEST_CASE("tod must be positive") {
  CHECK_THROWS(Detector({0}));
  CHECK(DetectorConfig{}.tod == 3);
}

TEST_CASE("escalation fires on exactly the tod-th failure") {
  for (int tod = 1; tod <= 6; ++tod) {
    Detector det({tod});
    const auto q = QuestionKey::make("c.foo.com");
    det.open(q, 0.0);
    int failures_before = 0;
    while (!det.should_escalate(q)) {
      det.record_failure(q, 0.0);
      ++failures_before;
    }
    CHECK(failures_before == tod);
  }
}
