#pragma once

#include <unordered_map>

#include "tdwn/dns_model.hpp"

namespace tdwn {

struct DetectorConfig {
  /// Threshold of defense: failure responses per question before escalation.
  int tod = 3;

  void validate() const;
};

struct FailureCounter {
  QuestionKey question;
  int count = 0;
  SimTime window_started_at = 0.0;
};

/// Per-question failure-response counting. A counter lives exactly as long as
/// the resolution transaction for its question.
class Detector {
 public:
  explicit Detector(DetectorConfig config);

  const DetectorConfig& config() const { return config_; }

  void open(const QuestionKey& question, SimTime now);
  void close(const QuestionKey& question);
  bool is_open(const QuestionKey& question) const;

  /// Throws std::logic_error when no transaction is open for the question.
  int record_failure(const QuestionKey& question, SimTime now);

  bool should_escalate(const QuestionKey& question) const;
  int count(const QuestionKey& question) const;

 private:
  DetectorConfig config_;
  std::unordered_map<QuestionKey, FailureCounter, QuestionKeyHash> counters_;
};

}  // namespace tdwn
