#include "tdwn/detector.hpp"

#include <stdexcept>

namespace tdwn {

void DetectorConfig::validate() const {
  if (tod < 1) throw std::invalid_argument("tod must be at least 1");
}

Detector::Detector(DetectorConfig config) : config_(config) { config_.validate(); }

void Detector::open(const QuestionKey& question, SimTime now) {
  counters_.insert_or_assign(question, FailureCounter{question, 0, now});
}

void Detector::close(const QuestionKey& question) { counters_.erase(question); }

bool Detector::is_open(const QuestionKey& question) const { return counters_.contains(question); }

int Detector::record_failure(const QuestionKey& question, SimTime /*now*/) {
  auto it = counters_.find(question);
  if (it == counters_.end())
    throw std::logic_error("failure recorded for " + question.str() + " with no outstanding query");
  return ++it->second.count;
}

bool Detector::should_escalate(const QuestionKey& question) const {
  return count(question) >= config_.tod;
}

int Detector::count(const QuestionKey& question) const {
  auto it = counters_.find(question);
  return it == counters_.end() ? 0 : it->second.count;
}

}  // namespace tdwn
