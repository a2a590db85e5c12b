#pragma once

#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "tdwn/dns_model.hpp"

namespace tdwn {

enum class CacheSource { FreshValidating, ProactiveUpdate };

std::string_view to_string(CacheSource source);

/// A validated RRset held in the priority tier.
struct CachedValidatedRecord {
  RecordKey key;
  std::vector<ResourceRecord> records;
  SimTime inserted_at = 0.0;
  SimTime expires_at = 0.0;
  CacheSource source = CacheSource::FreshValidating;

  std::vector<std::string> values() const;
};

struct CachedNormalRecord {
  RecordKey key;
  std::vector<ResourceRecord> records;
  SimTime inserted_at = 0.0;
  SimTime expires_at = 0.0;

  std::vector<std::string> values() const;
};

enum class NormalInsert { Inserted, BlockedByPriority };

enum class CacheTier { Priority, Normal };

struct CacheHit {
  CacheTier tier = CacheTier::Normal;
  std::vector<ResourceRecord> records;
  SimTime expires_at = 0.0;
};

struct ConsistencyResult {
  bool consistent = true;
  std::vector<RecordKey> conflicts;
};

/// Two-tier cache. Validated records live in the priority tier, overwrite
/// conflicting unsigned records in the normal tier, and cannot be displaced by
/// unsigned data until they expire or a newer validated RRset replaces them.
///
/// An entry is live while now < expires_at.
class TwoTierCache {
 public:
  /// Replaces the priority entry for the record's key. Throws
  /// std::invalid_argument for an unsigned record.
  void insert_validated(const ResourceRecord& record, SimTime now,
                        CacheSource source = CacheSource::FreshValidating);
  /// Groups by key; each group replaces the priority entry for that key.
  void insert_validated(std::span<const ResourceRecord> records, SimTime now,
                        CacheSource source = CacheSource::FreshValidating);

  NormalInsert insert_normal(const ResourceRecord& record, SimTime now);
  /// Inserts each key group; returns BlockedByPriority if any group was blocked.
  NormalInsert insert_normal(std::span<const ResourceRecord> records, SimTime now);

  ConsistencyResult check_consistency(std::span<const ResourceRecord> records, SimTime now) const;
  ConsistencyResult check_consistency(const ResponseMsg& resp, SimTime now) const {
    return check_consistency(resp.records, now);
  }

  /// Removes every entry with expires_at <= now from both tiers.
  std::size_t expire(SimTime now);

  /// Priority tier first, then normal.
  std::optional<CacheHit> lookup(const RecordKey& key, SimTime now) const;

  const CachedValidatedRecord* priority_entry(const RecordKey& key, SimTime now) const;
  const CachedNormalRecord* normal_entry(const RecordKey& key, SimTime now) const;

  std::vector<CachedValidatedRecord> priority_entries() const;
  std::vector<CachedNormalRecord> normal_entries() const;
  std::size_t priority_size() const { return priority_.size(); }
  std::size_t normal_size() const { return normal_.size(); }

 private:
  void note_expiry(SimTime at) { next_expiry_ = std::min(next_expiry_, at); }
  void insert_validated_group(const RecordKey& key, std::vector<ResourceRecord> group, SimTime now,
                              CacheSource source);
  NormalInsert insert_normal_group(const RecordKey& key, std::vector<ResourceRecord> group,
                                   SimTime now);

  std::unordered_map<RecordKey, CachedValidatedRecord, RecordKeyHash> priority_;
  std::unordered_map<RecordKey, CachedNormalRecord, RecordKeyHash> normal_;
  SimTime next_expiry_ = std::numeric_limits<SimTime>::infinity();
};

}  // namespace tdwn
