#include "tdwn/priority_cache.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace tdwn {

namespace {

template <class Entry>
std::vector<std::string> sorted_values(const Entry& entry) {
  std::vector<std::string> out;
  out.reserve(entry.records.size());
  for (const auto& r : entry.records) out.push_back(r.value());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::map<RecordKey, std::vector<ResourceRecord>> group_by_key(
    std::span<const ResourceRecord> records) {
  std::map<RecordKey, std::vector<ResourceRecord>> groups;
  for (const auto& r : records) groups[r.key()].push_back(r);
  return groups;
}

double min_ttl(const std::vector<ResourceRecord>& group) {
  double ttl = group.front().ttl();
  for (const auto& r : group) ttl = std::min(ttl, r.ttl());
  return ttl;
}

template <class Map>
std::vector<typename Map::mapped_type> sorted_entries(const Map& map) {
  std::vector<typename Map::mapped_type> out;
  out.reserve(map.size());
  for (const auto& [key, entry] : map) out.push_back(entry);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  return out;
}

}  // namespace

std::string_view to_string(CacheSource source) {
  return source == CacheSource::FreshValidating ? "fresh" : "proactive";
}

std::vector<std::string> CachedValidatedRecord::values() const { return sorted_values(*this); }
std::vector<std::string> CachedNormalRecord::values() const { return sorted_values(*this); }

void TwoTierCache::insert_validated(const ResourceRecord& record, SimTime now, CacheSource source) {
  insert_validated(std::span<const ResourceRecord>(&record, 1), now, source);
}

void TwoTierCache::insert_validated(std::span<const ResourceRecord> records, SimTime now,
                                    CacheSource source) {
  for (const auto& r : records)
    if (!r.is_signed()) throw std::invalid_argument("unvalidated record " + r.key().str());
  for (auto& [key, group] : group_by_key(records))
    insert_validated_group(key, std::move(group), now, source);
}

void TwoTierCache::insert_validated_group(const RecordKey& key, std::vector<ResourceRecord> group,
                                          SimTime now, CacheSource source) {
  CachedValidatedRecord entry{key, std::move(group), now, 0.0, source};
  entry.expires_at = now + min_ttl(entry.records);
  const auto values = entry.values();
  if (auto it = normal_.find(key); it != normal_.end() && it->second.values() != values)
    normal_.erase(it);
  note_expiry(entry.expires_at);
  priority_.insert_or_assign(key, std::move(entry));
}

NormalInsert TwoTierCache::insert_normal(const ResourceRecord& record, SimTime now) {
  return insert_normal(std::span<const ResourceRecord>(&record, 1), now);
}

NormalInsert TwoTierCache::insert_normal(std::span<const ResourceRecord> records, SimTime now) {
  NormalInsert result = NormalInsert::Inserted;
  for (auto& [key, group] : group_by_key(records))
    if (insert_normal_group(key, std::move(group), now) == NormalInsert::BlockedByPriority)
      result = NormalInsert::BlockedByPriority;
  return result;
}

NormalInsert TwoTierCache::insert_normal_group(const RecordKey& key,
                                               std::vector<ResourceRecord> group, SimTime now) {
  CachedNormalRecord entry{key, std::move(group), now, 0.0};
  entry.expires_at = now + min_ttl(entry.records);
  if (const auto* prio = priority_entry(key, now); prio && prio->values() != entry.values())
    return NormalInsert::BlockedByPriority;
  note_expiry(entry.expires_at);
  normal_.insert_or_assign(key, std::move(entry));
  return NormalInsert::Inserted;
}

ConsistencyResult TwoTierCache::check_consistency(std::span<const ResourceRecord> records,
                                                  SimTime now) const {
  ConsistencyResult result;
  for (const auto& [key, values] : value_sets(records)) {
    const auto* prio = priority_entry(key, now);
    if (prio && prio->values() != values) {
      result.consistent = false;
      result.conflicts.push_back(key);
    }
  }
  return result;
}

std::size_t TwoTierCache::expire(SimTime now) {
  if (now < next_expiry_) return 0;
  std::size_t evicted = 0;
  next_expiry_ = std::numeric_limits<SimTime>::infinity();
  evicted += std::erase_if(priority_, [&](const auto& kv) { return kv.second.expires_at <= now; });
  evicted += std::erase_if(normal_, [&](const auto& kv) { return kv.second.expires_at <= now; });
  for (const auto& [k, e] : priority_) note_expiry(e.expires_at);
  for (const auto& [k, e] : normal_) note_expiry(e.expires_at);
  return evicted;
}

std::optional<CacheHit> TwoTierCache::lookup(const RecordKey& key, SimTime now) const {
  if (const auto* p = priority_entry(key, now)) return CacheHit{CacheTier::Priority, p->records, p->expires_at};
  if (const auto* n = normal_entry(key, now)) return CacheHit{CacheTier::Normal, n->records, n->expires_at};
  return std::nullopt;
}

const CachedValidatedRecord* TwoTierCache::priority_entry(const RecordKey& key, SimTime now) const {
  auto it = priority_.find(key);
  if (it == priority_.end() || it->second.expires_at <= now) return nullptr;
  return &it->second;
}

const CachedNormalRecord* TwoTierCache::normal_entry(const RecordKey& key, SimTime now) const {
  auto it = normal_.find(key);
  if (it == normal_.end() || it->second.expires_at <= now) return nullptr;
  return &it->second;
}

std::vector<CachedValidatedRecord> TwoTierCache::priority_entries() const {
  return sorted_entries(priority_);
}

std::vector<CachedNormalRecord> TwoTierCache::normal_entries() const {
  return sorted_entries(normal_);
}

}  // namespace tdwn
