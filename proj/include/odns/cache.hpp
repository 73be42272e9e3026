// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <chrono>
#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>
#include <utility>

namespace odns {

// Expiry-aware LRU map. capacity 0 means unlimited. Entries expire at
// their own deadline; an expired entry is a miss and is dropped on lookup.
// Capacity overflow evicts the least-recently used entry regardless of
// its expiry state.
template <typename Key, typename Value, typename Hash = std::hash<Key>>
class TtlLruCache {
public:
  using TimePoint = std::chrono::steady_clock::time_point;

  struct Entry {
    Key key;
    Value value;
    TimePoint expires_at;
  };

  explicit TtlLruCache(std::size_t capacity = 0) : capacity_(capacity) {}

  std::size_t size() const { return map_.size(); }
  std::size_t capacity() const { return capacity_; }

  std::optional<Value> get(const Key& key, TimePoint now) {
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    if (it->second->expires_at <= now) {
      order_.erase(it->second);
      map_.erase(it);
      return std::nullopt;
    }
    order_.splice(order_.begin(), order_, it->second);
    return it->second->value;
  }

  // Inserts or refreshes. Returns the entry evicted for capacity, if any.
  std::optional<Entry> put(const Key& key, Value value, TimePoint expires_at) {
    auto it = map_.find(key);
    if (it != map_.end()) {
      it->second->value = std::move(value);
      it->second->expires_at = expires_at;
      order_.splice(order_.begin(), order_, it->second);
      return std::nullopt;
    }
    order_.push_front(Entry{key, std::move(value), expires_at});
    map_[key] = order_.begin();
    if (capacity_ > 0 && map_.size() > capacity_) {
      Entry victim = std::move(order_.back());
      map_.erase(victim.key);
      order_.pop_back();
      return victim;
    }
    return std::nullopt;
  }

  void clear() {
    map_.clear();
    order_.clear();
  }

private:
  std::size_t capacity_;
  std::list<Entry> order_;
  std::unordered_map<Key, typename std::list<Entry>::iterator, Hash> map_;
};

}  // namespace odns
