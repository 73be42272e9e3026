// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/sim.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <thread>
#include <ostream>
#include <random>
#include <sstream>

#include "odns/cache.hpp"
#include "odns/errors.hpp"

namespace odns::sim {

namespace {

// FNV-1a, folded with the seed; stable across platforms so that client
// assignments are reproducible anywhere.
std::uint64_t hash64(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull ^ (seed * 0x9e3779b97f4a7c15ull);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

struct CacheKey {
  std::string qname;
  std::uint16_t qtype;
  bool operator==(const CacheKey&) const = default;
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& k) const {
    return hash64(k.qname, k.qtype + 0x517cc1b7ull);
  }
};

struct CacheEntry {
  bool odns = false;
};

using SimClock = std::chrono::steady_clock;

SimClock::time_point at(double seconds) {
  return SimClock::time_point(std::chrono::duration_cast<SimClock::duration>(
      std::chrono::duration<double>(seconds)));
}

// Zipf sampler over ranks 1..n via inverse CDF lookup.
class ZipfSampler {
public:
  ZipfSampler(std::uint64_t n, double s) : cdf_(n) {
    double sum = 0;
    for (std::uint64_t r = 1; r <= n; ++r) sum += 1.0 / std::pow(static_cast<double>(r), s);
    double acc = 0;
    for (std::uint64_t r = 1; r <= n; ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r), s);
      cdf_[r - 1] = acc / sum;
    }
    cdf_.back() = 1.0;
  }

  std::uint64_t sample(double u) const {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint64_t>(it - cdf_.begin());  // 0-based rank
  }

private:
  std::vector<double> cdf_;
};

}  // namespace

LoadedTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  LoadedTrace out;
  std::string line;
  double last_ts = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view v(line);
    TraceRecord rec;
    std::size_t fields = 0;
    bool ok = true;
    std::size_t start = 0;
    for (; fields < 4; ++fields) {
      std::size_t comma = v.find(',', start);
      std::string_view field =
          v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      switch (fields) {
        case 0: {
          try {
            rec.timestamp = std::stod(std::string(field));
          } catch (...) {
            ok = false;
          }
          break;
        }
        case 1:
          rec.client_id = std::string(field);
          ok = ok && !rec.client_id.empty();
          break;
        case 2:
          rec.qname = std::string(field);
          ok = ok && !rec.qname.empty();
          break;
        case 3: {
          std::uint32_t t = 0;
          auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), t);
          ok = ok && ec == std::errc() && p == field.data() + field.size() && t <= 0xffff;
          rec.qtype = static_cast<std::uint16_t>(t);
          break;
        }
      }
      if (comma == std::string_view::npos) {
        ++fields;
        break;
      }
      start = comma + 1;
    }
    if (!ok || fields != 4) {
      ++out.skipped_lines;
      continue;
    }
    if (rec.timestamp < last_ts) {
      throw InvariantViolation("timestamps decrease at line with t=" + std::to_string(rec.timestamp));
    }
    last_ts = rec.timestamp;
    out.records.push_back(std::move(rec));
  }
  if (out.records.empty()) throw EmptyTrace(path);
  return out;
}

bool is_odns_client(std::string_view client_id, std::uint64_t seed, double fraction) {
  if (fraction <= 0) return false;
  if (fraction >= 1) return true;
  double u = static_cast<double>(hash64(client_id, seed)) / 18446744073709551616.0;  // 2^64
  return u < fraction;
}

SimResult run_simulation(const std::vector<TraceRecord>& trace, const SimConfig& cfg) {
  SimResult res;
  res.total_queries = trace.size();

  // Stub caches for ODNS clients only; unlimited by design.
  std::unordered_map<std::string, TtlLruCache<CacheKey, CacheEntry, CacheKeyHash>> stubs;
  TtlLruCache<CacheKey, CacheEntry, CacheKeyHash> recursive(cfg.recursive_cache_capacity);
  // Memoized client assignment; hashing each query would also work but
  // this keeps the inner loop cheap.
  std::unordered_map<std::string, bool> assignment;

  std::uint64_t evictions = 0;
  std::uint64_t odns_counter = 0;
  auto ttl = std::chrono::seconds(cfg.assumed_ttl);

  for (const auto& rec : trace) {
    auto now = at(rec.timestamp);
    auto [it, fresh] = assignment.try_emplace(rec.client_id, false);
    if (fresh) it->second = is_odns_client(rec.client_id, cfg.rng_seed, cfg.odns_fraction);

    CacheKey key{rec.qname, rec.qtype};
    if (it->second) {
      auto& stub = stubs[rec.client_id];
      if (stub.get(key, now)) {
        ++res.stub_hits;
        continue;
      }
      stub.put(key, CacheEntry{}, now + ttl);
      // The recursive sees a unique encrypted name: always a miss, and a
      // never-reusable entry if it caches at all.
      ++res.queries_reaching_recursive;
      ++res.recursive_misses;
      if (cfg.recursive_cache_capacity > 0) {
        CacheKey unique{"odns#" + std::to_string(odns_counter++), rec.qtype};
        if (auto victim = recursive.put(unique, CacheEntry{.odns = true}, now + ttl)) {
          ++evictions;
          if (!victim->value.odns) ++res.bad_ejections;
        }
      }
    } else {
      ++res.queries_reaching_recursive;
      if (recursive.get(key, now)) {
        ++res.recursive_hits;
      } else {
        ++res.recursive_misses;
        // A conventional insertion can evict too, but only an ODNS
        // insertion ejecting a conventional entry counts as "bad".
        if (recursive.put(key, CacheEntry{.odns = false}, now + ttl)) ++evictions;
      }
    }
  }

  res.bad_ejection_percent =
      evictions == 0 ? 0.0 : 100.0 * static_cast<double>(res.bad_ejections) / static_cast<double>(evictions);
  return res;
}

std::vector<SweepRow> sweep(const std::vector<TraceRecord>& trace, const std::vector<double>& fractions,
                            const std::vector<std::size_t>& capacities, std::uint32_t assumed_ttl,
                            std::uint64_t seed) {
  std::vector<SimConfig> configs;
  for (double f : fractions) {
    for (std::size_t cap : capacities) {
      configs.push_back(SimConfig{f, cap, assumed_ttl, seed});
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(configs.size());
  // Bounded parallelism: per-run state (stub caches in particular) can be
  // sizable on large traces.
  std::size_t batch = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8));
  for (std::size_t base = 0; base < configs.size(); base += batch) {
    std::vector<std::future<SimResult>> futures;
    for (std::size_t i = base; i < std::min(base + batch, configs.size()); ++i) {
      futures.push_back(std::async(std::launch::async,
                                   [&trace, cfg = configs[i]] { return run_simulation(trace, cfg); }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) {
      rows.push_back(SweepRow{configs[base + i], futures[i].get()});
    }
  }
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "odns_fraction,capacity,assumed_ttl,seed,total_queries,queries_reaching_recursive,"
         "recursive_hits,recursive_misses,stub_hits,bad_ejections,bad_ejection_percent\n";
  for (const auto& row : rows) {
    out << row.config.odns_fraction << ',' << row.config.recursive_cache_capacity << ','
        << row.config.assumed_ttl << ',' << row.config.rng_seed << ',' << row.result.total_queries << ','
        << row.result.queries_reaching_recursive << ',' << row.result.recursive_hits << ','
        << row.result.recursive_misses << ',' << row.result.stub_hits << ',' << row.result.bad_ejections
        << ',' << row.result.bad_ejection_percent << '\n';
  }
}

std::vector<TraceRecord> generate_trace(const TraceGenConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ZipfSampler domains(cfg.domain_pool, cfg.zipf_s);
  ZipfSampler clients(cfg.clients, cfg.client_zipf_s);

  // Shuffle client identities so that activity rank and id are unrelated.
  std::vector<std::uint64_t> client_ids(cfg.clients);
  for (std::uint64_t i = 0; i < cfg.clients; ++i) client_ids[i] = i;
  std::shuffle(client_ids.begin(), client_ids.end(), rng);

  std::vector<double> times(cfg.queries);
  for (auto& t : times) t = unit(rng) * cfg.duration_seconds;
  std::sort(times.begin(), times.end());

  std::vector<TraceRecord> out;
  out.reserve(cfg.queries);
  for (std::uint64_t i = 0; i < cfg.queries; ++i) {
    TraceRecord rec;
    rec.timestamp = times[i];
    rec.client_id = "c" + std::to_string(client_ids[clients.sample(unit(rng))]);
    rec.qname = "d" + std::to_string(domains.sample(unit(rng))) + ".example.com";
    rec.qtype = 1;
    out.push_back(std::move(rec));
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  for (const auto& rec : trace) {
    out << rec.timestamp << ',' << rec.client_id << ',' << rec.qname << ',' << rec.qtype << '\n';
  }
}

}  // namespace odns::sim
