// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.
//
// Trace-driven simulation of a recursive resolver cache under partial
// oblivious-DNS adoption. Clients flagged as ODNS users get unlimited stub
// caches and reach the recursive only with unique encrypted names; everyone
// else shares the recursive cache directly.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace odns::sim {

struct TraceRecord {
  double timestamp = 0;  // seconds, non-decreasing within a trace
  std::string client_id;
  std::string qname;  // lowercase
  std::uint16_t qtype = 1;
};

struct SimConfig {
  double odns_fraction = 0;            // in [0, 1]
  std::size_t recursive_cache_capacity = 0;  // entries; 0 = unlimited
  std::uint32_t assumed_ttl = 3600;    // seconds, applied to every entry
  std::uint64_t rng_seed = 1;          // fixes the client assignment
};

struct SimResult {
  std::uint64_t total_queries = 0;
  std::uint64_t queries_reaching_recursive = 0;
  std::uint64_t recursive_hits = 0;
  std::uint64_t recursive_misses = 0;
  std::uint64_t stub_hits = 0;
  std::uint64_t bad_ejections = 0;
  // Share of all capacity evictions where an ODNS insertion ejected a
  // conventional entry, in percent. 0 when nothing was evicted.
  double bad_ejection_percent = 0;
};

struct LoadedTrace {
  std::vector<TraceRecord> records;
  std::uint64_t skipped_lines = 0;
};

// CSV `timestamp,client_id,qname,qtype`, one record per line. Malformed
// lines are skipped and counted. Throws FileNotFound, EmptyTrace, or
// InvariantViolation when timestamps decrease.
LoadedTrace load_trace(const std::string& path);

// Deterministic: a client is an ODNS user iff its seeded hash falls below
// odns_fraction, so assignments nest as the fraction grows.
bool is_odns_client(std::string_view client_id, std::uint64_t seed, double fraction);

SimResult run_simulation(const std::vector<TraceRecord>& trace, const SimConfig& cfg);

struct SweepRow {
  SimConfig config;
  SimResult result;
};

// Cross product of fractions x capacities with a shared seed. Independent
// runs execute in parallel.
std::vector<SweepRow> sweep(const std::vector<TraceRecord>& trace, const std::vector<double>& fractions,
                            const std::vector<std::size_t>& capacities, std::uint32_t assumed_ttl,
                            std::uint64_t seed);

void write_results_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct TraceGenConfig {
  std::uint64_t clients = 10000;
  std::uint64_t queries = 1000000;
  double zipf_s = 1.0;          // domain popularity skew
  double client_zipf_s = 0.8;   // per-client activity skew
  std::uint64_t domain_pool = 100000;
  double duration_seconds = 604800;  // one week
  std::uint64_t seed = 1;
};

// Seeded synthetic trace: Zipf-popular domains from a fixed pool, clients
// with heterogeneous activity, timestamps spread uniformly.
std::vector<TraceRecord> generate_trace(const TraceGenConfig& cfg);

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);

}  // namespace odns::sim
