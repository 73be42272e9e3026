// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.
//
// Operator diagnostics: per-operation crypto timings, query-name length
// analysis over a domain corpus, and recursive-resolver compatibility
// probing against a controlled echo observer.

#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "odns/net.hpp"
#include "odns/wire.hpp"

namespace odns::diag {

struct BenchRow {
  std::string op;
  double median_us = 0;
  double p95_us = 0;
};

// Times every cryptographic step of one query: session-key generation,
// domain seal/open, key wrap/unwrap, answer seal/open. iterations >= 100.
std::vector<BenchRow> bench_crypto(int iterations);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

struct QnameAnalysis {
  std::map<std::size_t, std::uint64_t> histogram;  // qname length -> count
  std::uint64_t total = 0;
  std::uint64_t oversize = 0;
  double oversize_fraction = 0;
};

// One domain per line; blank lines are skipped. Lengths come from the
// closed-form estimator; `oversize` counts entries beyond 252 chars.
QnameAnalysis analyze_qnames(const std::string& list_path, const wire::DnsName& suffix);

void write_qname_csv(std::ostream& out, const QnameAnalysis& analysis);

struct ProbeReport {
  bool forwards_ecs = false;
  bool applies_0x20 = false;
  bool strips_additional = false;
};

// Sends marker probe queries through `recursive` toward an echo observer
// authoritative for `observer_zone`, correlating by a nonce label. Throws
// ObserverUnreachable when the observer cannot be reached directly and
// ProbeTimeout when the probe through the recursive goes unanswered.
ProbeReport probe_recursive(const net::Endpoint& recursive, const net::Endpoint& observer,
                            const wire::DnsName& observer_zone,
                            std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));

}  // namespace odns::diag
