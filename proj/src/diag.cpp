// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "odns/diag.hpp"

#ifdef __linux__
#include <sched.h>
#endif

#include <algorithm>
#include <fstream>
#include <functional>
#include <ostream>

#include "odns/crypto.hpp"
#include "odns/encoding.hpp"
#include "odns/errors.hpp"
#include "odns/rng.hpp"

namespace odns::diag {

namespace {

double percentile(std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0;
  std::size_t idx = static_cast<std::size_t>(p * static_cast<double>(sorted.size() - 1));
  return sorted[idx];
}

BenchRow measure(const std::string& op, int iterations, const std::function<void()>& fn) {
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(iterations));
  for (int i = 0; i < iterations; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  std::sort(samples.begin(), samples.end());
  return BenchRow{op, percentile(samples, 0.5), percentile(samples, 0.95)};
}

void pin_to_one_cpu() {
#ifdef __linux__
  // Best effort; timer noise matters more than throughput here.
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(0, &set);
  sched_setaffinity(0, sizeof(set), &set);
#endif
}

}  // namespace

std::vector<BenchRow> bench_crypto(int iterations) {
  if (iterations < 100) throw ConfigError("iterations must be >= 100");
  pin_to_one_cpu();

  Rng& rng = system_rng();
  auto keypair = crypto::ResolverKeyPair::generate(rng);
  const std::string domain = "www.example.com";

  crypto::SessionKey session = crypto::generate_session_key(rng);
  crypto::SealedDomain sealed_domain = crypto::seal_domain(domain, session, rng);
  crypto::WrappedKey wrapped = crypto::wrap_key(session, keypair.public_key, rng);

  crypto::AnswerSet answers;
  answers.records.push_back(wire::ResourceRecord{wire::DnsName::from_presentation(domain),
                                                 wire::kTypeA, wire::kClassIn, 300,
                                                 wire::Bytes{93, 184, 216, 34}});
  crypto::SealedAnswer sealed_answer = crypto::seal_answer(answers, session, rng);

  std::vector<BenchRow> rows;
  rows.push_back(measure("session_key_generate", iterations,
                         [&] { crypto::generate_session_key(rng); }));
  rows.push_back(measure("seal_domain", iterations, [&] { crypto::seal_domain(domain, session, rng); }));
  rows.push_back(measure("wrap_key", iterations,
                         [&] { crypto::wrap_key(session, keypair.public_key, rng); }));
  rows.push_back(measure("unwrap_key", iterations,
                         [&] { crypto::unwrap_key(wrapped, keypair.secret_key); }));
  rows.push_back(measure("open_domain", iterations,
                         [&] { crypto::open_domain(sealed_domain, session); }));
  rows.push_back(measure("seal_answer", iterations, [&] { crypto::seal_answer(answers, session, rng); }));
  rows.push_back(measure("open_answer", iterations,
                         [&] { crypto::open_answer(sealed_answer, session); }));
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "op,median_us,p95_us\n";
  for (const auto& row : rows) out << row.op << ',' << row.median_us << ',' << row.p95_us << '\n';
}

QnameAnalysis analyze_qnames(const std::string& list_path, const wire::DnsName& suffix) {
  std::ifstream in(list_path);
  if (!in) throw FileNotFound(list_path);
  QnameAnalysis out;
  std::string line;
  std::size_t suffix_chars = suffix.presentation_length();
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::size_t length = crypto::estimate_qname_length(line.size(), suffix_chars);
    ++out.histogram[length];
    ++out.total;
    if (length > wire::kMaxNamePresentationLength) ++out.oversize;
  }
  if (out.total > 0) {
    out.oversize_fraction = static_cast<double>(out.oversize) / static_cast<double>(out.total);
  }
  return out;
}

void write_qname_csv(std::ostream& out, const QnameAnalysis& analysis) {
  out << "qname_length,count\n";
  for (const auto& [length, count] : analysis.histogram) out << length << ',' << count << '\n';
  out << "total," << analysis.total << '\n';
  out << "oversize," << analysis.oversize << '\n';
  out << "oversize_fraction," << analysis.oversize_fraction << '\n';
}

ProbeReport probe_recursive(const net::Endpoint& recursive, const net::Endpoint& observer,
                            const wire::DnsName& observer_zone, std::chrono::milliseconds timeout) {
  Rng& rng = system_rng();
  std::array<std::uint8_t, 6> nonce{};
  rng.fill(nonce);
  std::string nonce_text = encoding::hex_encode(nonce);

  auto probe_name = [&](const std::string& tag) {
    return wire::DnsName::from_labels({"probe-" + tag + "-" + nonce_text}).appended(observer_zone);
  };

  // Reachability check straight to the observer first.
  wire::DnsMessage direct = wire::make_query(rng.next_u16(), probe_name("direct"), wire::kTypeA);
  if (!net::udp_exchange(wire::encode_message(direct), observer, timeout)) {
    throw ObserverUnreachable(observer.to_string());
  }

  // The actual probe: lowercase name, no client-subnet option, plus a
  // marker record in the additional section to see whether it survives.
  wire::DnsMessage probe = wire::make_query(rng.next_u16(), probe_name("via"), wire::kTypeA);
  wire::ResourceRecord marker;
  marker.name = probe_name("via");
  marker.rtype = wire::kTypeTxt;
  marker.rclass = wire::kClassIn;
  marker.ttl = 0;
  marker.rdata = {1, 'm'};
  probe.additionals.push_back(std::move(marker));

  auto reply = net::udp_exchange(wire::encode_message(probe), recursive, timeout);
  if (!reply) throw ProbeTimeout("no answer through " + recursive.to_string());

  wire::DnsMessage response = wire::decode_message(*reply);
  for (const auto& rr : response.answers) {
    if (rr.rtype == wire::kTypeA && rr.rdata.size() == 4 && rr.rdata[0] == 127) {
      ProbeReport report;
      report.forwards_ecs = rr.rdata[1] != 0;
      report.applies_0x20 = rr.rdata[2] != 0;
      report.strips_additional = rr.rdata[3] == 0;
      return report;
    }
  }
  throw ProbeTimeout("observer answer missing from the response");
}

}  // namespace odns::diag
