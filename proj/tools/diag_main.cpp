// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "odns/diag.hpp"
#include "odns/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Oblivious DNS diagnostics"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "time each cryptographic operation");
  int iters = 1000;
  std::string bench_out;
  bench->add_option("--iters", iters, "iterations per operation (>= 100)");
  bench->add_option("--out", bench_out, "output CSV (stdout when omitted)");

  auto* qnames = app.add_subcommand("qnames", "encrypted query-name length analysis");
  std::string list_path, qname_suffix = "obliviousdns.com", qname_out;
  qnames->add_option("--list", list_path, "file with one domain per line")->required();
  qnames->add_option("--suffix", qname_suffix, "ODNS zone suffix");
  qnames->add_option("--out", qname_out, "output CSV (stdout when omitted)");

  auto* probe = app.add_subcommand("probe", "probe a recursive for ODNS compatibility");
  std::string recursive_addr, observer_addr, observer_zone = "observer.test";
  probe->add_option("--recursive", recursive_addr, "recursive resolver to probe (ip:port)")->required();
  probe->add_option("--observer", observer_addr,
                    "echo observer address (odns-resolver --echo-observer)")->required();
  probe->add_option("--zone", observer_zone, "zone the probe queries are sent under");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) {
      auto rows = odns::diag::bench_crypto(iters);
      if (bench_out.empty()) {
        odns::diag::write_bench_csv(std::cout, rows);
      } else {
        std::ofstream out(bench_out);
        odns::diag::write_bench_csv(out, rows);
      }
    } else if (qnames->parsed()) {
      auto suffix = odns::wire::DnsName::from_presentation(qname_suffix).lowered();
      auto analysis = odns::diag::analyze_qnames(list_path, suffix);
      if (qname_out.empty()) {
        odns::diag::write_qname_csv(std::cout, analysis);
      } else {
        std::ofstream out(qname_out);
        odns::diag::write_qname_csv(out, analysis);
      }
    } else if (probe->parsed()) {
      auto report = odns::diag::probe_recursive(
          odns::net::Endpoint::parse(recursive_addr, 53), odns::net::Endpoint::parse(observer_addr, 5301),
          odns::wire::DnsName::from_presentation(observer_zone).lowered());
      std::cout << "forwards_ecs=" << (report.forwards_ecs ? "true" : "false") << "\n"
                << "applies_0x20=" << (report.applies_0x20 ? "true" : "false") << "\n"
                << "strips_additional=" << (report.strips_additional ? "true" : "false") << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "odns-diag: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
