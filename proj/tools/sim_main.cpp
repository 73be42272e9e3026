// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "odns/errors.hpp"
#include "odns/sim.hpp"

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw odns::Error("cannot write " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven recursive-cache simulator for partial ODNS adoption"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "single simulation run");
  std::string run_trace, run_out;
  odns::sim::SimConfig run_cfg;
  run->add_option("--trace", run_trace, "input trace CSV (timestamp,client_id,qname,qtype)")->required();
  run->add_option("--fraction", run_cfg.odns_fraction, "fraction of clients using ODNS [0..1]")->required();
  run->add_option("--capacity", run_cfg.recursive_cache_capacity, "recursive cache entries (0 = unlimited)");
  run->add_option("--ttl", run_cfg.assumed_ttl, "assumed TTL in seconds for every cache entry");
  run->add_option("--seed", run_cfg.rng_seed,
                  "client-assignment seed; assignments nest across fractions under one seed");
  run->add_option("--out", run_out, "output CSV (stdout when omitted)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "cross product of fractions x capacities");
  std::string sweep_trace, sweep_out;
  std::vector<double> fractions;
  std::vector<std::size_t> capacities;
  std::uint32_t sweep_ttl = 3600;
  std::uint64_t sweep_seed = 1;
  sweep->add_option("--trace", sweep_trace, "input trace CSV")->required();
  sweep->add_option("--fractions", fractions, "ODNS fractions, e.g. 0 0.1 0.2")->required();
  sweep->add_option("--capacities", capacities, "cache capacities")->required();
  sweep->add_option("--ttl", sweep_ttl, "assumed TTL in seconds");
  sweep->add_option("--seed", sweep_seed, "client-assignment seed");
  sweep->add_option("--out", sweep_out, "output CSV (stdout when omitted)");

  // gen-trace
  auto* gen = app.add_subcommand("gen-trace", "generate a synthetic Zipf trace");
  std::string gen_out;
  odns::sim::TraceGenConfig gen_cfg;
  gen->add_option("--clients", gen_cfg.clients, "number of clients");
  gen->add_option("--queries", gen_cfg.queries, "number of queries");
  gen->add_option("--zipf", gen_cfg.zipf_s, "domain popularity Zipf exponent");
  gen->add_option("--client-zipf", gen_cfg.client_zipf_s, "client activity Zipf exponent");
  gen->add_option("--pool", gen_cfg.domain_pool, "size of the domain name pool");
  gen->add_option("--duration", gen_cfg.duration_seconds, "trace duration in seconds");
  gen->add_option("--seed", gen_cfg.seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto trace = odns::sim::load_trace(run_trace);
      if (trace.skipped_lines > 0) {
        std::cerr << "skipped " << trace.skipped_lines << " malformed lines\n";
      }
      auto result = odns::sim::run_simulation(trace.records, run_cfg);
      std::vector<odns::sim::SweepRow> rows{{run_cfg, result}};
      if (run_out.empty()) {
        odns::sim::write_results_csv(std::cout, rows);
      } else {
        auto out = open_out(run_out);
        odns::sim::write_results_csv(out, rows);
      }
    } else if (sweep->parsed()) {
      auto trace = odns::sim::load_trace(sweep_trace);
      if (trace.skipped_lines > 0) {
        std::cerr << "skipped " << trace.skipped_lines << " malformed lines\n";
      }
      auto rows = odns::sim::sweep(trace.records, fractions, capacities, sweep_ttl, sweep_seed);
      if (sweep_out.empty()) {
        odns::sim::write_results_csv(std::cout, rows);
      } else {
        auto out = open_out(sweep_out);
        odns::sim::write_results_csv(out, rows);
      }
    } else if (gen->parsed()) {
      auto trace = odns::sim::generate_trace(gen_cfg);
      auto out = open_out(gen_out);
      odns::sim::write_trace_csv(out, trace);
      std::cerr << "wrote " << trace.size() << " records to " << gen_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "odns-sim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
