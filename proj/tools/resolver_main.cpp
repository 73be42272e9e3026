// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "odns/config.hpp"
#include "odns/encoding.hpp"
#include "odns/errors.hpp"
#include "odns/resolver.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void handle_signal(int) { g_stop = 1; }

void wait_for_signal() {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oblivious DNS resolver (authoritative for the ODNS zone)"};
  app.require_subcommand(0, 1);

  // keygen subcommand
  auto* keygen = app.add_subcommand("keygen", "generate a resolver keypair file");
  std::string keygen_out;
  keygen->add_option("--out", keygen_out, "output path (64 bytes, mode 0600)")->required();

  // run (default) options
  std::string config_path;
  std::string listen;
  std::string zone;
  std::string upstream;
  std::string keypair_path;
  std::size_t capacity = 0;
  bool echo_observer = false;

  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--listen", listen, "UDP listen address (ip:port)");
  app.add_option("--zone", zone, "zone suffix this resolver is authoritative for");
  app.add_option("--upstream", upstream, "comma-separated upstream recursive addresses");
  app.add_option("--keypair", keypair_path, "keypair file (see the keygen subcommand)");
  app.add_option("--capacity", capacity, "answer cache capacity in entries (0 = unlimited)");
  app.add_flag("--echo-observer", echo_observer,
               "debug observer mode: answer probes with flags describing the received query");

  CLI11_PARSE(app, argc, argv);

  try {
    if (keygen->parsed()) {
      auto kp = odns::crypto::ResolverKeyPair::generate(odns::system_rng());
      odns::resolver::save_keypair(kp, keygen_out);
      std::cout << "public_key=" << odns::encoding::hex_encode(kp.public_key) << "\n"
                << "name_label=" << odns::crypto::derive_self_certifying_name(kp.public_key) << "\n";
      return 0;
    }

    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = odns::config::load_kv_file(config_path);
    if (!listen.empty()) kv["listen_address"] = listen;
    if (!zone.empty()) kv["zone_suffix"] = zone;
    if (!upstream.empty()) kv["upstream_addresses"] = upstream;
    if (!keypair_path.empty()) kv["keypair_path"] = keypair_path;
    if (capacity != 0) kv["cache_capacity"] = std::to_string(capacity);

    if (echo_observer) {
      auto endpoint = kv.count("listen_address")
                          ? odns::net::Endpoint::parse(kv["listen_address"], 5301)
                          : odns::net::Endpoint{0, 5301};
      odns::resolver::EchoObserverService observer(endpoint, &std::cout);
      observer.start();
      std::cerr << "odns-resolver observing on " << observer.endpoint().to_string() << "\n";
      wait_for_signal();
      observer.stop();
      return 0;
    }

    odns::resolver::ResolverConfig cfg = odns::resolver::config_from_kv(kv);
    if (cfg.keypair_path.empty()) throw odns::ConfigError("keypair_path is required");
    auto kp = odns::resolver::load_keypair(cfg.keypair_path);

    odns::resolver::ResolverService service(cfg, kp, odns::system_rng(), &std::cout);
    service.start();
    std::cerr << "odns-resolver listening on " << service.endpoint().to_string() << " zone "
              << cfg.zone_suffix.presentation() << " label " << service.engine().name_label() << "\n";
    wait_for_signal();
    service.stop();
  } catch (const std::exception& e) {
    std::cerr << "odns-resolver: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
