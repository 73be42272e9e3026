// Copyright (c) ODNS Project Authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "odns/config.hpp"
#include "odns/errors.hpp"
#include "odns/stub.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void handle_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oblivious DNS stub resolver"};

  std::string config_path;
  std::string listen;
  std::string recursive;
  std::string suffix;
  std::string fallback;
  std::string stripe;

  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--listen", listen, "UDP listen address (ip:port)");
  app.add_option("--recursive", recursive, "comma-separated recursive resolver addresses");
  app.add_option("--suffix", suffix, "ODNS zone suffix, e.g. obliviousdns.com");
  app.add_option("--fallback", fallback, "conventional | formerr");
  app.add_option("--stripe", stripe, "single | round_robin");

  CLI11_PARSE(app, argc, argv);

  try {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = odns::config::load_kv_file(config_path);
    if (!listen.empty()) kv["listen_address"] = listen;
    if (!recursive.empty()) kv["recursive_addresses"] = recursive;
    if (!suffix.empty()) kv["odns_suffix"] = suffix;
    if (!fallback.empty()) kv["fallback_mode"] = fallback;
    if (!stripe.empty()) kv["striping"] = stripe;

    odns::stub::StubConfig cfg = odns::stub::config_from_kv(kv);
    odns::stub::StubService service(cfg, odns::system_rng(), &std::cout);
    service.start();
    std::cerr << "odns-stub listening on " << service.endpoint().to_string() << "\n";

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    service.stop();
  } catch (const std::exception& e) {
    std::cerr << "odns-stub: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
