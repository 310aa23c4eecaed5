#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ccep/catalog/api.hpp"
#include "ccep/catalog/service.hpp"
#include "ccep/harness/simulation.hpp"
#include "ccep/harness/trace.hpp"
#include "ccep/statestore/store.hpp"

using namespace ccep;

namespace {

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, const std::string& strategy,
            const std::string& out_dir, bool reference) {
  auto cfg = load_scenario(scenario);
  if (seed) {
    cfg.seed = *seed;
    cfg.worker.seed = *seed;
  }
  if (!strategy.empty()) cfg.worker.strategy = strategy_from_string(strategy);
  if (reference) cfg = reference_of(cfg);
  validate(cfg);
  auto r = run_scenario(cfg);
  write_run(r, out_dir);
  const auto& s = r.summary;
  std::printf("%s seed=%llu strategy=%s events=%zu detections=%llu relocations=%llu instances max=%d final=%d "
              "p99=%.1fms wall=%.2fs\n",
              s.scenario.c_str(), static_cast<unsigned long long>(s.seed), s.strategy.c_str(), s.input_events,
              static_cast<unsigned long long>(s.detections), static_cast<unsigned long long>(s.relocations),
              s.max_instances, s.final_instances, s.p99_latency_ms, s.wall_seconds);
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b) {
  auto report = replay_compare(Trace::read_jsonl(a), Trace::read_jsonl(b));
  std::cout << report.summary() << '\n';
  for (const auto& [type, id] : report.only_a) std::cout << "  - " << type << ' ' << id << '\n';
  for (const auto& [type, id] : report.only_b) std::cout << "  + " << type << ' ' << id << '\n';
  if (!report.comparable) return 2;
  return report.empty() ? 0 : 1;
}

int cmd_catalog_serve(const std::string& host, int port) {
  InMemoryStateStore store(steady_clock_us());
  Bus bus(steady_clock_us());
  HttpWebhookTransport transport;
  CatalogService service(bus, StoreClient(store, CatalogService::kId), steady_clock_us(), {}, &transport);
  service.start();
  CatalogApi api(service);
  std::printf("catalog listening on %s:%d\n", host.c_str(), port);
  std::fflush(stdout);
  serve_catalog_http(api, host, port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ccep: elastic CEP workers on a simulated cluster"};
  app.require_subcommand(1);

  std::string scenario, strategy, out_dir = "out";
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "run a scenario and write metrics.csv, trace.jsonl, manifest.json");
  run->add_option("--scenario", scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--strategy", strategy, "input_similarity or resource_usage")
      ->check(CLI::IsMember({"input_similarity", "resource_usage"}));
  run->add_option("--out", out_dir, "output directory");
  bool reference = false;
  run->add_flag("--reference", reference, "run the fault-free single-worker baseline of the scenario instead");

  std::string trace_a, trace_b;
  auto* compare = app.add_subcommand("compare", "diff the detections of two traces");
  compare->add_option("--a", trace_a)->required()->check(CLI::ExistingFile);
  compare->add_option("--b", trace_b)->required()->check(CLI::ExistingFile);

  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("catalog-serve", "serve the catalog HTTP API");
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--host", host);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(scenario, seed, strategy, out_dir, reference);
    if (*compare) return cmd_compare(trace_a, trace_b);
    if (*serve) return cmd_catalog_serve(host, port);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
  return 0;
}
