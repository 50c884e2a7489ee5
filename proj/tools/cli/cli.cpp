#include "cli.hpp"

#include <CLI11.hpp>

#include <iostream>

#include "experiment.hpp"

namespace pcn::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string mode;
  std::optional<fs::path> config;
  std::optional<fs::path> snapshot;
  fs::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> risk;
  std::optional<std::string> model;
  std::optional<std::size_t> payments;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> pool;
  std::optional<Satoshi> capacity;
  std::optional<Blocks> timelock;
  Satoshi granularity = 1;
  std::size_t balances = 47;
  std::size_t cases = 1000;
};

FeeModel parse_model(const std::string& name) {
  auto m = parse_fee_model(name);
  if (!m) throw ConfigError("unknown fee model '" + name + "'");
  return *m;
}

void simulate(const Flags& f, const nlohmann::json& config, bool compare) {
  SimConfig sim = sim_config_from(config);
  sim.seed = *f.seed;
  if (f.risk) sim.risk_factor = *f.risk;
  if (f.model) sim.fee_model = parse_model(*f.model);
  if (f.payments) sim.num_payments = *f.payments;
  if (f.runs) sim.num_runs = *f.runs;
  if (f.pool) sim.pool_size = *f.pool;
  Network network = load_network(f.snapshot, synthetic_options_from(config), *f.seed);

  if (compare) {
    write_atomically(f.out / "comparison.csv", comparison_csv(compare_models(network, sim)));
    return;
  }
  SimResult result = run_simulation(network, sim);
  write_atomically(f.out / "metrics.csv", metrics_csv(result.metrics));
  write_atomically(f.out / "records.jsonl", records_jsonl(result.records, network));
}

void probe(const Flags& f, const nlohmann::json& config) {
  ProbeScenario s = probe_scenario_from(config);
  s.seed = *f.seed;
  if (f.capacity) s.capacity = *f.capacity;
  if (f.timelock) s.timelock = *f.timelock;
  if (f.risk) s.risk_factor = *f.risk;
  if (f.model) s.fee_model = parse_model(*f.model);
  std::vector<Satoshi> balances = even_balances(s.capacity, f.balances);
  write_atomically(f.out / "cost_curve.csv", cost_curve_csv(cost_curve(s, balances, f.granularity)));
}

void htlc2_trace(const Flags& f, const nlohmann::json& config) {
  htlc2::Scenario s = htlc2_scenario_from(config);
  s.seed = *f.seed;
  htlc2::RunReport report = htlc2::adversary_run(s);
  write_atomically(f.out / "htlc2_trace.jsonl", htlc2::trace_jsonl(report.trace));
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Payment channel network simulator with non-refundable fees"};
  Flags f;
  app.add_option("mode,--mode", f.mode, "simulate | compare | probe | game-oracle | htlc2-trace | synth")
      ->required()
      ->check(CLI::IsMember({"simulate", "compare", "probe", "game-oracle", "htlc2-trace", "synth"}));
  app.add_option("--config", f.config, "TOML config, or JSON with a .json extension")->check(CLI::ExistingFile);
  app.add_option("--snapshot", f.snapshot, "network snapshot JSON; synthetic network when omitted")
      ->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output directory");
  app.add_option("--seed", f.seed, "experiment seed")->required();
  app.add_option("--risk", f.risk, "risk factor r");
  app.add_option("--model", f.model, "original | guaranteed | incentivized");
  app.add_option("--payments", f.payments, "payments per run");
  app.add_option("--runs", f.runs, "number of runs");
  app.add_option("--pool", f.pool, "participant pool size");
  app.add_option("--capacity", f.capacity, "probed channel capacity");
  app.add_option("--timelock", f.timelock, "probed hop timelock");
  app.add_option("--granularity", f.granularity, "bisection stop width")->check(CLI::PositiveNumber);
  app.add_option("--balances", f.balances, "probe: number of evenly spaced balances");
  app.add_option("--cases", f.cases, "game-oracle: number of random paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    nlohmann::json config = f.config ? load_config(*f.config) : nlohmann::json::object();
    fs::create_directories(f.out);
    if (f.mode == "simulate" || f.mode == "compare") simulate(f, config, f.mode == "compare");
    else if (f.mode == "probe") probe(f, config);
    else if (f.mode == "htlc2-trace") htlc2_trace(f, config);
    else if (f.mode == "game-oracle")
      write_atomically(f.out / "game_oracle.csv", game_oracle_csv(game_oracle(f.cases, 5, *f.seed)));
    else if (f.mode == "synth")
      write_atomically(f.out / "snapshot.json", generate_snapshot(synthetic_options_from(config), *f.seed));
  } catch (const std::exception& e) {
    std::cerr << "pcnsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace pcn::cli
