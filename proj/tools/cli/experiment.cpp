#include "experiment.hpp"

#include <toml.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

namespace pcn::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const json* table(const json& config, const char* name) {
  auto it = config.find(name);
  if (it == config.end()) return nullptr;
  if (!it->is_object()) throw ConfigError(std::string("[") + name + "] must be a table");
  return &*it;
}

template <typename T>
void read(const json* t, const char* key, T& out) {
  if (!t) return;
  auto it = t->find(key);
  if (it == t->end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for ") + key);
  }
}

FeeModel model_from(const json* t, FeeModel fallback) {
  std::string name;
  read(t, "model", name);
  if (name.empty()) return fallback;
  auto m = parse_fee_model(name);
  if (!m) throw ConfigError("unknown fee model '" + name + "'");
  return *m;
}

}  // namespace

json load_config(const fs::path& path) {
  std::string text = read_file(path);
  if (path.extension() == ".json") {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  try {
    toml::table parsed = toml::parse(text, path.string());
    std::ostringstream out;
    out << toml::json_formatter{parsed};
    return json::parse(out.str());
  } catch (const toml::parse_error& e) {
    throw ConfigError(path.string() + ": " + std::string(e.description()));
  }
}

SimConfig sim_config_from(const json& config) {
  SimConfig c;
  const json* t = table(config, "sim");
  read(t, "payments", c.num_payments);
  read(t, "runs", c.num_runs);
  read(t, "pool", c.pool_size);
  read(t, "amount_min", c.amount_min);
  read(t, "amount_max", c.amount_max);
  read(t, "delay_min", c.delay_min);
  read(t, "delay_max", c.delay_max);
  read(t, "risk", c.risk_factor);
  read(t, "penalty", c.penalty);
  read(t, "apriori", c.beliefs.apriori);
  read(t, "half_life", c.beliefs.half_life_intermediary);
  read(t, "tau", c.beliefs.tau);
  read(t, "randomize_balances", c.randomize_balances);
  c.fee_model = model_from(t, c.fee_model);
  return c;
}

ProbeScenario probe_scenario_from(const json& config) {
  ProbeScenario s;
  const json* t = table(config, "probe");
  read(t, "capacity", s.capacity);
  read(t, "timelock", s.timelock);
  read(t, "risk", s.risk_factor);
  read(t, "base_fee", s.target_params.base_fee);
  read(t, "fee_rate", s.target_params.fee_rate);
  read(t, "apriori", s.beliefs.apriori);
  read(t, "half_life", s.beliefs.half_life_intermediary);
  read(t, "tau", s.beliefs.tau);
  s.fee_model = model_from(t, s.fee_model);
  return s;
}

htlc2::Scenario htlc2_scenario_from(const json& config) {
  htlc2::Scenario s;
  const json* t = table(config, "htlc2");
  read(t, "hops", s.hops);
  read(t, "amount", s.amount);
  Satoshi fee = 10;
  double fraction = 0.3;
  read(t, "fee", fee);
  read(t, "fraction", fraction);
  s.fees.assign(s.hops, fee);
  s.fractions.assign(s.hops, fraction);
  s.fees[0] = 0;
  s.fractions[0] = 0.0;
  read(t, "fees", s.fees);
  read(t, "fractions", s.fractions);
  std::string script = "honest";
  read(t, "script", script);
  if (script == "honest") s.script = htlc2::Script::Honest;
  else if (script == "bribed-successor") s.script = htlc2::Script::BribedSuccessor;
  else if (script == "source-wrong-preimage") s.script = htlc2::Script::SourceWrongPreimage;
  else throw ConfigError("unknown htlc2 script '" + script + "'");
  read(t, "adversary", s.adversary);
  std::size_t declines = 0;
  read(t, "declines_at", declines);
  if (declines > 0) s.declines_at = declines;
  read(t, "payments", s.payments);
  read(t, "start_interval", s.start_interval);
  read(t, "latency", s.latency);
  read(t, "deadline", s.deadline);
  return s;
}

SyntheticOptions synthetic_options_from(const json& config) {
  SyntheticOptions o;
  const json* t = table(config, "synthetic");
  read(t, "nodes", o.nodes);
  read(t, "channels_per_node", o.channels_per_node);
  read(t, "announced_fraction", o.announced_fraction);
  read(t, "median_capacity", o.median_capacity);
  read(t, "capacity_log_sigma", o.capacity_log_sigma);
  return o;
}

Network load_network(const std::optional<fs::path>& snapshot, const SyntheticOptions& synthetic,
                     std::uint64_t seed) {
  std::string document = snapshot ? read_file(*snapshot) : generate_snapshot(synthetic, seed);
  return sample_missing_params(ingest_snapshot(document), seed);
}

std::vector<ModelResult> compare_models(const Network& network, const SimConfig& base) {
  std::vector<ModelResult> out;
  for (FeeModel m : {FeeModel::Original, FeeModel::ModGuaranteed, FeeModel::ModIncentivized}) {
    SimConfig c = base;
    c.fee_model = m;
    out.push_back({m, run_simulation(network, c).metrics});
  }
  return out;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string comparison_csv(const std::vector<ModelResult>& results) {
  std::ostringstream out;
  out << "model";
  for (const char* name : {"SR", "LR", "F_I", "F_S", "F_I_prime", "F_S_prime"})
    out << ',' << name << "_mean," << name << "_std";
  out << '\n';
  for (const ModelResult& r : results) {
    out << to_string(r.model);
    for (const MetricStat* s : {&r.metrics.sr, &r.metrics.lr, &r.metrics.f_i, &r.metrics.f_s,
                                &r.metrics.f_i_prime, &r.metrics.f_s_prime})
      out << ',' << cell(s->mean) << ',' << cell(s->stddev);
    out << '\n';
  }
  return out.str();
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}


std::vector<OracleCase> game_oracle(std::size_t cases, std::size_t max_hops, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> hops(2, std::max<std::size_t>(2, max_hops));
  std::uniform_int_distribution<Satoshi> fee(0, 60);
  std::uniform_int_distribution<Satoshi> amount(1'000, 100'000);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> collateral(0.0, 40.0);
  const FeeModel models[] = {FeeModel::Original, FeeModel::ModGuaranteed, FeeModel::ModIncentivized};

  std::vector<OracleCase> out;
  for (std::size_t c = 0; c < cases; ++c) {
    OracleCase oc;
    oc.index = c;
    oc.hops = hops(rng);
    oc.model = models[c % 3];
    std::size_t n = oc.hops;

    GameInputs in;
    in.path_length = n;
    in.fees.assign(n, 0);
    in.collaterals.assign(n, 0.0);
    in.amounts.assign(n, 0);
    std::vector<PartyBelief> beliefs(n + 1);
    std::vector<HopEconomics> econ(n);
    for (std::size_t i = 0; i < n; ++i) {
      in.collaterals[i] = collateral(rng);
      if (i > 0) in.fees[i] = fee(rng);
    }
    in.amounts[n - 1] = amount(rng);
    for (std::size_t i = n - 1; i-- > 0;) in.amounts[i] = in.amounts[i + 1] + in.fees[i + 1];
    if (oc.model != FeeModel::Original) in.fractions.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
      econ[i] = {in.fees[i], in.collaterals[i], 0.0, in.amounts[i], 0};
      SenderBeliefs sb{unit(rng), 0.1 * unit(rng)};
      if (oc.model != FeeModel::Original) {
        econ[i].nonrefundable_fraction = choose_fraction(oc.model, econ[i], sb).fraction;
        in.fractions[i] = econ[i].nonrefundable_fraction;
      }
      beliefs[i] = {unit(rng), unit(rng) < 0.85};
    }
    in.success_utility = 10.0 * (static_cast<double>(in.amounts[0]) + in.collaterals[0] + 1.0);
    beliefs[0] = {1.0, true};

    GameTree tree = build_game_tree(in);
    EquilibriumProfile eq = backward_induct(tree, beliefs);
    oc.locks_agree = eq.locking_moves.size() == n && eq.locking_moves[0] == Move::Lock;
    for (std::size_t i = 1; i < n && oc.locks_agree; ++i) {
      Move expected = decide_lock(oc.model, econ[i], beliefs[i].p_success, beliefs[i].can_lock).move;
      oc.locks_agree = eq.locking_moves[i] == expected;
    }
    oc.all_reveal = true;
    for (const DecisionRecord& d : eq.decisions)
      if (d.phase == GameNode::Phase::Unlocking && d.move != Move::Reveal) oc.all_reveal = false;
    out.push_back(oc);
  }
  return out;
}

std::string game_oracle_csv(const std::vector<OracleCase>& cases) {
  std::ostringstream out;
  out << "case,hops,model,locks_agree,all_reveal\n";
  for (const OracleCase& c : cases)
    out << c.index << ',' << c.hops << ',' << to_string(c.model) << ',' << (c.locks_agree ? 1 : 0) << ','
        << (c.all_reveal ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace pcn::cli
