#include "pcnsim/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pcn {

void SimConfig::validate() const {
  if (pool_size < 2) throw std::invalid_argument("participant pool needs at least two nodes");
  if (amount_min <= 0 || amount_max < amount_min)
    throw std::invalid_argument("amount range must be non-empty and positive");
  if (!(delay_min >= 0.0) || !(delay_max >= delay_min))
    throw std::invalid_argument("delay range must be non-empty and non-negative");
  if (!(risk_factor >= 0.0)) throw std::invalid_argument("risk factor must be non-negative");
  if (!(penalty >= 0.0)) throw std::invalid_argument("penalty must be non-negative");
  beliefs.validate();
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Succeeded: return "succeeded";
    case Outcome::FailedNoPath: return "failed_no_path";
    case Outcome::FailedRefusal: return "failed_refusal";
  }
  return "unknown";
}

namespace {

enum class Stream : std::uint64_t { Workload = 1, Balances = 2 };

std::mt19937_64 stream_rng(std::uint64_t seed, std::size_t run, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Satoshi round_sat(double v) { return static_cast<Satoshi>(std::floor(v + 0.5)); }

struct Draw {
  Minutes delay;
  NodeIndex sender;
  NodeIndex receiver;
  Satoshi amount;
};

class Workload {
 public:
  Workload(const Network& network, const SimConfig& config, std::size_t run)
      : rng_(stream_rng(config.seed, run, Stream::Workload)), config_(config) {
    std::vector<NodeIndex> all(network.node_count());
    std::iota(all.begin(), all.end(), NodeIndex{0});
    pool_.reserve(config.pool_size);
    std::sample(all.begin(), all.end(), std::back_inserter(pool_), config.pool_size, rng_);
  }

  Draw next() {
    std::uniform_real_distribution<Minutes> delay(config_.delay_min, config_.delay_max);
    std::uniform_int_distribution<std::size_t> first(0, pool_.size() - 1);
    std::uniform_int_distribution<std::size_t> second(0, pool_.size() - 2);
    std::uniform_int_distribution<Satoshi> amount(config_.amount_min, config_.amount_max);
    Draw d{};
    d.delay = delay(rng_);
    std::size_t s = first(rng_);
    std::size_t r = second(rng_);
    if (r >= s) ++r;
    d.sender = pool_[s];
    d.receiver = pool_[r];
    d.amount = amount(rng_);
    return d;
  }

 private:
  std::mt19937_64 rng_;
  const SimConfig& config_;
  std::vector<NodeIndex> pool_;
};

class Run {
 public:
  Run(Network network, const SimConfig& config, std::size_t run)
      : network_(std::move(network)), config_(config), run_(run), beliefs_(config.beliefs) {}

  void execute(std::vector<PaymentRecord>& out) {
    Workload workload(network_, config_, run_);
    for (std::size_t i = 0; i < config_.num_payments; ++i) {
      Draw d = workload.next();
      now_ += d.delay;
      out.push_back(pay(d, i));
    }
  }

 private:
  PaymentRecord pay(const Draw& d, std::size_t index) {
    PaymentRecord rec;
    rec.run = run_;
    rec.index = index;
    rec.timestamp = now_;
    rec.sender = d.sender;
    rec.receiver = d.receiver;
    rec.amount = d.amount;

    PathQuery query{d.sender, d.receiver, d.amount, config_.risk_factor, config_.penalty, true};
    rec.path = find_path(network_, query, beliefs_, now_);
    if (!rec.path) {
      rec.outcome = Outcome::FailedNoPath;
      return rec;
    }

    const PathPlan& plan = *rec.path;
    for (std::size_t k = 1; k < plan.hops.size(); ++k) {
      const HopPlan& hop = plan.hops[k];
      HopRecord h;
      h.node = hop.from;
      h.fee = hop.fee;
      h.amount = hop.amount_to_forward;
      h.collateral = collateral_cost(hop.cumulative_timelock, hop.amount_to_forward, config_.risk_factor);

      HopEconomics econ{hop.fee, h.collateral, 0.0, hop.amount_to_forward, hop.cumulative_timelock};
      SenderBeliefs sb{
          beliefs_.success_estimate({d.sender, hop.channel, ObservationKind::SenderPostLockFailure}, now_),
          beliefs_.sender_buffer(d.sender, hop.channel, now_)};
      FractionChoice fc = choose_fraction(config_.fee_model, econ, sb);
      econ.nonrefundable_fraction = fc.fraction;
      h.fraction = fc.fraction;
      h.collateral_exceeds_fee = fc.collateral_exceeds_fee;

      h.p_success = beliefs_.success_estimate(
          {hop.from, hop.channel, ObservationKind::IntermediaryDownstreamFailure}, now_);
      h.balance_sufficient = network_.hop_balance(hop.channel) >= hop.amount_to_forward;
      LockDecision decision = decide_lock(config_.fee_model, econ, h.p_success, h.balance_sufficient);
      h.move = decision.move;
      h.utility = decision.expected_utility;
      rec.hops.push_back(h);
      if (h.move == Move::NotLock) break;
    }

    if (rec.hops.size() == plan.intermediary_count() &&
        (rec.hops.empty() || rec.hops.back().move == Move::Lock)) {
      rec.outcome = Outcome::Succeeded;
      for (HopRecord& h : rec.hops) h.earned = h.fee;
      rec.fees_paid = plan.total_fee;
      settle_success(rec, network_);
      return rec;
    }

    std::size_t refused = rec.hops.size() - 1;
    rec.outcome = Outcome::FailedRefusal;
    rec.refusal_index = refused;
    for (std::size_t j = 0; j < refused; ++j) {
      HopRecord& h = rec.hops[j];
      h.earned = round_sat(h.fraction * static_cast<double>(h.fee));
      DirectedChannel hop = plan.hops[j + 1].channel;
      beliefs_.record_failure({h.node, hop, ObservationKind::IntermediaryDownstreamFailure}, now_);
      beliefs_.record_failure({d.sender, hop, ObservationKind::SenderPostLockFailure}, now_);
    }
    beliefs_.record_failure({d.sender, plan.hops[refused + 1].channel, ObservationKind::SenderRefusalToLock},
                            now_);
    rec.nonrefundable_paid = settle_failure(rec);
    return rec;
  }

  Network network_;
  const SimConfig& config_;
  std::size_t run_;
  BeliefStore beliefs_;
  Minutes now_ = 0.0;
};

}  // namespace

SimResult run_simulation(const Network& network, const SimConfig& config) {
  config.validate();
  if (network.empty()) throw EmptyNetworkError("run_simulation: empty network");
  if (config.pool_size > network.node_count())
    throw std::invalid_argument("participant pool larger than the network");

  SimResult result;
  result.records.reserve(config.num_runs * config.num_payments);
  for (std::size_t run = 0; run < config.num_runs; ++run) {
    Network copy = network;
    if (config.randomize_balances) {
      std::mt19937_64 rng = stream_rng(config.seed, run, Stream::Balances);
      copy = initialize_balances(std::move(copy), rng());
    }
    Run(std::move(copy), config, run).execute(result.records);
  }
  result.metrics = compute_metrics(result.records, config.num_runs);
  return result;
}

void settle_success(const PaymentRecord& payment, Network& network) {
  if (payment.outcome != Outcome::Succeeded || !payment.path)
    throw std::logic_error("settle_success: payment did not succeed");
  for (const HopPlan& hop : payment.path->hops) network.transfer(hop.channel, hop.amount_to_forward);
}

Satoshi settle_failure(const PaymentRecord& payment) {
  if (payment.outcome == Outcome::Succeeded) throw std::logic_error("settle_failure: payment succeeded");
  Satoshi total = 0;
  for (const HopRecord& h : payment.hops)
    if (h.move == Move::Lock) total += round_sat(h.fraction * static_cast<double>(h.fee));
  return total;
}

namespace {

struct Ratio {
  double num = 0.0;
  double den = 0.0;
  std::optional<double> value() const {
    if (den == 0.0) return std::nullopt;
    return num / den;
  }
};

MetricStat summarize(const std::vector<RunMetrics>& runs, std::optional<double> RunMetrics::*field) {
  std::vector<double> xs;
  for (const RunMetrics& r : runs)
    if (r.*field) xs.push_back(*(r.*field));
  MetricStat s;
  if (xs.empty()) return s;
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  s.mean = mean;
  s.stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  return s;
}

}  // namespace

Metrics compute_metrics(const std::vector<PaymentRecord>& records, std::size_t num_runs) {
  struct Acc {
    Ratio sr, lr, f_i, f_s, f_i_prime, f_s_prime;
  };
  std::vector<Acc> acc(num_runs);
  for (const PaymentRecord& rec : records) {
    if (rec.run >= num_runs) throw std::out_of_range("compute_metrics: record run out of range");
    Acc& a = acc[rec.run];
    bool ok = rec.outcome == Outcome::Succeeded;
    a.sr.den += 1;
    a.sr.num += ok ? 1 : 0;
    a.f_s.den += 1;
    a.f_s.num += static_cast<double>(rec.fees_paid + rec.nonrefundable_paid);
    if (!ok) {
      a.f_s_prime.den += 1;
      a.f_s_prime.num += static_cast<double>(rec.nonrefundable_paid);
    }
    for (const HopRecord& h : rec.hops) {
      a.lr.den += 1;
      a.lr.num += h.move == Move::Lock ? 1 : 0;
      a.f_i.den += 1;
      a.f_i.num += static_cast<double>(h.earned);
      if (!ok) {
        a.f_i_prime.den += 1;
        a.f_i_prime.num += static_cast<double>(h.earned);
      }
    }
  }

  Metrics m;
  for (const Acc& a : acc)
    m.runs.push_back({a.sr.value(), a.lr.value(), a.f_i.value(), a.f_s.value(), a.f_i_prime.value(),
                      a.f_s_prime.value()});
  m.sr = summarize(m.runs, &RunMetrics::sr);
  m.lr = summarize(m.runs, &RunMetrics::lr);
  m.f_i = summarize(m.runs, &RunMetrics::f_i);
  m.f_s = summarize(m.runs, &RunMetrics::f_s);
  m.f_i_prime = summarize(m.runs, &RunMetrics::f_i_prime);
  m.f_s_prime = summarize(m.runs, &RunMetrics::f_s_prime);
  return m;
}

std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::logic_error("format_number: buffer too small");
  return std::string(buf, end);
}

namespace {

std::string field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string metrics_csv(const Metrics& metrics) {
  std::ostringstream out;
  out << "run,SR,LR,F_I,F_S,F_I_prime,F_S_prime\n";
  for (std::size_t i = 0; i < metrics.runs.size(); ++i) {
    const RunMetrics& r = metrics.runs[i];
    out << i << ',' << field(r.sr) << ',' << field(r.lr) << ',' << field(r.f_i) << ',' << field(r.f_s)
        << ',' << field(r.f_i_prime) << ',' << field(r.f_s_prime) << '\n';
  }
  out << "mean," << field(metrics.sr.mean) << ',' << field(metrics.lr.mean) << ','
      << field(metrics.f_i.mean) << ',' << field(metrics.f_s.mean) << ','
      << field(metrics.f_i_prime.mean) << ',' << field(metrics.f_s_prime.mean) << '\n';
  out << "std," << field(metrics.sr.stddev) << ',' << field(metrics.lr.stddev) << ','
      << field(metrics.f_i.stddev) << ',' << field(metrics.f_s.stddev) << ','
      << field(metrics.f_i_prime.stddev) << ',' << field(metrics.f_s_prime.stddev) << '\n';
  return out.str();
}

std::string records_jsonl(const std::vector<PaymentRecord>& records, const Network& network) {
  std::string out;
  for (const PaymentRecord& rec : records) {
    nlohmann::ordered_json j;
    j["run"] = rec.run;
    j["index"] = rec.index;
    j["timestamp"] = rec.timestamp;
    j["sender"] = network.node_id(rec.sender).str();
    j["receiver"] = network.node_id(rec.receiver).str();
    j["amount"] = rec.amount;
    j["outcome"] = to_string(rec.outcome);
    j["refusal_index"] = rec.refusal_index ? nlohmann::ordered_json(*rec.refusal_index) : nullptr;
    j["fees_paid"] = rec.fees_paid;
    j["nonrefundable_paid"] = rec.nonrefundable_paid;
    nlohmann::ordered_json path = nlohmann::ordered_json::array();
    if (rec.path) {
      for (const HopPlan& hop : rec.path->hops)
        path.push_back({{"channel", network.channel(hop.channel.channel).id},
                        {"from", network.node_id(hop.from).str()},
                        {"to", network.node_id(hop.to).str()},
                        {"amount", hop.amount_to_forward},
                        {"fee", hop.fee},
                        {"cumulative_timelock", hop.cumulative_timelock}});
    }
    j["path"] = rec.path ? path : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json hops = nlohmann::ordered_json::array();
    for (const HopRecord& h : rec.hops)
      hops.push_back({{"node", network.node_id(h.node).str()},
                      {"move", to_string(h.move)},
                      {"fee", h.fee},
                      {"collateral", h.collateral},
                      {"fraction", h.fraction},
                      {"p_success", h.p_success},
                      {"utility", h.utility},
                      {"balance_sufficient", h.balance_sufficient},
                      {"earned", h.earned}});
    j["moves"] = std::move(hops);
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace pcn
