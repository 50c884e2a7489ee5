#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcnsim/beliefs.hpp"
#include "pcnsim/game.hpp"
#include "pcnsim/pathfinding.hpp"
#include "pcnsim/topology.hpp"

namespace pcn {

struct SimConfig {
  std::uint64_t seed = 0;
  FeeModel fee_model = FeeModel::Original;
  std::size_t num_payments = 1000;
  std::size_t num_runs = 10;
  std::size_t pool_size = 10;
  Satoshi amount_min = 16'000;
  Satoshi amount_max = 48'000;
  Minutes delay_min = 0.1;
  Minutes delay_max = 1.0;
  double risk_factor = 1.5e-7;
  double penalty = 100.0;
  BeliefParams beliefs;
  // Draw a fresh capacity split per run. Off keeps the balances of the input network.
  bool randomize_balances = true;

  // Throws std::invalid_argument on an unusable configuration.
  void validate() const;
};

enum class Outcome : std::uint8_t { Succeeded, FailedNoPath, FailedRefusal };

const char* to_string(Outcome outcome);

// One intermediary's part in a payment.
struct HopRecord {
  NodeIndex node = 0;
  Move move = Move::NotLock;
  Satoshi fee = 0;
  Satoshi amount = 0;
  double collateral = 0.0;
  double fraction = 0.0;
  bool collateral_exceeds_fee = false;
  double p_success = 0.0;
  double utility = 0.0;
  bool balance_sufficient = false;
  Satoshi earned = 0;  // f on success, round(x f) if locked on failure, else 0
};

struct PaymentRecord {
  std::size_t run = 0;
  std::size_t index = 0;
  Minutes timestamp = 0.0;
  NodeIndex sender = 0;
  NodeIndex receiver = 0;
  Satoshi amount = 0;
  std::optional<PathPlan> path;
  // Intermediaries that moved, in path order; hops past a refusal are absent.
  std::vector<HopRecord> hops;
  Outcome outcome = Outcome::FailedNoPath;
  // Position of the refusing intermediary, 0 for v_1.
  std::optional<std::size_t> refusal_index;
  Satoshi fees_paid = 0;
  Satoshi nonrefundable_paid = 0;
};

// Per-run values; nullopt when the denominator was zero.
struct RunMetrics {
  std::optional<double> sr, lr, f_i, f_s, f_i_prime, f_s_prime;
};

struct MetricStat {
  std::optional<double> mean;
  std::optional<double> stddev;  // sample standard deviation across runs
};

struct Metrics {
  std::vector<RunMetrics> runs;
  MetricStat sr, lr, f_i, f_s, f_i_prime, f_s_prime;
};

struct SimResult {
  Metrics metrics;
  std::vector<PaymentRecord> records;
};

// Executes config.num_runs independent runs of sequential payments. Each run
// starts from a copy of `network` with an empty belief store.
SimResult run_simulation(const Network& network, const SimConfig& config);

// Moves alpha_i across every hop. Requires a Succeeded record with a path.
void settle_success(const PaymentRecord& payment, Network& network);

// Failures leave balances untouched; returns the sender's non-refundable outlay.
Satoshi settle_failure(const PaymentRecord& payment);

Metrics compute_metrics(const std::vector<PaymentRecord>& records, std::size_t num_runs);

// Columns run, SR, LR, F_I, F_S, F_I_prime, F_S_prime; one row per run then
// "mean" and "std" rows. Absent values are empty fields.
std::string metrics_csv(const Metrics& metrics);

// One JSON object per payment.
std::string records_jsonl(const std::vector<PaymentRecord>& records, const Network& network);

// Shortest round-trip decimal text for a double.
std::string format_number(double value);

}  // namespace pcn
