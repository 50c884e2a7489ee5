#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcnsim/pathfinding.hpp"
#include "pcnsim/types.hpp"

// Message-level model of the two-preimage conditional payment with
// non-refundable fee payments. Positions: v_0 is the source, v_n the
// receiver, channel i joins v_i and v_{i+1}.
namespace pcn::htlc2 {

struct Preimage {
  std::uint64_t token = 0;
  friend bool operator==(const Preimage&, const Preimage&) = default;
};

struct HashLock {
  std::uint64_t digest = 0;
  friend bool operator==(const HashLock&, const HashLock&) = default;
};

// Simulated hash: a bijection on 64-bit tokens.
HashLock lock_of(Preimage preimage) noexcept;
bool verify(HashLock lock, Preimage preimage) noexcept;

enum class Role : std::uint8_t { MainPayment, FeePayment };
enum class ContractState : std::uint8_t { Locked, Claimed, Cancelled };

struct Contract {
  std::size_t id = 0;
  std::size_t payment = 0;
  std::size_t channel = 0;
  Role role = Role::MainPayment;
  std::size_t beneficiary = 0;  // fee payments: position of the intermediary paid
  Satoshi amount = 0;
  std::vector<HashLock> locks;
  Blocks timelock = 0;
  ContractState state = ContractState::Locked;

  // Every lock must be opened by one of the offered preimages.
  bool claimable_with(std::span<const Preimage> preimages) const;
};

struct ChannelState {
  bool open = true;
  std::vector<std::size_t> pending;  // contract ids
  std::size_t unconfirmed = 0;       // main payments whose fee preimage is outstanding
};

enum class Admission : std::uint8_t { Accept, RejectUnconfirmed, RejectClosed };

// Rule i: a channel holds at most one main payment without a delivered fee preimage.
Admission admit_main(const ChannelState& channel) noexcept;

// Per-hop envelopes: position p >= 1 can open only the entry the source
// addressed to it (r_{p-1}).
class OnionPayload {
 public:
  OnionPayload() = default;
  explicit OnionPayload(std::vector<Preimage> entries) : entries_(std::move(entries)) {}

  std::optional<Preimage> extract(std::size_t position) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<Preimage> entries_;
};

struct FeePlan {
  std::size_t beneficiary = 0;  // v_j, routed over channels 0 .. j-1
  Satoshi amount = 0;           // round(x_j f_j)
  HashLock lock;                // h(r_j)
};

struct PaymentSetup {
  std::size_t hops = 0;
  Preimage receiver_secret;  // r
  HashLock payment_hash;     // h(r)
  std::vector<Preimage> hop_secrets;  // r_0 .. r_{n-1}, known to the source
  std::vector<Satoshi> main_amounts;  // alpha_0 .. alpha_{n-1}
  std::vector<FeePlan> fee_plans;     // v_1 .. v_{n-1}
  OnionPayload onion;
};

// fees and fractions are indexed by position (entry 0 ignored) and sized n.
// With n = 1 the payment is a plain single-lock transfer without fee plans.
PaymentSetup setup_payment(Satoshi amount, std::span<const Satoshi> fees, std::span<const double> fractions,
                           std::uint64_t seed);
PaymentSetup setup_payment(const PathPlan& path, std::span<const double> fractions, std::uint64_t seed);

enum class Script : std::uint8_t {
  Honest,
  BribedSuccessor,      // v_k never hands r_{k-1} to v_{k-1}
  SourceWrongPreimage,  // the envelope for v_k holds a wrong r_{k-1}
};

const char* to_string(Script script);

struct Scenario {
  std::size_t hops = 3;
  Satoshi amount = 100'000;
  std::vector<Satoshi> fees;     // size hops, entry 0 ignored
  std::vector<double> fractions;  // size hops, entry 0 ignored
  Blocks timelock_delta = 40;
  Script script = Script::Honest;
  std::size_t adversary = 1;  // k for the adversarial scripts, in [1, hops]
  // Honest post-lock failure: v_k locks nothing further (k < hops) or the
  // receiver rejects the payment (k = hops).
  std::optional<std::size_t> declines_at;
  std::size_t payments = 1;
  double start_interval = 10.0;  // 0 or below the round trip makes payments overlap
  double latency = 1.0;
  double deadline = 3.0;  // time v_i waits for its fee preimage before closing
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceEvent {
  double time = 0.0;
  std::string event;
  std::size_t payment = 0;
  std::optional<std::size_t> channel;
  std::optional<std::size_t> contract;
  std::size_t party = 0;
};

struct PartyLedger {
  Satoshi net = 0;         // all settled transfers in minus out
  Satoshi fee_income = 0;  // non-refundable fee payments received as beneficiary
  std::size_t lost_fees = 0;  // fees forfeited through a rule-ii closure
};

enum class PaymentOutcome : std::uint8_t { Succeeded, Failed, Aborted, Rejected, ChannelClosed };

const char* to_string(PaymentOutcome outcome);

struct RunReport {
  std::vector<TraceEvent> trace;
  std::vector<PartyLedger> parties;  // v_0 .. v_n
  std::vector<bool> channel_open;
  std::vector<PaymentOutcome> outcomes;
  std::vector<PaymentSetup> setups;
  std::size_t rule_i_rejections = 0;
  std::size_t closures = 0;
  // Locked main payment whose fee never arrived, excluding joint aborts, keyed
  // by (party, channel).
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> unpaid_locks;
};

RunReport adversary_run(const Scenario& scenario);

std::string trace_jsonl(std::span<const TraceEvent> trace);

}  // namespace pcn::htlc2
