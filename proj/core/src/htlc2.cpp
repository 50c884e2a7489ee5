#include "pcnsim/htlc2.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>

namespace pcn::htlc2 {

HashLock lock_of(Preimage preimage) noexcept {
  // splitmix64 finalizer; every step is invertible.
  std::uint64_t z = preimage.token + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return HashLock{z ^ (z >> 31)};
}

bool verify(HashLock lock, Preimage preimage) noexcept { return lock_of(preimage) == lock; }

bool Contract::claimable_with(std::span<const Preimage> preimages) const {
  return std::all_of(locks.begin(), locks.end(), [&](HashLock lock) {
    return std::any_of(preimages.begin(), preimages.end(), [&](Preimage p) { return verify(lock, p); });
  });
}

Admission admit_main(const ChannelState& channel) noexcept {
  if (!channel.open) return Admission::RejectClosed;
  if (channel.unconfirmed >= 1) return Admission::RejectUnconfirmed;
  return Admission::Accept;
}

std::optional<Preimage> OnionPayload::extract(std::size_t position) const {
  if (position == 0 || position > entries_.size()) return std::nullopt;
  return entries_[position - 1];
}

namespace {

Satoshi round_sat(double v) { return static_cast<Satoshi>(std::floor(v + 0.5)); }

}  // namespace

PaymentSetup setup_payment(Satoshi amount, std::span<const Satoshi> fees, std::span<const double> fractions,
                           std::uint64_t seed) {
  std::size_t n = fees.size();
  if (n == 0) throw std::invalid_argument("setup_payment: path needs at least one hop");
  if (fractions.size() != n) throw std::invalid_argument("setup_payment: one fraction per hop");
  if (amount <= 0) throw std::invalid_argument("setup_payment: amount must be positive");
  for (std::size_t i = 1; i < n; ++i) {
    if (fees[i] < 0) throw std::invalid_argument("setup_payment: negative fee");
    if (!(fractions[i] >= 0.0 && fractions[i] <= 1.0))
      throw std::invalid_argument("setup_payment: fraction outside [0, 1]");
  }

  PaymentSetup s;
  s.hops = n;
  std::mt19937_64 rng(seed);
  std::set<std::uint64_t> used;
  auto fresh = [&] {
    std::uint64_t t;
    do t = rng();
    while (!used.insert(t).second);
    return Preimage{t};
  };
  s.receiver_secret = fresh();
  s.payment_hash = lock_of(s.receiver_secret);
  if (n == 1) {
    s.main_amounts = {amount};
    return s;
  }

  for (std::size_t i = 0; i < n; ++i) s.hop_secrets.push_back(fresh());
  s.main_amounts.assign(n, 0);
  s.main_amounts[n - 1] = amount;
  for (std::size_t i = n - 1; i-- > 0;) {
    Satoshi paid_upfront = round_sat(fractions[i + 1] * static_cast<double>(fees[i + 1]));
    s.main_amounts[i] = s.main_amounts[i + 1] + fees[i + 1] - paid_upfront;
  }
  for (std::size_t j = 1; j < n; ++j)
    s.fee_plans.push_back({j, round_sat(fractions[j] * static_cast<double>(fees[j])), lock_of(s.hop_secrets[j])});
  s.onion = OnionPayload(s.hop_secrets);
  return s;
}

PaymentSetup setup_payment(const PathPlan& path, std::span<const double> fractions, std::uint64_t seed) {
  std::vector<Satoshi> fees;
  for (const HopPlan& hop : path.hops) fees.push_back(hop.fee);
  return setup_payment(path.amount, fees, fractions, seed);
}

const char* to_string(Script script) {
  switch (script) {
    case Script::Honest: return "honest";
    case Script::BribedSuccessor: return "bribed-successor";
    case Script::SourceWrongPreimage: return "source-wrong-preimage";
  }
  return "unknown";
}

const char* to_string(PaymentOutcome outcome) {
  switch (outcome) {
    case PaymentOutcome::Succeeded: return "succeeded";
    case PaymentOutcome::Failed: return "failed";
    case PaymentOutcome::Aborted: return "aborted";
    case PaymentOutcome::Rejected: return "rejected";
    case PaymentOutcome::ChannelClosed: return "channel_closed";
  }
  return "unknown";
}

void Scenario::validate() const {
  if (hops == 0) throw std::invalid_argument("htlc2: path needs at least one hop");
  if (fees.size() != hops || fractions.size() != hops)
    throw std::invalid_argument("htlc2: fees and fractions need one entry per hop");
  if (script != Script::Honest && (adversary == 0 || adversary > hops))
    throw std::invalid_argument("htlc2: adversary position must lie in [1, hops]");
  if (declines_at && (*declines_at == 0 || *declines_at > hops))
    throw std::invalid_argument("htlc2: declining position must lie in [1, hops]");
  if (!(latency > 0.0) || !(deadline > 0.0)) throw std::invalid_argument("htlc2: latency and deadline must be positive");
  if (start_interval < 0.0) throw std::invalid_argument("htlc2: negative start interval");
}

namespace {

enum class Ev : std::uint8_t { OfferMain, MainArrived, PreimageArrived, FeesLockedArrived, Deadline, AbortArrived };

struct Event {
  double time;
  std::uint64_t seq;
  Ev kind;
  std::size_t payment;
  std::size_t channel;
  Preimage token;

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    return seq > o.seq;
  }
};

struct Flight {
  PaymentSetup setup;
  bool done = false;
  PaymentOutcome outcome = PaymentOutcome::Failed;
  std::vector<std::optional<std::size_t>> main;
  std::vector<bool> unconfirmed;
  std::vector<bool> aborted;
  std::vector<bool> fee_claimed;
  std::vector<std::vector<std::size_t>> fee_contracts;  // by beneficiary
};

class Engine {
 public:
  explicit Engine(const Scenario& s) : s_(s), n_(s.hops) {
    report_.parties.resize(n_ + 1);
    channels_.resize(n_);
  }

  RunReport run() {
    for (std::size_t p = 0; p < s_.payments; ++p) {
      std::seed_seq seq{static_cast<std::uint32_t>(s_.seed), static_cast<std::uint32_t>(s_.seed >> 32),
                        static_cast<std::uint32_t>(p)};
      std::mt19937_64 derive(seq);
      Flight f;
      f.setup = setup_payment(s_.amount, s_.fees, s_.fractions, derive());
      if (s_.script == Script::SourceWrongPreimage && n_ > 1) {
        std::vector<Preimage> entries = f.setup.hop_secrets;
        entries[s_.adversary - 1].token ^= 1;
        f.setup.onion = OnionPayload(entries);
      }
      f.main.resize(n_);
      f.unconfirmed.assign(n_, false);
      f.aborted.assign(n_, false);
      f.fee_claimed.assign(n_, false);
      f.fee_contracts.resize(n_);
      flights_.push_back(std::move(f));
      push(static_cast<double>(p) * s_.start_interval, Ev::OfferMain, p, 0);
    }

    while (!queue_.empty()) {
      Event e = queue_.top();
      queue_.pop();
      now_ = e.time;
      if (flights_[e.payment].done) continue;
      switch (e.kind) {
        case Ev::OfferMain: offer_main(e.payment, e.channel); break;
        case Ev::MainArrived: main_arrived(e.payment, e.channel); break;
        case Ev::PreimageArrived: preimage_arrived(e.payment, e.channel, e.token); break;
        case Ev::FeesLockedArrived: fees_locked_arrived(e.payment, e.channel); break;
        case Ev::Deadline: deadline(e.payment, e.channel); break;
        case Ev::AbortArrived: abort_arrived(e.payment, e.channel); break;
      }
    }

    for (const Flight& f : flights_) {
      report_.outcomes.push_back(f.outcome);
      report_.setups.push_back(f.setup);
    }
    for (const ChannelState& ch : channels_) report_.channel_open.push_back(ch.open);
    return std::move(report_);
  }

 private:
  void push(double time, Ev kind, std::size_t payment, std::size_t channel, Preimage token = {}) {
    queue_.push(Event{time, seq_++, kind, payment, channel, token});
  }

  void trace(const char* event, std::size_t payment, std::size_t party, std::optional<std::size_t> channel = {},
             std::optional<std::size_t> contract = {}) {
    report_.trace.push_back({now_, event, payment, channel, contract, party});
  }

  std::size_t open_contract(std::size_t payment, std::size_t channel, Role role, std::size_t beneficiary,
                            Satoshi amount, std::vector<HashLock> locks) {
    Contract c;
    c.id = contracts_.size();
    c.payment = payment;
    c.channel = channel;
    c.role = role;
    c.beneficiary = beneficiary;
    c.amount = amount;
    c.locks = std::move(locks);
    c.timelock = static_cast<Blocks>(n_ - channel) * s_.timelock_delta;
    contracts_.push_back(c);
    channels_[channel].pending.push_back(c.id);
    return c.id;
  }

  void release(Contract& c, ContractState to) {
    c.state = to;
    auto& pending = channels_[c.channel].pending;
    pending.erase(std::remove(pending.begin(), pending.end(), c.id), pending.end());
  }

  void settle(Contract& c) {
    release(c, ContractState::Claimed);
    report_.parties[c.channel].net -= c.amount;
    report_.parties[c.channel + 1].net += c.amount;
  }

  void clear_unconfirmed(Flight& f, std::size_t i) {
    if (!f.unconfirmed[i]) return;
    f.unconfirmed[i] = false;
    --channels_[i].unconfirmed;
  }

  void offer_main(std::size_t p, std::size_t i) {
    Flight& f = flights_[p];
    switch (admit_main(channels_[i])) {
      case Admission::RejectClosed:
        trace("reject_closed", p, i, i);
        fail(p, PaymentOutcome::ChannelClosed);
        return;
      case Admission::RejectUnconfirmed:
        trace("rule_i_reject", p, i, i);
        ++report_.rule_i_rejections;
        fail(p, PaymentOutcome::Rejected);
        return;
      case Admission::Accept: break;
    }
    std::vector<HashLock> locks{f.setup.payment_hash};
    if (n_ > 1) locks.push_back(lock_of(f.setup.hop_secrets[i]));
    std::size_t id = open_contract(p, i, Role::MainPayment, i + 1, f.setup.main_amounts[i], std::move(locks));
    f.main[i] = id;
    trace("main_lock", p, i, i, id);
    if (n_ > 1) {
      f.unconfirmed[i] = true;
      ++channels_[i].unconfirmed;
      push(now_ + s_.deadline, Ev::Deadline, p, i);
    }
    push(now_ + s_.latency, Ev::MainArrived, p, i);
  }

  // v_{i+1} sees the main payment locked in channel i.
  void main_arrived(std::size_t p, std::size_t i) {
    Flight& f = flights_[p];
    std::size_t k = i + 1;
    if (n_ == 1) {
      if (s_.declines_at) {
        trace("receiver_reject", p, k, i);
        fail(p, PaymentOutcome::Failed);
      } else {
        complete(p);
      }
      return;
    }
    if (s_.script == Script::BribedSuccessor && k == s_.adversary) {
      trace("withhold_preimage", p, k, i, f.main[i]);
      return;
    }
    std::optional<Preimage> token = f.setup.onion.extract(k);
    const Contract& main = contracts_[*f.main[i]];
    if (!token || !verify(main.locks[1], *token)) {
      trace("wrong_preimage", p, k, i, main.id);
      push(now_ + s_.latency, Ev::AbortArrived, p, i);
      return;
    }
    trace("preimage_sent", p, k, i, main.id);
    push(now_ + s_.latency, Ev::PreimageArrived, p, i, *token);
  }

  // v_i receives r_i: claims its own fee and confirms by locking the fees of v_{i+1} ...
  void preimage_arrived(std::size_t p, std::size_t i, Preimage token) {
    Flight& f = flights_[p];
    if (!verify(lock_of(f.setup.hop_secrets[i]), token))
      throw std::logic_error("htlc2: successor delivered an unverified preimage");
    clear_unconfirmed(f, i);
    trace("preimage_received", p, i, i, f.main[i]);

    if (i >= 1) {
      Preimage offered[] = {token};
      for (std::size_t c = i; c-- > 0;) {
        Contract& fee = contracts_[f.fee_contracts[i][c]];
        if (!fee.claimable_with(offered)) throw std::logic_error("htlc2: fee contract rejects its preimage");
        settle(fee);
        trace("fee_claim", p, c + 1, c, fee.id);
      }
      report_.parties[i].fee_income += f.setup.fee_plans[i - 1].amount;
      f.fee_claimed[i] = true;
    }

    for (std::size_t j = i + 1; j < n_; ++j) {
      const FeePlan& plan = f.setup.fee_plans[j - 1];
      std::size_t id = open_contract(p, i, Role::FeePayment, j, plan.amount, {plan.lock});
      f.fee_contracts[j].push_back(id);
      trace("fee_lock", p, i, i, id);
    }
    push(now_ + s_.latency, Ev::FeesLockedArrived, p, i);
  }

  // v_{i+1} sees the confirmation in channel i and decides whether to forward.
  void fees_locked_arrived(std::size_t p, std::size_t i) {
    std::size_t k = i + 1;
    if (s_.declines_at && *s_.declines_at == k) {
      trace(k == n_ ? "receiver_reject" : "decline_forward", p, k, i);
      fail(p, PaymentOutcome::Failed);
      return;
    }
    if (k == n_) {
      complete(p);
      return;
    }
    offer_main(p, k);
  }

  void deadline(std::size_t p, std::size_t i) {
    Flight& f = flights_[p];
    if (!f.unconfirmed[i]) return;
    ChannelState& ch = channels_[i];
    clear_unconfirmed(f, i);
    ch.open = false;
    ++report_.closures;
    trace("channel_close", p, i, i, f.main[i]);
    if (i >= 1) ++report_.parties[i].lost_fees;
    fail(p, PaymentOutcome::Failed);
  }

  void abort_arrived(std::size_t p, std::size_t i) {
    Flight& f = flights_[p];
    f.aborted[i] = true;
    clear_unconfirmed(f, i);
    trace("joint_abort", p, i, i, f.main[i]);
    fail(p, PaymentOutcome::Aborted);
  }

  void complete(std::size_t p) {
    Flight& f = flights_[p];
    for (std::size_t i = n_; i-- > 0;) {
      Contract& main = contracts_[*f.main[i]];
      std::vector<Preimage> offered{f.setup.receiver_secret};
      if (n_ > 1) offered.push_back(f.setup.hop_secrets[i]);
      if (!main.claimable_with(offered)) throw std::logic_error("htlc2: main contract rejects its preimages");
      settle(main);
      trace("main_claim", p, i + 1, i, main.id);
    }
    f.done = true;
    f.outcome = PaymentOutcome::Succeeded;
  }

  void fail(std::size_t p, PaymentOutcome outcome) {
    Flight& f = flights_[p];
    for (std::size_t i = 0; i < n_; ++i) clear_unconfirmed(f, i);
    for (Contract& c : contracts_) {
      if (c.payment != p || c.state != ContractState::Locked) continue;
      release(c, ContractState::Cancelled);
      trace("cancel", p, c.channel, c.channel, c.id);
    }
    for (std::size_t i = 1; i < n_; ++i)
      if (f.main[i] && !f.fee_claimed[i] && !f.aborted[i]) ++report_.unpaid_locks[{i, i}];
    f.done = true;
    f.outcome = outcome;
  }

  const Scenario& s_;
  std::size_t n_;
  RunReport report_;
  std::vector<ChannelState> channels_;
  std::vector<Contract> contracts_;
  std::vector<Flight> flights_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
};

}  // namespace

RunReport adversary_run(const Scenario& scenario) {
  scenario.validate();
  return Engine(scenario).run();
}

std::string trace_jsonl(std::span<const TraceEvent> trace) {
  std::string out;
  for (const TraceEvent& e : trace) {
    nlohmann::ordered_json j;
    j["time"] = e.time;
    j["event"] = e.event;
    j["payment"] = e.payment;
    j["channel"] = e.channel ? nlohmann::ordered_json(*e.channel) : nullptr;
    j["contract"] = e.contract ? nlohmann::ordered_json(*e.contract) : nullptr;
    j["party"] = e.party;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace pcn::htlc2
