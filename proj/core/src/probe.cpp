#include "pcnsim/probe.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pcnsim/pathfinding.hpp"
#include "pcnsim/sim.hpp"

namespace pcn {

namespace {

// Fixed indices in the three-node probe path.
constexpr NodeIndex kAttacker = 0;
constexpr NodeIndex kTarget = 1;
constexpr DirectedChannel kFirstHop{0, Direction::Forward};
constexpr DirectedChannel kTargetHop{1, Direction::Forward};

}  // namespace

void ProbeScenario::validate() const {
  if (capacity < 0) throw std::invalid_argument("probe: capacity must be non-negative");
  if (balance < 0 || balance > capacity) throw std::invalid_argument("probe: balance must lie in [0, C]");
  if (timelock < 0) throw std::invalid_argument("probe: timelock must be non-negative");
  if (!(delay_max >= delay_min) || !(delay_min >= 0.0))
    throw std::invalid_argument("probe: delay range must be non-empty");
  beliefs.validate();
}

ProbeSession::ProbeSession(const ProbeScenario& scenario)
    : scenario_(scenario), beliefs_(scenario.beliefs), rng_(scenario.seed) {
  scenario.validate();
}

ProbeOutcome ProbeSession::probe_once(Satoshi amount) {
  if (amount < 0 || amount > scenario_.capacity) throw std::invalid_argument("probe: amount outside [0, C]");
  std::uniform_real_distribution<Minutes> delay(scenario_.delay_min, scenario_.delay_max);
  now_ += delay(rng_);

  ProbeOutcome out;
  out.fee = hop_fee(scenario_.target_params, amount);
  double c = collateral_cost(scenario_.timelock, amount, scenario_.risk_factor);
  HopEconomics econ{out.fee, c, 0.0, amount, scenario_.timelock};
  SenderBeliefs sb{
      beliefs_.success_estimate({kAttacker, kFirstHop, ObservationKind::SenderPostLockFailure}, now_),
      beliefs_.sender_buffer(kAttacker, kFirstHop, now_)};
  out.fraction = choose_fraction(scenario_.fee_model, econ, sb).fraction;
  econ.nonrefundable_fraction = out.fraction;
  out.target_p_success =
      beliefs_.success_estimate({kTarget, kTargetHop, ObservationKind::IntermediaryDownstreamFailure}, now_);

  bool funded = amount <= scenario_.balance;
  out.locked = decide_lock(scenario_.fee_model, econ, out.target_p_success, funded).move == Move::Lock;
  if (out.locked) {
    out.cost = static_cast<Satoshi>(std::floor(out.fraction * static_cast<double>(out.fee) + 0.5));
    beliefs_.record_failure({kTarget, kTargetHop, ObservationKind::IntermediaryDownstreamFailure}, now_);
    beliefs_.record_failure({kAttacker, kFirstHop, ObservationKind::SenderPostLockFailure}, now_);
  } else {
    beliefs_.record_failure({kAttacker, kFirstHop, ObservationKind::SenderRefusalToLock}, now_);
  }
  return out;
}

ProbeResult binary_search_balance(const ProbeScenario& scenario, Satoshi granularity) {
  if (granularity < 1) throw std::invalid_argument("probe: granularity must be at least 1");
  ProbeSession session(scenario);
  ProbeResult r;
  r.low = 0;
  r.high = scenario.capacity + 1;
  while (r.high - r.low > granularity) {
    Satoshi mid = r.low + (r.high - r.low) / 2;
    ProbeOutcome o = session.probe_once(mid);
    ++r.iterations;
    r.total_cost += o.cost;
    if (o.locked) r.low = mid;
    else r.high = mid;
  }
  return r;
}

std::vector<CostPoint> cost_curve(const ProbeScenario& scenario, std::span<const Satoshi> balances,
                                  Satoshi granularity) {
  std::vector<CostPoint> points;
  points.reserve(balances.size());
  for (std::size_t i = 0; i < balances.size(); ++i) {
    ProbeScenario s = scenario;
    s.balance = balances[i];
    std::seed_seq seq{static_cast<std::uint32_t>(scenario.seed), static_cast<std::uint32_t>(scenario.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 derive(seq);
    s.seed = derive();
    ProbeResult r = binary_search_balance(s, granularity);
    points.push_back({balances[i], r.iterations, r.total_cost, 0.0});
  }
  for (CostPoint& p : points) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const CostPoint& q : points) {
      if (std::llabs(q.balance - p.balance) * 2 <= kCostWindow) {
        sum += static_cast<double>(q.cost);
        ++count;
      }
    }
    p.window_mean_cost = sum / static_cast<double>(count);
  }
  return points;
}

std::string cost_curve_csv(std::span<const CostPoint> points) {
  std::ostringstream out;
  out << "B,iterations,cost_sat,window_mean_cost\n";
  for (const CostPoint& p : points)
    out << p.balance << ',' << p.iterations << ',' << p.cost << ',' << format_number(p.window_mean_cost) << '\n';
  return out.str();
}

std::vector<Satoshi> even_balances(Satoshi capacity, std::size_t count) {
  std::vector<Satoshi> out;
  if (count == 0) return out;
  if (count == 1) return {0};
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(static_cast<Satoshi>((static_cast<long double>(capacity) * i) / (count - 1)));
  return out;
}

}  // namespace pcn
