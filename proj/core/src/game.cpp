#include "pcnsim/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace pcn {

const char* to_string(FeeModel model) {
  switch (model) {
    case FeeModel::Original: return "Original";
    case FeeModel::ModGuaranteed: return "ModGuaranteed";
    case FeeModel::ModIncentivized: return "ModIncentivized";
  }
  return "unknown";
}

std::optional<FeeModel> parse_fee_model(std::string_view text) {
  if (text == "original" || text == "Original") return FeeModel::Original;
  if (text == "guaranteed" || text == "ModGuaranteed") return FeeModel::ModGuaranteed;
  if (text == "incentivized" || text == "ModIncentivized") return FeeModel::ModIncentivized;
  return std::nullopt;
}

const char* to_string(Move move) {
  switch (move) {
    case Move::Lock: return "L";
    case Move::NotLock: return "NL";
    case Move::Reveal: return "H";
    case Move::Withhold: return "DH";
  }
  return "?";
}

double collateral_cost(Blocks cumulative_timelock, Satoshi amount, double risk_factor) {
  return static_cast<double>(cumulative_timelock) * static_cast<double>(amount) * risk_factor;
}

double utility_lock_original(double p_success, Satoshi fee, double collateral) {
  double f = static_cast<double>(fee);
  return p_success * (f - collateral) - (1.0 - p_success) * collateral;
}

double utility_lock_modified(double p_success, Satoshi fee, double collateral, double fraction) {
  double f = static_cast<double>(fee);
  return p_success * (f - collateral) + (1.0 - p_success) * (fraction * f - collateral);
}

namespace {

// x = c / f reproduces c only up to rounding; treat that residue as zero.
bool accepts(double utility, Satoshi fee) {
  return utility >= -1e-12 * std::max(1.0, static_cast<double>(fee));
}

}  // namespace

LockDecision decide_lock(FeeModel model, const HopEconomics& economics, double p_success,
                         bool balance_sufficient) {
  if (!balance_sufficient) return {Move::NotLock, 0.0};
  double u = model == FeeModel::Original
                 ? utility_lock_original(p_success, economics.fee, economics.collateral_cost)
                 : utility_lock_modified(p_success, economics.fee, economics.collateral_cost,
                                         economics.nonrefundable_fraction);
  return {accepts(u, economics.fee) ? Move::Lock : Move::NotLock, u};
}

double xtilde(double p_tilde, Satoshi fee, double collateral) {
  if (fee <= 0) throw std::invalid_argument("xtilde: fee must be positive");
  if (p_tilde >= 1.0) return 0.0;
  double f = static_cast<double>(fee);
  double x = (collateral - p_tilde * f) / ((1.0 - p_tilde) * f);
  return std::clamp(x, 0.0, 1.0);
}

FractionChoice choose_fraction(FeeModel model, const HopEconomics& economics,
                               const SenderBeliefs& beliefs) {
  if (model == FeeModel::Original) return {};
  double c = economics.collateral_cost;
  if (economics.fee <= 0) return {c > 0.0 ? 1.0 : 0.0, c > 0.0};

  double f = static_cast<double>(economics.fee);
  bool exceeds = c > f;
  if (model == FeeModel::ModGuaranteed) return {std::min(1.0, c / f), exceeds};
  return {std::min(1.0, xtilde(beliefs.p_tilde, economics.fee, c) + beliefs.buffer), exceeds};
}

// --- game tree ---------------------------------------------------------------

namespace {

class TreeBuilder {
 public:
  explicit TreeBuilder(const GameInputs& in) : in_(in), n_(in.path_length) {
    tree_.players = n_ + 1;
  }

  GameTree build() {
    lock_node(0);
    return std::move(tree_);
  }

 private:
  double nonrefundable(std::size_t j) const {
    if (in_.fractions.empty() || j == 0) return 0.0;
    return in_.fractions[j] * static_cast<double>(in_.fees[j]);
  }
  double fee(std::size_t j) const { return static_cast<double>(in_.fees[j]); }
  double alpha() const { return static_cast<double>(in_.amounts[n_ - 1]); }

  std::size_t add(GameNode node) {
    tree_.nodes.push_back(std::move(node));
    return tree_.nodes.size() - 1;
  }

  std::size_t leaf(std::vector<double> u) {
    GameNode node;
    node.kind = GameNode::Kind::Leaf;
    node.utilities = std::move(u);
    return add(std::move(node));
  }

  // v_i refuses: everyone before v_i has locked and the payment fails.
  std::size_t refusal_leaf(std::size_t i) {
    std::vector<double> u(n_ + 1, 0.0);
    if (i == 0) return leaf(std::move(u));
    u[0] = -in_.collaterals[0];
    for (std::size_t j = 1; j < i; ++j) {
      u[j] = nonrefundable(j) - in_.collaterals[j];
      u[0] -= nonrefundable(j);
    }
    return leaf(std::move(u));
  }

  // v_k withholds the secret after the whole path locked.
  std::size_t withhold_leaf(std::size_t k) {
    std::vector<double> u(n_ + 1, 0.0);
    u[0] = -in_.collaterals[0];
    for (std::size_t j = 1; j < n_; ++j) u[0] -= nonrefundable(j);
    for (std::size_t j = 1; j < n_; ++j) {
      if (j < k) u[j] = nonrefundable(j) - in_.collaterals[j];
      else if (j == k) u[j] = nonrefundable(j) - in_.collaterals[j] - static_cast<double>(in_.amounts[j]);
      else u[j] = fee(j) - in_.collaterals[j];
    }
    u[n_] = k == n_ ? 0.0 : in_.success_utility;
    return leaf(std::move(u));
  }

  std::size_t success_leaf() {
    std::vector<double> u(n_ + 1, 0.0);
    double fees = 0.0;
    for (std::size_t j = 1; j < n_; ++j) {
      u[j] = fee(j) - in_.collaterals[j];
      fees += fee(j);
    }
    u[0] = in_.success_utility - in_.collaterals[0] - fees - alpha();
    u[n_] = in_.success_utility;
    return leaf(std::move(u));
  }

  std::size_t lock_node(std::size_t i) {
    GameNode node;
    node.kind = GameNode::Kind::Decision;
    node.phase = GameNode::Phase::Locking;
    node.player = i;
    std::size_t id = add(std::move(node));
    std::size_t on_lock = i + 1 < n_ ? lock_node(i + 1) : unlock_node(n_);
    std::size_t on_refuse = refusal_leaf(i);
    tree_.nodes[id].children = {{Move::Lock, on_lock}, {Move::NotLock, on_refuse}};
    return id;
  }

  std::size_t unlock_node(std::size_t k) {
    GameNode node;
    node.kind = GameNode::Kind::Decision;
    node.phase = GameNode::Phase::Unlocking;
    node.player = k;
    std::size_t id = add(std::move(node));
    std::size_t on_reveal = k > 1 ? unlock_node(k - 1) : success_leaf();
    std::size_t on_withhold = withhold_leaf(k);
    tree_.nodes[id].children = {{Move::Reveal, on_reveal}, {Move::Withhold, on_withhold}};
    return id;
  }

  const GameInputs& in_;
  std::size_t n_;
  GameTree tree_;
};

}  // namespace

GameTree build_game_tree(const GameInputs& inputs) {
  std::size_t n = inputs.path_length;
  if (n < 2) throw std::invalid_argument("build_game_tree: path length must be at least 2");
  if (inputs.fees.size() != n || inputs.collaterals.size() != n || inputs.amounts.size() != n)
    throw std::invalid_argument("build_game_tree: fees, collaterals and amounts need one entry per hop");
  if (!inputs.fractions.empty() && inputs.fractions.size() != n)
    throw std::invalid_argument("build_game_tree: fractions need one entry per hop");
  return TreeBuilder(inputs).build();
}

const DecisionRecord* EquilibriumProfile::at(std::size_t node) const {
  for (const DecisionRecord& d : decisions)
    if (d.node == node) return &d;
  return nullptr;
}

namespace {

class Solver {
 public:
  Solver(const GameTree& tree, std::span<const PartyBelief> beliefs)
      : tree_(tree), beliefs_(beliefs), value_(tree.nodes.size()), choice_(tree.nodes.size()) {}

  EquilibriumProfile run() {
    solve(tree_.root());
    EquilibriumProfile out;
    for (std::size_t id = 0; id < tree_.nodes.size(); ++id) {
      const GameNode& node = tree_.nodes[id];
      if (node.kind != GameNode::Kind::Decision) continue;
      out.decisions.push_back(record(id));
    }
    std::size_t at = tree_.root();
    while (tree_.nodes[at].kind == GameNode::Kind::Decision) {
      out.play.push_back(record(at));
      at = child(at, choice_[at]);
    }
    out.outcome_leaf = at;
    for (at = tree_.root(); tree_.nodes[at].kind == GameNode::Kind::Decision &&
                            tree_.nodes[at].phase == GameNode::Phase::Locking;
         at = child(at, Move::Lock))
      out.locking_moves.push_back(choice_[at]);
    return out;
  }

 private:
  DecisionRecord record(std::size_t id) const {
    const GameNode& node = tree_.nodes[id];
    return DecisionRecord{id, node.player, node.phase, choice_[id], chosen_eu_.count(id) ? chosen_eu_.at(id) : 0.0};
  }

  std::size_t child(std::size_t id, Move m) const {
    for (const auto& [move, c] : tree_.nodes[id].children)
      if (move == m) return c;
    throw std::logic_error("game tree node lacks move");
  }

  // First leaf reached below `id` along the lock line where the successor
  // refuses, or the receiver withholds when `id` is the last locker.
  std::size_t first_failure_below(std::size_t id) const {
    std::size_t next = child(id, Move::Lock);
    const GameNode& n = tree_.nodes[next];
    return child(next, n.phase == GameNode::Phase::Locking ? Move::NotLock : Move::Withhold);
  }

  const std::vector<double>& solve(std::size_t id) {
    const GameNode& node = tree_.nodes[id];
    if (node.kind == GameNode::Kind::Leaf) return value_[id] = node.utilities;

    std::size_t p = node.player;
    if (node.phase == GameNode::Phase::Unlocking) {
      Move best = node.children.front().first;
      double best_u = -std::numeric_limits<double>::infinity();
      for (const auto& [move, c] : node.children) {
        double u = solve(c)[p];
        if (u > best_u) {
          best_u = u;
          best = move;
        }
      }
      choice_[id] = best;
      chosen_eu_[id] = best_u;
      return value_[id] = value_[child(id, best)];
    }

    // Locking: solve the continuation first so the success outcome is known.
    const std::vector<double>& cont = solve(child(id, Move::Lock));
    std::vector<double> continuation = cont;
    const std::vector<double>& refuse = solve(child(id, Move::NotLock));
    const PartyBelief& belief = beliefs_[p];
    Move move = Move::NotLock;
    double eu = refuse[p];
    if (belief.can_lock) {
      const std::vector<double>& success = lock_line_value(id);
      const std::vector<double>& failure = tree_.nodes[first_failure_below(id)].utilities;
      double lock_eu = belief.p_success * success[p] + (1.0 - belief.p_success) * failure[p];
      double scale = std::max({1.0, std::abs(success[p]), std::abs(failure[p])});
      if (lock_eu - refuse[p] >= -1e-12 * scale) {
        move = Move::Lock;
        eu = lock_eu;
      }
    }
    choice_[id] = move;
    chosen_eu_[id] = eu;
    return value_[id] = move == Move::Lock ? continuation : value_[child(id, Move::NotLock)];
  }

  // Outcome if every later locker locks and the unlocking phase plays out.
  const std::vector<double>& lock_line_value(std::size_t id) {
    std::size_t at = child(id, Move::Lock);
    while (tree_.nodes[at].phase == GameNode::Phase::Locking &&
           tree_.nodes[at].kind == GameNode::Kind::Decision)
      at = child(at, Move::Lock);
    return value_[at];
  }

  const GameTree& tree_;
  std::span<const PartyBelief> beliefs_;
  std::vector<std::vector<double>> value_;
  std::vector<Move> choice_;
  std::map<std::size_t, double> chosen_eu_;
};

}  // namespace

EquilibriumProfile backward_induct(const GameTree& tree, std::span<const PartyBelief> beliefs) {
  if (beliefs.size() < tree.players)
    throw std::invalid_argument("backward_induct: need one belief per player");
  return Solver(tree, beliefs).run();
}

}  // namespace pcn
