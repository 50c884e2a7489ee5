#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcnsim/types.hpp"

namespace pcn {

// Fee model selecting the non-refundable fraction rule and lock utility.
enum class FeeModel : std::uint8_t {
  Original,         // fees refunded on failure, x = 0
  ModGuaranteed,    // x = c / f, intermediaries with funds always lock
  ModIncentivized,  // x = x~ + d from the sender's beliefs
};

const char* to_string(FeeModel model);
// Accepts "original", "guaranteed", "incentivized" and the enum spellings.
std::optional<FeeModel> parse_fee_model(std::string_view text);

struct HopEconomics {
  Satoshi fee = 0;
  double collateral_cost = 0.0;
  double nonrefundable_fraction = 0.0;
  Satoshi amount = 0;
  Blocks cumulative_timelock = 0;
};

enum class Move : std::uint8_t { Lock, NotLock, Reveal, Withhold };

const char* to_string(Move move);

struct LockDecision {
  Move move = Move::NotLock;
  double expected_utility = 0.0;
};

// Worst-case opportunity cost of locking: timelock * amount * risk.
double collateral_cost(Blocks cumulative_timelock, Satoshi amount, double risk_factor);

// p (f - c) - (1 - p) c, i.e. p f - c.
double utility_lock_original(double p_success, Satoshi fee, double collateral);

// p (f - c) + (1 - p) (x f - c).
double utility_lock_modified(double p_success, Satoshi fee, double collateral, double fraction);

// NotLock (utility 0) without funds; otherwise Lock iff the model's lock
// utility is non-negative. Indifference resolves to Lock so that x = c / f is
// accepted.
LockDecision decide_lock(FeeModel model, const HopEconomics& economics, double p_success,
                         bool balance_sufficient);

// Fraction at which the sender's estimate of the intermediary's lock utility
// is zero, clamped to [0, 1]. Zero when p~ = 1.
double xtilde(double p_tilde, Satoshi fee, double collateral);

struct SenderBeliefs {
  double p_tilde = 0.6;
  double buffer = 0.04;
};

struct FractionChoice {
  double fraction = 0.0;
  // Set when the collateral exceeds the fee so no fraction can compensate.
  bool collateral_exceeds_fee = false;
};

FractionChoice choose_fraction(FeeModel model, const HopEconomics& economics,
                               const SenderBeliefs& beliefs);

// --- Extensive-form routing game --------------------------------------------

struct GameInputs {
  // Path v_0 .. v_n has n hops. Index i refers to v_i.
  std::size_t path_length = 2;
  std::vector<Satoshi> fees;          // size n; fees[0] is ignored (sender)
  std::vector<double> collaterals;    // size n; c_0 .. c_{n-1}
  std::vector<Satoshi> amounts;       // size n; alpha_0 .. alpha_{n-1}
  std::vector<double> fractions;      // size n or empty (all zero)
  double success_utility = 0.0;       // U
};

struct GameNode {
  enum class Kind : std::uint8_t { Decision, Leaf };
  enum class Phase : std::uint8_t { Locking, Unlocking };

  Kind kind = Kind::Leaf;
  Phase phase = Phase::Locking;
  std::size_t player = 0;
  // Decision nodes: (move, child) in a fixed order (Lock/Reveal first).
  std::vector<std::pair<Move, std::size_t>> children;
  // Leaves: one utility per player v_0 .. v_n.
  std::vector<double> utilities;
};

struct GameTree {
  std::size_t players = 0;
  std::vector<GameNode> nodes;  // nodes[0] is the root
  std::size_t root() const noexcept { return 0; }
};

// Locking decisions by v_0 .. v_{n-1}, then unlocking decisions by v_n .. v_1.
// Throws std::invalid_argument if path_length < 2 or vectors are mis-sized.
GameTree build_game_tree(const GameInputs& inputs);

struct PartyBelief {
  double p_success = 1.0;   // belief that the payment succeeds after locking
  bool can_lock = true;     // false when the party lacks funds
};

struct DecisionRecord {
  std::size_t node = 0;
  std::size_t player = 0;
  GameNode::Phase phase = GameNode::Phase::Locking;
  Move move = Move::NotLock;
  double expected_utility = 0.0;  // of the chosen move, for the acting player
};

struct EquilibriumProfile {
  std::vector<DecisionRecord> decisions;  // one per decision node, tree order
  // Moves along the equilibrium play from the root.
  std::vector<DecisionRecord> play;
  std::size_t outcome_leaf = 0;
  // Locking move of v_i on the all-lock line, index i in [0, n).
  std::vector<Move> locking_moves;

  const DecisionRecord* at(std::size_t node) const;
};

// Sequentially rational solution of the tree. Unlocking nodes are solved by
// plain backward induction. At a locking node the actor does not see the rest
// of the path; it weighs the all-lock continuation by its belief p_success
// and the first failure leaf below its lock by 1 - p_success.
EquilibriumProfile backward_induct(const GameTree& tree, std::span<const PartyBelief> beliefs);

}  // namespace pcn
