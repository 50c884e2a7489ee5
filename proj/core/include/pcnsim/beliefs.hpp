#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "pcnsim/types.hpp"

namespace pcn {

class Network;

// What a recorded failure tells the observer, and therefore which success
// probability it feeds:
//  - IntermediaryDownstreamFailure: the observer locked on `hop` and the
//    payment later failed (intermediary's own p_S).
//  - SenderPostLockFailure: a payment sent by the observer failed after the
//    hop's owner locked (sender's estimate of that intermediary's p_S).
//  - SenderRefusalToLock: the hop's owner refused to lock a payment sent by
//    the observer (sender's estimate that the intermediary locks).
enum class ObservationKind : std::uint8_t {
  IntermediaryDownstreamFailure,
  SenderPostLockFailure,
  SenderRefusalToLock,
};

const char* to_string(ObservationKind kind);

struct ObservationKey {
  NodeIndex observer = 0;
  DirectedChannel hop;
  ObservationKind kind = ObservationKind::IntermediaryDownstreamFailure;

  friend auto operator<=>(const ObservationKey&, const ObservationKey&) = default;
};

struct BeliefParams {
  double apriori = 0.6;
  Minutes half_life_intermediary = 30.0;
  // Sender half-life = tau * intermediary half-life; senders see fewer failures.
  double tau = 2.0;

  Minutes half_life_sender() const noexcept { return tau * half_life_intermediary; }
  Minutes half_life(ObservationKind kind) const noexcept {
    return kind == ObservationKind::IntermediaryDownstreamFailure ? half_life_intermediary
                                                                   : half_life_sender();
  }
  void validate() const;
};

class ClockRegressionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Last-failure memory of a party. Only the most recent failure per key is
// kept; success never clears a record, recovery comes from time decay.
class BeliefStore {
 public:
  explicit BeliefStore(BeliefParams params = {});

  const BeliefParams& params() const noexcept { return params_; }

  // Overwrites the key's last failure time. Times must be non-decreasing
  // across all calls on this store.
  void record_failure(const ObservationKey& key, Minutes time);

  std::optional<Minutes> last_failure(const ObservationKey& key) const;

  // Decayed success probability for `key` at `now`, using the half-life that
  // matches the key's kind. Apriori when nothing was recorded.
  double success_estimate(const ObservationKey& key, Minutes now) const;

  // Buffer the sender adds on top of its zero-utility fraction for the owner
  // of `hop`: 0.1 * (1 - P), P from the sender's refusal observations.
  double sender_buffer(NodeIndex sender, DirectedChannel hop, Minutes now) const;

  std::size_t size() const noexcept { return last_failure_.size(); }

  // Debug dump: one object per key with observer, channel, from, to, kind, time.
  std::string dump_json(const Network& network) const;

 private:
  BeliefParams params_;
  std::map<ObservationKey, Minutes> last_failure_;
  std::optional<Minutes> latest_;
};

inline constexpr double kBufferScale = 0.1;

}  // namespace pcn
