#pragma once
// Scheduling-policy family: no fusion, closest agent, random single/multi,
// full communication, historical best (handshake) and UCB bandit selection.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coopsim/types.hpp"

namespace coopsim {

enum class PolicyKind {
  NoFusion,
  ClosestAgent,
  SingleRandom,
  MultipleRandom,
  FullCommunication,
  HistoricalBest,
  MassUcb
};

struct Policy {
  PolicyKind kind = PolicyKind::NoFusion;
  int k = 1;          // MultipleRandom
  double beta = 1.0;  // MassUcb exploration weight

  std::string name() const;
  static Policy from_name(const std::string& name, int k = 1, double beta = 1.0);
  bool uses_handshake() const { return kind == PolicyKind::HistoricalBest; }
};

struct ArmStats {
  long pulls = 0;
  double mean_gain = 0.0;
};

struct PolicyState {
  std::map<std::string, ArmStats> arms;  // per candidate
  long rounds = 0;                       // t
  std::string last_cooperator;
  std::map<std::string, int> last_gains;  // previous frame's handshake benchmarks
};

struct ScheduleDecision {
  std::string ego_id;
  std::vector<std::string> chosen;  // ordered
  Policy policy;
  std::map<std::string, double> benchmarks;  // values the choice was based on
};

// Chooses cooperators for the ego. Deterministic given (state, frame, seed);
// ties always break toward the smallest candidate id. An empty candidate set
// degenerates to a stand-alone decision for every policy.
ScheduleDecision schedule(const Policy& policy, const std::string& ego_id,
                          const std::vector<std::string>& candidates, const Frame& frame,
                          const PolicyState& state, uint64_t rng_seed);

// Advances bandit/history bookkeeping after a round. realized_gains must cover
// exactly the chosen candidates. handshake_gains, when present, replaces the
// last-frame gain table (handshake-based rounds only).
void update_state(PolicyState& state, const ScheduleDecision& decision,
                  const std::map<std::string, int>& realized_gains,
                  const std::optional<std::map<std::string, int>>& handshake_gains = std::nullopt);

}  // namespace coopsim
