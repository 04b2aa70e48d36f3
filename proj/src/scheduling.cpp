#include "coopsim/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace coopsim {

std::string Policy::name() const {
  switch (kind) {
    case PolicyKind::NoFusion: return "no_fusion";
    case PolicyKind::ClosestAgent: return "closest_agent";
    case PolicyKind::SingleRandom: return "single_random";
    case PolicyKind::MultipleRandom: return "multiple_random";
    case PolicyKind::FullCommunication: return "full_communication";
    case PolicyKind::HistoricalBest: return "historical_best";
    case PolicyKind::MassUcb: return "mass_ucb";
  }
  throw std::logic_error("Policy::name: bad enum");
}

Policy Policy::from_name(const std::string& name, int k, double beta) {
  Policy p;
  p.k = k;
  p.beta = beta;
  if (p.k < 1) throw std::invalid_argument("Policy: k must be >= 1");
  if (p.beta < 0.0) throw std::invalid_argument("Policy: beta must be >= 0");
  if (name == "no_fusion") p.kind = PolicyKind::NoFusion;
  else if (name == "closest_agent") p.kind = PolicyKind::ClosestAgent;
  else if (name == "single_random") p.kind = PolicyKind::SingleRandom;
  else if (name == "multiple_random") p.kind = PolicyKind::MultipleRandom;
  else if (name == "full_communication") p.kind = PolicyKind::FullCommunication;
  else if (name == "historical_best") p.kind = PolicyKind::HistoricalBest;
  else if (name == "mass_ucb") p.kind = PolicyKind::MassUcb;
  else throw std::invalid_argument("unknown policy: " + name);
  return p;
}

namespace {

std::string closest_candidate(const std::vector<std::string>& sorted,
                              const std::string& ego_id, const Frame& frame) {
  const Agent* ego = frame.find_agent(ego_id);
  if (ego == nullptr) throw std::invalid_argument("schedule: unknown ego " + ego_id);
  std::string best;
  double best_d = 0.0;
  for (const auto& cid : sorted) {
    const Agent* c = frame.find_agent(cid);
    if (c == nullptr) throw std::invalid_argument("schedule: unknown candidate " + cid);
    const double d = planar_distance(ego->pose, c->pose);
    if (best.empty() || d < best_d) {  // ties keep the smaller id (sorted order)
      best = cid;
      best_d = d;
    }
  }
  return best;
}

}  // namespace

ScheduleDecision schedule(const Policy& policy, const std::string& ego_id,
                          const std::vector<std::string>& candidates, const Frame& frame,
                          const PolicyState& state, uint64_t rng_seed) {
  std::vector<std::string> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  if (std::binary_search(sorted.begin(), sorted.end(), ego_id))
    throw std::invalid_argument("schedule: candidates must exclude the ego");

  ScheduleDecision d;
  d.ego_id = ego_id;
  d.policy = policy;
  if (policy.kind == PolicyKind::NoFusion || sorted.empty()) return d;

  switch (policy.kind) {
    case PolicyKind::ClosestAgent: {
      d.chosen.push_back(closest_candidate(sorted, ego_id, frame));
      const Agent* ego = frame.find_agent(ego_id);
      for (const auto& cid : sorted)
        d.benchmarks[cid] = -planar_distance(ego->pose, frame.find_agent(cid)->pose);
      break;
    }
    case PolicyKind::SingleRandom: {
      std::mt19937_64 rng(rng_seed);
      std::uniform_int_distribution<size_t> pick(0, sorted.size() - 1);
      d.chosen.push_back(sorted[pick(rng)]);
      break;
    }
    case PolicyKind::MultipleRandom: {
      std::mt19937_64 rng(rng_seed);
      std::vector<std::string> pool = sorted;
      const size_t k = std::min<size_t>(static_cast<size_t>(policy.k), pool.size());
      for (size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        d.chosen.push_back(pool[i]);
      }
      break;
    }
    case PolicyKind::FullCommunication:
      d.chosen = sorted;
      break;
    case PolicyKind::HistoricalBest: {
      bool any = false;
      std::string best;
      int best_gain = 0;
      for (const auto& cid : sorted) {
        const auto it = state.last_gains.find(cid);
        if (it == state.last_gains.end()) continue;
        d.benchmarks[cid] = it->second;
        if (!any || it->second > best_gain) {
          any = true;
          best = cid;
          best_gain = it->second;
        }
      }
      // no history yet: fall back to the closest agent
      d.chosen.push_back(any ? best : closest_candidate(sorted, ego_id, frame));
      break;
    }
    case PolicyKind::MassUcb: {
      std::string best;
      double best_index = 0.0;
      for (const auto& cid : sorted) {
        const auto it = state.arms.find(cid);
        if (it == state.arms.end() || it->second.pulls == 0) {
          best = cid;  // unpulled arms first, smallest id
          d.benchmarks[cid] = std::numeric_limits<double>::infinity();
          break;
        }
      }
      if (best.empty()) {
        const double t = std::max<double>(1.0, static_cast<double>(state.rounds));
        for (const auto& cid : sorted) {
          const ArmStats& a = state.arms.at(cid);
          const double idx =
              a.mean_gain + policy.beta * std::sqrt(2.0 * std::log(t) / a.pulls);
          d.benchmarks[cid] = idx;
          if (best.empty() || idx > best_index) {
            best = cid;
            best_index = idx;
          }
        }
      }
      d.chosen.push_back(best);
      break;
    }
    default:
      throw std::logic_error("schedule: unhandled policy");
  }
  return d;
}

void update_state(PolicyState& state, const ScheduleDecision& decision,
                  const std::map<std::string, int>& realized_gains,
                  const std::optional<std::map<std::string, int>>& handshake_gains) {
  for (const auto& [cid, gain] : realized_gains) {
    (void)gain;
    if (std::find(decision.chosen.begin(), decision.chosen.end(), cid) ==
        decision.chosen.end())
      throw std::invalid_argument("update_state: gain reported for unchosen candidate " + cid);
  }
  for (const auto& cid : decision.chosen)
    if (realized_gains.find(cid) == realized_gains.end())
      throw std::invalid_argument("update_state: missing gain for chosen candidate " + cid);

  state.rounds += 1;
  for (const auto& cid : decision.chosen) {
    ArmStats& a = state.arms[cid];
    a.pulls += 1;
    a.mean_gain += (realized_gains.at(cid) - a.mean_gain) / static_cast<double>(a.pulls);
  }
  if (!decision.chosen.empty()) state.last_cooperator = decision.chosen.front();
  if (handshake_gains.has_value()) state.last_gains = *handshake_gains;
}

}  // namespace coopsim
