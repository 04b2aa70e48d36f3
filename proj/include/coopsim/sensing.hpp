#pragma once
// Geometric visibility oracle: occlusion-aware visible sets, fused coverage,
// per-candidate perception gain, and the inter-agent distance/occlusion graph.

#include <set>
#include <string>
#include <vector>

#include "coopsim/types.hpp"

namespace coopsim {

struct VisibilityModel {
  double range_m = 50.0;
  int samples_per_box = 8;         // K boundary sample points per footprint
  double require_fraction = 0.125;  // fraction of clear points needed, in (0,1]

  void validate() const {
    if (samples_per_box < 4) throw std::invalid_argument("VisibilityModel: K must be >= 4");
    if (require_fraction <= 0.0 || require_fraction > 1.0)
      throw std::invalid_argument("VisibilityModel: require_fraction must be in (0,1]");
    if (range_m <= 0.0) throw std::invalid_argument("VisibilityModel: range must be > 0");
  }
};

using IdSet = std::set<std::string>;

struct VisibilitySet {
  std::map<std::string, IdSet> by_agent;  // agent id -> visible object ids
};

struct CoopGraph {
  std::vector<std::string> agent_ids;               // sorted
  std::vector<std::vector<double>> distance;         // [i][j] planar meters
  std::vector<std::vector<uint8_t>> occluded;        // [i][j] line of sight blocked

  int index_of(const std::string& id) const;
};

// Object ids visible to the agent: in range and with enough unobstructed
// boundary sample points. Throws for sensorless agents.
IdSet visible_objects(const Agent& agent, const Frame& frame, const VisibilityModel& model);

// Union of visible sets over ego and cooperators, restricted to the ego's range.
IdSet fused_coverage(const std::string& ego_id, const IdSet& cooperators, const Frame& frame,
                     const VisibilityModel& model);

// New in-range objects the candidate contributes on top of the ego's own view.
int perception_gain(const std::string& ego_id, const std::string& candidate_id,
                    const Frame& frame, const VisibilityModel& model);

// Pairwise agent distances and line-of-sight occlusion flags.
CoopGraph coop_graph(const Frame& frame, const VisibilityModel& model);

}  // namespace coopsim
