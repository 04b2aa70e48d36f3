#include "coopsim/sensing.hpp"

#include <algorithm>
#include <stdexcept>

namespace coopsim {

namespace {

struct Occluder {
  const std::string* id;
  OrientedRect rect;
};

// Footprints that can block lines of sight in this frame. Obstacle agents are
// mirrored as vehicle ObjectBoxes by the engine, so only sensored agents'
// bodies are added here to avoid counting them twice.
std::vector<Occluder> collect_occluders(const Frame& frame) {
  std::vector<Occluder> occ;
  occ.reserve(frame.objects.size() + frame.agents.size());
  for (const auto& o : frame.objects) occ.push_back({&o.id, o.footprint()});
  for (const auto& a : frame.agents)
    if (a.kind != AgentKind::Obstacle) occ.push_back({&a.id, a.footprint()});
  return occ;
}

bool segment_clear(const Vec2& from, const Vec2& to, const std::vector<Occluder>& occluders,
                   const std::string& skip_a, const std::string& skip_b) {
  for (const auto& oc : occluders) {
    if (*oc.id == skip_a || *oc.id == skip_b) continue;
    if (segment_hits_rect(from, to, oc.rect)) return false;
  }
  return true;
}

}  // namespace

int CoopGraph::index_of(const std::string& id) const {
  const auto it = std::find(agent_ids.begin(), agent_ids.end(), id);
  return it == agent_ids.end() ? -1 : static_cast<int>(it - agent_ids.begin());
}

IdSet visible_objects(const Agent& agent, const Frame& frame, const VisibilityModel& model) {
  model.validate();
  if (!agent.sensored())
    throw std::invalid_argument("visible_objects: agent " + agent.id + " has no sensor");

  const Vec2 origin = agent.pose.xy();
  const auto occluders = collect_occluders(frame);
  const int k = model.samples_per_box;
  const int needed = static_cast<int>(std::ceil(model.require_fraction * k));

  IdSet visible;
  for (const auto& obj : frame.objects) {
    if (obj.id == agent.id) continue;
    if ((obj.center.xy() - origin).norm() > model.range_m) continue;
    int clear = 0;
    for (const Vec2& p : obj.footprint().boundary_points(k)) {
      if (segment_clear(origin, p, occluders, obj.id, agent.id)) {
        if (++clear >= needed) break;
      }
    }
    if (clear >= needed) visible.insert(obj.id);
  }
  return visible;
}

IdSet fused_coverage(const std::string& ego_id, const IdSet& cooperators, const Frame& frame,
                     const VisibilityModel& model) {
  if (cooperators.count(ego_id) != 0)
    throw std::invalid_argument("fused_coverage: cooperators must exclude the ego");
  const Agent* ego = frame.find_agent(ego_id);
  if (ego == nullptr) throw std::invalid_argument("fused_coverage: unknown ego " + ego_id);

  IdSet unioned = visible_objects(*ego, frame, model);
  for (const auto& cid : cooperators) {
    const Agent* c = frame.find_agent(cid);
    if (c == nullptr) throw std::invalid_argument("fused_coverage: unknown cooperator " + cid);
    const IdSet seen = visible_objects(*c, frame, model);
    unioned.insert(seen.begin(), seen.end());
  }

  // only objects inside the ego's own detection range count
  IdSet out;
  const Vec2 origin = ego->pose.xy();
  for (const auto& obj : frame.objects)
    if (unioned.count(obj.id) != 0 && (obj.center.xy() - origin).norm() <= model.range_m)
      out.insert(obj.id);
  return out;
}

int perception_gain(const std::string& ego_id, const std::string& candidate_id,
                    const Frame& frame, const VisibilityModel& model) {
  if (candidate_id == ego_id)
    throw std::invalid_argument("perception_gain: candidate must differ from ego");
  const IdSet alone = fused_coverage(ego_id, {}, frame, model);
  const IdSet with_c = fused_coverage(ego_id, {candidate_id}, frame, model);
  int gain = 0;
  for (const auto& id : with_c)
    if (alone.count(id) == 0) ++gain;
  return gain;
}

CoopGraph coop_graph(const Frame& frame, const VisibilityModel& model) {
  model.validate();
  if (frame.agents.empty()) throw std::invalid_argument("coop_graph: frame has no agents");

  CoopGraph g;
  for (const auto& a : frame.agents) g.agent_ids.push_back(a.id);
  std::sort(g.agent_ids.begin(), g.agent_ids.end());

  const size_t n = g.agent_ids.size();
  g.distance.assign(n, std::vector<double>(n, 0.0));
  g.occluded.assign(n, std::vector<uint8_t>(n, 0));

  const auto occluders = collect_occluders(frame);
  for (size_t i = 0; i < n; ++i) {
    const Agent* ai = frame.find_agent(g.agent_ids[i]);
    for (size_t j = i + 1; j < n; ++j) {
      const Agent* aj = frame.find_agent(g.agent_ids[j]);
      const double d = planar_distance(ai->pose, aj->pose);
      const bool blocked =
          !segment_clear(ai->pose.xy(), aj->pose.xy(), occluders, ai->id, aj->id);
      g.distance[i][j] = g.distance[j][i] = d;
      g.occluded[i][j] = g.occluded[j][i] = blocked ? 1 : 0;
    }
  }
  return g;
}

}  // namespace coopsim
