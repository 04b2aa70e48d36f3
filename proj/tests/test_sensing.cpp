#include <doctest.h>

#include <random>

#include "coopsim/sensing.hpp"

using namespace coopsim;

namespace {

ObjectBox vehicle(const std::string& id, double x, double y, double yaw = 0.0,
                  BoxSize size = {4.6, 1.9, 1.6}) {
  return ObjectBox::make(id, ObjectClass::Vehicle, Pose::at(x, y, 0.0, yaw), size);
}

Agent cav(const std::string& id, double x, double y, double yaw = 0.0) {
  return Agent::make(id, AgentKind::UncontrolledCav, Pose::at(x, y, 0.0, yaw));
}

// Independent brute-force oracle: an object is visible iff in range and at
// least one boundary point has a clear segment to the sensor, checked against
// every footprint directly.
bool oracle_visible(const Agent& sensor, const ObjectBox& target, const Frame& frame,
                    const VisibilityModel& model) {
  const Vec2 origin = sensor.pose.xy();
  if ((target.center.xy() - origin).norm() > model.range_m) return false;
  std::vector<std::pair<std::string, OrientedRect>> occ;
  for (const auto& o : frame.objects) occ.emplace_back(o.id, o.footprint());
  for (const auto& a : frame.agents)
    if (a.kind != AgentKind::Obstacle) occ.emplace_back(a.id, a.footprint());
  const int needed =
      static_cast<int>(std::ceil(model.require_fraction * model.samples_per_box));
  int clear = 0;
  for (const Vec2& p : target.footprint().boundary_points(model.samples_per_box)) {
    bool blocked = false;
    for (const auto& [id, rect] : occ) {
      if (id == target.id || id == sensor.id) continue;
      if (segment_hits_rect(origin, p, rect)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) ++clear;
  }
  return clear >= needed;
}

Frame random_frame(uint64_t seed, int n_agents, int n_objects) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-45.0, 45.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  Frame f;
  for (int i = 0; i < n_agents; ++i)
    f.agents.push_back(cav("cav0" + std::to_string(i), pos(rng), pos(rng), ang(rng)));
  for (int i = 0; i < n_objects; ++i)
    f.objects.push_back(vehicle("obj0" + std::to_string(i), pos(rng), pos(rng), ang(rng)));
  return f;
}

}  // namespace

TEST_CASE("single object in range with no occluders is visible") {
  Frame f;
  f.agents.push_back(cav("cav00", 0, 0));
  f.objects.push_back(vehicle("obj00", 10, 0));
  CHECK(visible_objects(f.agents[0], f, VisibilityModel{}).count("obj00") == 1);
}

TEST_CASE("object fully behind a larger object on the same ray is hidden") {
  Frame f;
  f.agents.push_back(cav("cav00", 0, 0));
  f.objects.push_back(vehicle("wall", 5, 0, kPi / 2, {12.0, 3.0, 3.0}));  // broadside truck
  f.objects.push_back(vehicle("hidden", 10, 0, 0, {1.0, 1.0, 1.0}));
  const auto vis = visible_objects(f.agents[0], f, VisibilityModel{});
  CHECK(vis.count("wall") == 1);
  CHECK(vis.count("hidden") == 0);
  // agreement with the segment-polygon oracle on this layout
  CHECK_FALSE(oracle_visible(f.agents[0], f.objects[1], f, VisibilityModel{}));
}

TEST_CASE("range gate wins regardless of occlusion") {
  Frame f;
  f.agents.push_back(cav("cav00", 0, 0));
  f.objects.push_back(vehicle("far", 50.01, 0));
  CHECK(visible_objects(f.agents[0], f, VisibilityModel{}).empty());
}

TEST_CASE("obstacle agents cannot sense") {
  Frame f;
  f.agents.push_back(Agent::make("obs00", AgentKind::Obstacle, Pose::at(0, 0)));
  CHECK_THROWS_AS(visible_objects(f.agents[0], f, VisibilityModel{}), std::invalid_argument);
}

TEST_CASE("visibility matches the brute-force oracle on random frames") {
  const VisibilityModel model{};
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const Frame f = random_frame(seed, 3, 12);
    for (const auto& a : f.agents) {
      const auto vis = visible_objects(a, f, model);
      for (const auto& o : f.objects)
        CHECK(static_cast<bool>(vis.count(o.id)) == oracle_visible(a, o, f, model));
    }
  }
}

TEST_CASE("fused coverage semantics") {
  Frame f;
  f.agents.push_back(cav("cav00", 0, 0));
  f.agents.push_back(cav("cav01", 20, 0));
  f.agents.push_back(cav("cav02", 0, 20));
  f.objects.push_back(vehicle("obj00", 10, 0));
  f.objects.push_back(vehicle("obj01", 20, 10));
  f.objects.push_back(vehicle("obj02", 45, 45));  // outside cav00's 50 m range? ~63.6 m: yes
  const VisibilityModel model{};

  SUBCASE("no cooperators equals the ego's own view") {
    CHECK(fused_coverage("cav00", {}, f, model) == visible_objects(f.agents[0], f, model));
  }
  SUBCASE("full set is a superset of every single-cooperator result") {
    const IdSet all = fused_coverage("cav00", {"cav01", "cav02"}, f, model);
    for (const std::string c : {"cav01", "cav02"}) {
      for (const auto& id : fused_coverage("cav00", {c}, f, model)) CHECK(all.count(id) == 1);
    }
  }
  SUBCASE("matches brute-force union then range filter") {
    IdSet expected;
    for (const Agent& a : f.agents)
      for (const auto& id : visible_objects(a, f, model)) expected.insert(id);
    IdSet filtered;
    for (const auto& o : f.objects)
      if (expected.count(o.id) && (o.center.xy() - f.agents[0].pose.xy()).norm() <= model.range_m)
        filtered.insert(o.id);
    CHECK(fused_coverage("cav00", {"cav01", "cav02"}, f, model) == filtered);
  }
  SUBCASE("cooperators must exclude the ego") {
    CHECK_THROWS_AS(fused_coverage("cav00", {"cav00"}, f, model), std::invalid_argument);
  }
}

TEST_CASE("fused coverage is monotone in the cooperator set") {
  const VisibilityModel model{};
  for (uint64_t seed = 30; seed < 36; ++seed) {
    const Frame f = random_frame(seed, 4, 10);
    const IdSet none = fused_coverage("cav00", {}, f, model);
    const IdSet one = fused_coverage("cav00", {"cav01"}, f, model);
    const IdSet two = fused_coverage("cav00", {"cav01", "cav02"}, f, model);
    const IdSet all = fused_coverage("cav00", {"cav01", "cav02", "cav03"}, f, model);
    const auto subset = [](const IdSet& a, const IdSet& b) {
      return std::includes(b.begin(), b.end(), a.begin(), a.end());
    };
    CHECK(subset(none, one));
    CHECK(subset(one, two));
    CHECK(subset(two, all));
  }
}

TEST_CASE("perception gain") {
  Frame f;
  f.agents.push_back(cav("cav00", 0, 0));
  const VisibilityModel model{};

  SUBCASE("colocated candidate adds nothing") {
    f.agents.push_back(cav("cav01", 0.0, 2.5));
    f.objects.push_back(vehicle("obj00", 10, 0));
    CHECK(perception_gain("cav00", "cav01", f, model) == 0);
  }
  SUBCASE("candidate sees past an occluder: gain equals the set difference") {
    // wall between ego and three hidden objects; candidate views from the side
    f.objects.push_back(vehicle("wall", 8, 0, kPi / 2, {16.0, 3.0, 3.0}));
    f.objects.push_back(vehicle("h0", 14, -3, 0, {1.0, 1.0, 1.0}));
    f.objects.push_back(vehicle("h1", 16, 0, 0, {1.0, 1.0, 1.0}));
    f.objects.push_back(vehicle("h2", 14, 3, 0, {1.0, 1.0, 1.0}));
    f.agents.push_back(cav("cav01", 16, 20, -kPi / 2));
    const IdSet alone = fused_coverage("cav00", {}, f, model);
    CHECK(alone.count("h0") == 0);
    CHECK(alone.count("h1") == 0);
    CHECK(alone.count("h2") == 0);
    CHECK(perception_gain("cav00", "cav01", f, model) == 3);
  }
  SUBCASE("objects outside ego range contribute no gain") {
    f.agents.push_back(cav("cav01", 80, 0));
    f.objects.push_back(vehicle("far", 90, 0));
    CHECK(perception_gain("cav00", "cav01", f, model) == 0);
  }
  SUBCASE("gain is zero when the candidate's view is a subset of the ego's") {
    f.agents.push_back(cav("cav01", 1.0, 3.0));
    f.objects.push_back(vehicle("obj00", 10, 0));
    f.objects.push_back(vehicle("obj01", -10, 5));
    const IdSet ego_vis = visible_objects(f.agents[0], f, model);
    const IdSet cand_vis = visible_objects(*f.find_agent("cav01"), f, model);
    if (std::includes(ego_vis.begin(), ego_vis.end(), cand_vis.begin(), cand_vis.end()))
      CHECK(perception_gain("cav00", "cav01", f, model) == 0);
  }
}

TEST_CASE("coop graph distances and occlusion") {
  Frame f;
  f.agents.push_back(cav("cav00", 0, 0));
  f.agents.push_back(cav("cav01", 12, 0));
  const VisibilityModel model{};

  SUBCASE("clear path") {
    const CoopGraph g = coop_graph(f, model);
    const int i = g.index_of("cav00"), j = g.index_of("cav01");
    CHECK(g.distance[i][j] == doctest::Approx(12.0));
    CHECK(g.distance[i][i] == 0.0);
    CHECK(g.occluded[i][j] == 0);
  }
  SUBCASE("truck between them occludes") {
    f.objects.push_back(vehicle("truck", 6, 0, kPi / 2, {10.0, 3.0, 3.0}));
    const CoopGraph g = coop_graph(f, model);
    CHECK(g.occluded[g.index_of("cav00")][g.index_of("cav01")] == 1);
  }
  SUBCASE("symmetric under agent reordering") {
    f.objects.push_back(vehicle("truck", 6, 0, kPi / 2, {10.0, 3.0, 3.0}));
    const CoopGraph g1 = coop_graph(f, model);
    std::swap(f.agents[0], f.agents[1]);
    const CoopGraph g2 = coop_graph(f, model);
    CHECK(g1.agent_ids == g2.agent_ids);
    CHECK(g1.distance == g2.distance);
    CHECK(g1.occluded == g2.occluded);
  }
}

TEST_CASE("visibility is deterministic") {
  const Frame f = random_frame(99, 4, 10);
  const VisibilityModel model{};
  for (const auto& a : f.agents)
    CHECK(visible_objects(a, f, model) == visible_objects(a, f, model));
}

TEST_CASE("visibility model validation") {
  VisibilityModel m;
  m.samples_per_box = 3;
  Frame f;
  f.agents.push_back(cav("cav00", 0, 0));
  CHECK_THROWS_AS(visible_objects(f.agents[0], f, m), std::invalid_argument);
  m.samples_per_box = 8;
  m.require_fraction = 0.0;
  CHECK_THROWS_AS(visible_objects(f.agents[0], f, m), std::invalid_argument);
}
