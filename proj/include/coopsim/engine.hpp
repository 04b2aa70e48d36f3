#pragma once
// Scenario generation, 0.1 s kinematic stepping with 0.5 s frame emission,
// barrier-synchronized parallel sensing workers, and scene filtering.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coopsim/sensing.hpp"
#include "coopsim/types.hpp"

namespace coopsim {

// Piecewise-linear trajectory; heading follows the active segment.
struct Waypath {
  std::vector<Pose> waypoints;
  std::vector<double> segment_speeds;  // m/s, one per segment

  double total_length() const;
  // Pose and speed at the given arc length; clamps at the final waypoint.
  std::pair<Pose, double> at(double arc) const;
  void validate() const;
};

struct WorldEntity {
  std::string id;
  bool is_agent = false;
  AgentKind agent_kind = AgentKind::Obstacle;
  ObjectClass object_class = ObjectClass::Vehicle;
  BoxSize size;
  Pose pose;
  std::array<double, 2> velocity = {0.0, 0.0};
  std::optional<Waypath> path;
  double arc = 0.0;
};

struct WorldState {
  std::string scene_id;
  ScenarioConfig config;
  std::vector<WorldEntity> entities;
  int tick = 0;
  uint64_t version = 0;  // bumps on every step
};

struct FramePerception {
  int frame_index = 0;
  VisibilitySet visibility;
  CoopGraph graph;
};

struct TickTiming {
  int tick = 0;
  int agents = 0;
  double wall_ms = 0.0;
};

struct TimingReport {
  std::vector<TickTiming> ticks;
  double per_agent_mean_cost_ms = 0.0;
  std::string to_csv() const;
};

struct SceneRun {
  Scene scene;
  std::vector<FramePerception> perception;  // one per frame
  TimingReport timing;
};

// Deterministic scenario instantiation from (config, seed); throws on
// infeasible packing after bounded retries.
WorldState init_world(const ScenarioConfig& config);
Scene generate_scene(const ScenarioConfig& config);

// Advances every moving entity by one 0.1 s tick along its waypath.
void step(WorldState& world, double dt = kTickIntervalS);

// Builds a frame snapshot of the current world state.
Frame snapshot_frame(const WorldState& world, int frame_index);

// Generates the scene and evaluates per-agent sensing in barrier-synchronized
// batches on worker_count workers. The Scene is identical for every
// worker_count. On worker failure the partial timing log is flushed to
// timing_csv_path (when set) before rethrowing.
SceneRun run_parallel(const ScenarioConfig& config, int worker_count,
                      const VisibilityModel& model,
                      const std::string& timing_csv_path = "");

struct CategoryMinima {
  int cav = 0;
  int rsu = 0;
  int obstacle = 0;
};

using SceneRewardFn = std::function<double(const Scene&)>;

// Keeps scenes meeting all thresholds (inclusive).
std::vector<Scene> filter_scenes(const std::vector<Scene>& scenes, int min_length_frames,
                                 const CategoryMinima& min_counts,
                                 const SceneRewardFn& reward_fn = nullptr,
                                 double reward_threshold = 0.0);

// Least-squares linear fit quality of y against x.
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

// Runs fn(0..n_jobs-1) on worker_count threads and joins before returning.
// The first worker exception is rethrown after the join.
void parallel_for(int n_jobs, int worker_count, const std::function<void(int)>& fn);

}  // namespace coopsim
