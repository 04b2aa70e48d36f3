#include "coopsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "coopsim/rng.hpp"

namespace coopsim {

// --- Waypath ---

void Waypath::validate() const {
  if (waypoints.size() < 2) throw std::invalid_argument("Waypath: need >= 2 waypoints");
  if (segment_speeds.size() != waypoints.size() - 1)
    throw std::invalid_argument("Waypath: one speed per segment required");
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    if ((waypoints[i + 1].xy() - waypoints[i].xy()).norm() <= 0.0)
      throw std::invalid_argument("Waypath: consecutive waypoints must be distinct");
    if (segment_speeds[i] < 0.0) throw std::invalid_argument("Waypath: speeds must be >= 0");
  }
}

double Waypath::total_length() const {
  double len = 0.0;
  for (size_t i = 0; i + 1 < waypoints.size(); ++i)
    len += (waypoints[i + 1].xy() - waypoints[i].xy()).norm();
  return len;
}

std::pair<Pose, double> Waypath::at(double arc) const {
  double s = std::max(0.0, arc);
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec2 a = waypoints[i].xy(), b = waypoints[i + 1].xy();
    const double seg = (b - a).norm();
    if (s <= seg || i + 2 == waypoints.size()) {
      const double t = std::min(1.0, seg > 0.0 ? s / seg : 0.0);
      const Vec2 p = a + (b - a) * t;
      const double yaw = std::atan2(b.y - a.y, b.x - a.x);
      const bool at_end = (i + 2 == waypoints.size()) && s >= seg;
      Pose pose = Pose::at(p.x, p.y, waypoints[i].z, yaw);
      return {pose, at_end ? 0.0 : segment_speeds[i]};
    }
    s -= seg;
  }
  throw std::logic_error("Waypath::at: unreachable");
}

// --- scene templates ---

namespace {

constexpr double kLaneOffset = 3.5;

Waypath straight_path(const Vec2& from, const Vec2& to, double speed) {
  Waypath p;
  p.waypoints = {Pose::at(from.x, from.y), Pose::at(to.x, to.y)};
  p.segment_speeds = {speed};
  return p;
}

Waypath poly_path(std::vector<Vec2> pts, double speed) {
  Waypath p;
  for (const auto& v : pts) p.waypoints.push_back(Pose::at(v.x, v.y));
  p.segment_speeds.assign(pts.size() - 1, speed);
  return p;
}

// Lane skeletons per scene kind, centered at the origin; extents sized to the
// spawn rectangle. Speeds are placeholders, reassigned per spawned entity.
std::vector<Waypath> lane_templates(SceneKind kind, double half_w, double half_h) {
  const double L = std::max(half_w, half_h) + 20.0;
  const double o = kLaneOffset;
  std::vector<Waypath> lanes;
  switch (kind) {
    case SceneKind::Intersection:
      lanes.push_back(straight_path({-L, -o}, {L, -o}, 8.0));
      lanes.push_back(straight_path({L, o}, {-L, o}, 8.0));
      lanes.push_back(straight_path({o, -L}, {o, L}, 8.0));
      lanes.push_back(straight_path({-o, L}, {-o, -L}, 8.0));
      lanes.push_back(poly_path({{-L, -o}, {o, -o}, {o, L}}, 8.0));
      lanes.push_back(poly_path({{L, o}, {-o, o}, {-o, -L}}, 8.0));
      break;
    case SceneKind::TJunction:
      lanes.push_back(straight_path({-L, -o}, {L, -o}, 8.0));
      lanes.push_back(straight_path({L, o}, {-L, o}, 8.0));
      lanes.push_back(poly_path({{o, -L}, {o, -2.0 * o}, {2.0 * o, -o}, {L, -o}}, 7.0));
      lanes.push_back(poly_path({{L, o}, {-o, o}, {-o, -2.0 * o}, {-o, -L}}, 7.0));
      break;
    case SceneKind::HighwayRamp:
      lanes.push_back(straight_path({-L, -o}, {L, -o}, 12.0));
      lanes.push_back(straight_path({-L, -2.0 * o}, {L, -2.0 * o}, 12.0));
      lanes.push_back(straight_path({L, o}, {-L, o}, 12.0));
      lanes.push_back(straight_path({L, 2.0 * o}, {-L, 2.0 * o}, 12.0));
      lanes.push_back(poly_path({{-L, -25.0}, {-20.0, -12.0}, {0.0, -2.0 * o}, {L, -2.0 * o}}, 9.0));
      break;
    case SceneKind::Roundabout: {
      const double r = 18.0;
      std::vector<Vec2> loop;
      for (int i = 0; i <= 16; ++i) {
        const double a = 2.0 * kPi * i / 16.0;
        loop.push_back({r * std::cos(a), r * std::sin(a)});
      }
      lanes.push_back(poly_path(loop, 7.0));
      lanes.push_back(poly_path({{-L, -o}, {-r - 2.0, -o}, {-r * 0.7, -r * 0.7}}, 6.0));
      lanes.push_back(poly_path({{L, o}, {r + 2.0, o}, {r * 0.7, r * 0.7}}, 6.0));
      lanes.push_back(poly_path({{o, -L}, {o, -r - 2.0}, {r * 0.7, -r * 0.7}}, 6.0));
      lanes.push_back(poly_path({{-o, L}, {-o, r + 2.0}, {-r * 0.7, r * 0.7}}, 6.0));
      break;
    }
    case SceneKind::FiveWay:
      for (int k = 0; k < 5; ++k) {
        const double a = 2.0 * kPi * k / 5.0;
        const Vec2 dir{std::cos(a), std::sin(a)};
        const Vec2 lat{-dir.y, dir.x};
        lanes.push_back(straight_path(
            {-L * dir.x + o * lat.x, -L * dir.y + o * lat.y},
            {L * dir.x + o * lat.x, L * dir.y + o * lat.y}, 7.0));
      }
      break;
  }
  return lanes;
}

std::vector<Pose> rsu_template_positions(SceneKind kind) {
  switch (kind) {
    case SceneKind::HighwayRamp:
      return {Pose::at(0.0, 12.0, 4.0, -kPi / 2.0), Pose::at(-30.0, -16.0, 4.0, kPi / 2.0),
              Pose::at(30.0, 12.0, 4.0, -kPi / 2.0), Pose::at(-60.0, 12.0, 4.0, -kPi / 2.0)};
    default:
      return {Pose::at(10.0, 10.0, 4.0, -3.0 * kPi / 4.0),
              Pose::at(-10.0, 10.0, 4.0, -kPi / 4.0),
              Pose::at(-10.0, -10.0, 4.0, kPi / 4.0),
              Pose::at(10.0, -10.0, 4.0, 3.0 * kPi / 4.0)};
  }
}

struct Placer {
  std::vector<OrientedRect> placed;
  double margin = 0.5;

  bool fits(const OrientedRect& r) const {
    OrientedRect grown = r;
    grown.length += margin;
    grown.width += margin;
    for (const auto& p : placed)
      if (rects_overlap(grown, p)) return false;
    return true;
  }
  void add(const OrientedRect& r) { placed.push_back(r); }
};

bool inside_rect(const Vec2& p, const ScenarioConfig& cfg) {
  return std::abs(p.x - cfg.center.x) <= 0.5 * cfg.spawn_rect_width &&
         std::abs(p.y - cfg.center.y) <= 0.5 * cfg.spawn_rect_height;
}

std::string pad_id(const char* prefix, int i) {
  std::ostringstream os;
  os << prefix;
  if (i < 10) os << '0';
  os << i;
  return os.str();
}

BoxSize class_size(ObjectClass c) {
  switch (c) {
    case ObjectClass::Vehicle: return {4.6, 1.9, 1.6};
    case ObjectClass::Pedestrian: return {0.5, 0.5, 1.8};
    case ObjectClass::Cyclist: return {1.8, 0.6, 1.6};
  }
  throw std::logic_error("class_size: bad enum");
}

// Spawns one on-road entity on a random lane template, shifted to the scene
// center, at a random arc inside the spawn rect.
void spawn_on_lane(WorldEntity& e, const ScenarioConfig& cfg,
                   const std::vector<Waypath>& lanes, Placer& placer, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> pick_lane(0, lanes.size() - 1);
  std::uniform_real_distribution<double> pick_speed(5.0, 12.0);
  constexpr int kMaxTries = 200;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    Waypath path = lanes[pick_lane(rng)];
    for (auto& wp : path.waypoints) {
      wp.x += cfg.center.x;
      wp.y += cfg.center.y;
    }
    const double speed = pick_speed(rng);
    std::fill(path.segment_speeds.begin(), path.segment_speeds.end(), speed);
    std::uniform_real_distribution<double> pick_arc(0.0, 0.85 * path.total_length());
    const double arc = pick_arc(rng);
    const auto [pose, sp] = path.at(arc);
    (void)sp;
    if (!inside_rect(pose.xy(), cfg)) continue;
    const OrientedRect fp{pose.xy(), e.size.length, e.size.width, pose.yaw};
    if (!placer.fits(fp)) continue;
    placer.add(fp);
    e.path = std::move(path);
    e.arc = arc;
    e.pose = pose;
    const Vec2 v = rotate({speed, 0.0}, pose.yaw);
    e.velocity = {v.x, v.y};
    return;
  }
  throw std::runtime_error("generate_scene: infeasible packing for entity " + e.id);
}

void spawn_static(WorldEntity& e, const ScenarioConfig& cfg, Placer& placer,
                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> px(cfg.center.x - 0.5 * cfg.spawn_rect_width,
                                            cfg.center.x + 0.5 * cfg.spawn_rect_width);
  std::uniform_real_distribution<double> py(cfg.center.y - 0.5 * cfg.spawn_rect_height,
                                            cfg.center.y + 0.5 * cfg.spawn_rect_height);
  std::uniform_real_distribution<double> pyaw(-kPi, kPi);
  constexpr int kMaxTries = 200;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    const Pose pose = Pose::at(px(rng), py(rng), 0.0, pyaw(rng));
    const OrientedRect fp{pose.xy(), e.size.length, e.size.width, pose.yaw};
    if (!placer.fits(fp)) continue;
    placer.add(fp);
    e.pose = pose;
    e.velocity = {0.0, 0.0};
    return;
  }
  throw std::runtime_error("generate_scene: infeasible packing for entity " + e.id);
}

}  // namespace

void parallel_for(int n_jobs, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n_jobs <= 1) {
    for (int i = 0; i < n_jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  const int n_threads = std::min(workers, n_jobs);
  pool.reserve(static_cast<size_t>(n_threads));
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_jobs) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();  // barrier: batch fully done before returning
  if (failure) std::rethrow_exception(failure);
}

// --- world construction and stepping ---

WorldState init_world(const ScenarioConfig& config) {
  if (config.counts.controlled_cav < 0 || config.counts.uncontrolled_cav < 0 ||
      config.counts.rsu < 0 || config.counts.obstacle < 0 || config.object_count < 0)
    throw std::invalid_argument("init_world: counts must be >= 0");
  const double n_frames = config.duration_s / kFrameIntervalS;
  if (std::abs(n_frames - std::round(n_frames)) > 1e-9)
    throw std::invalid_argument("init_world: duration must be a multiple of 0.5 s");

  WorldState w;
  w.config = config;
  {
    std::ostringstream os;
    os << scene_kind_name(config.scene_kind) << "-" << config.seed;
    w.scene_id = os.str();
  }

  std::mt19937_64 rng(splitmix64(config.seed));
  const auto lanes =
      lane_templates(config.scene_kind, 0.5 * config.spawn_rect_width,
                     0.5 * config.spawn_rect_height);
  Placer placer;

  // RSUs first: static template roadside positions
  const auto rsu_slots = rsu_template_positions(config.scene_kind);
  for (int i = 0; i < config.counts.rsu; ++i) {
    WorldEntity e;
    e.id = pad_id("rsu", i);
    e.is_agent = true;
    e.agent_kind = AgentKind::Rsu;
    e.size = {0.4, 0.4, 4.0};
    const Pose slot = rsu_slots[static_cast<size_t>(i) % rsu_slots.size()];
    const double ring = 14.0 * static_cast<double>(i / static_cast<int>(rsu_slots.size()));
    e.pose = Pose::at(config.center.x + slot.x + ring, config.center.y + slot.y + ring,
                      slot.z, slot.yaw);
    placer.add({e.pose.xy(), e.size.length, e.size.width, e.pose.yaw});
    w.entities.push_back(std::move(e));
  }

  const auto spawn_cavs = [&](const char* prefix, AgentKind kind, int n) {
    for (int i = 0; i < n; ++i) {
      WorldEntity e;
      e.id = pad_id(prefix, i);
      e.is_agent = true;
      e.agent_kind = kind;
      e.size = class_size(ObjectClass::Vehicle);
      spawn_on_lane(e, config, lanes, placer, rng);
      w.entities.push_back(std::move(e));
    }
  };
  spawn_cavs("cav", AgentKind::ControlledCav, config.counts.controlled_cav);
  spawn_cavs("ucav", AgentKind::UncontrolledCav, config.counts.uncontrolled_cav);
  spawn_cavs("obs", AgentKind::Obstacle, config.counts.obstacle);

  // standalone annotated objects: parked vehicles, pedestrians, cyclists
  std::uniform_int_distribution<int> pick_class(0, 2);
  for (int i = 0; i < config.object_count; ++i) {
    WorldEntity e;
    e.id = pad_id("obj", i);
    e.is_agent = false;
    e.object_class = static_cast<ObjectClass>(pick_class(rng));
    e.size = class_size(e.object_class);
    spawn_static(e, config, placer, rng);
    w.entities.push_back(std::move(e));
  }
  return w;
}

void step(WorldState& world, double dt) {
  if (std::abs(dt - kTickIntervalS) > 1e-12)
    throw std::invalid_argument("step: dt must be 0.1 s");
  for (auto& e : world.entities) {
    if (!e.path.has_value()) continue;
    const auto [pose_now, speed] = e.path->at(e.arc);
    (void)pose_now;
    e.arc += speed * dt;
    const auto [pose, speed_after] = e.path->at(e.arc);
    e.pose = pose;
    const Vec2 v = rotate({speed_after, 0.0}, pose.yaw);
    e.velocity = {v.x, v.y};
  }
  world.tick += 1;
  world.version += 1;
}

Frame snapshot_frame(const WorldState& world, int frame_index) {
  Frame f;
  f.index = frame_index;
  f.sim_time = frame_index * kFrameIntervalS;
  for (const auto& e : world.entities) {
    if (e.is_agent) {
      Agent a = Agent::make(e.id, e.agent_kind, e.pose, e.velocity);
      f.agents.push_back(std::move(a));
      // obstacle traffic doubles as annotated vehicle boxes
      if (e.agent_kind == AgentKind::Obstacle)
        f.objects.push_back(ObjectBox::make(e.id, ObjectClass::Vehicle, e.pose, e.size,
                                            e.velocity));
    } else {
      f.objects.push_back(ObjectBox::make(e.id, e.object_class, e.pose, e.size, e.velocity));
    }
  }
  return f;
}

Scene generate_scene(const ScenarioConfig& config) {
  WorldState w = init_world(config);
  Scene scene;
  scene.id = w.scene_id;
  scene.config = config;
  const int n_frames = static_cast<int>(std::llround(config.duration_s / kFrameIntervalS));
  for (int tick = 0; tick < n_frames * kTicksPerFrame; ++tick) {
    if (tick % kTicksPerFrame == 0)
      scene.frames.push_back(snapshot_frame(w, tick / kTicksPerFrame));
    step(w);
  }
  return scene;
}

// --- parallel runner ---

std::string TimingReport::to_csv() const {
  std::ostringstream os;
  os << "tick,agents,wall_ms\n";
  for (const auto& t : ticks) os << t.tick << ',' << t.agents << ',' << t.wall_ms << '\n';
  return os.str();
}

SceneRun run_parallel(const ScenarioConfig& config, int worker_count,
                      const VisibilityModel& model, const std::string& timing_csv_path) {
  if (worker_count < 1) throw std::invalid_argument("run_parallel: worker_count must be >= 1");
  model.validate();

  WorldState w = init_world(config);
  SceneRun run;
  run.scene.id = w.scene_id;
  run.scene.config = config;

  const int n_frames = static_cast<int>(std::llround(config.duration_s / kFrameIntervalS));
  double sensing_ms_total = 0.0;
  long sensing_jobs_total = 0;

  const auto flush_partial = [&] {
    if (timing_csv_path.empty()) return;
    std::ofstream out(timing_csv_path);
    if (out) out << run.timing.to_csv();
  };

  try {
    for (int tick = 0; tick < n_frames * kTicksPerFrame; ++tick) {
      const auto t0 = std::chrono::steady_clock::now();
      if (tick % kTicksPerFrame == 0) {
        const int frame_index = tick / kTicksPerFrame;
        Frame frame = snapshot_frame(w, frame_index);
        const uint64_t version_at_dispatch = w.version;

        // one batch per tick: every sensored agent's benchmark job together
        std::vector<const Agent*> sensored;
        for (const auto& a : frame.agents)
          if (a.sensored()) sensored.push_back(&a);
        std::vector<IdSet> results(sensored.size());
        parallel_for(static_cast<int>(sensored.size()), worker_count,
                 [&](int i) { results[static_cast<size_t>(i)] =
                                  visible_objects(*sensored[static_cast<size_t>(i)], frame, model); });
        if (w.version != version_at_dispatch)
          throw std::logic_error("run_parallel: world advanced under an open batch");

        FramePerception fp;
        fp.frame_index = frame_index;
        for (size_t i = 0; i < sensored.size(); ++i)
          fp.visibility.by_agent[sensored[i]->id] = std::move(results[i]);
        if (!frame.agents.empty()) fp.graph = coop_graph(frame, model);
        sensing_jobs_total += static_cast<long>(sensored.size());
        run.perception.push_back(std::move(fp));
        run.scene.frames.push_back(std::move(frame));
      }
      step(w);
      const auto t1 = std::chrono::steady_clock::now();
      const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      if (tick % kTicksPerFrame == 0) sensing_ms_total += ms;
      run.timing.ticks.push_back(
          {tick, static_cast<int>(run.scene.frames.back().agents.size()), ms});
    }
  } catch (...) {
    flush_partial();
    throw;
  }

  run.timing.per_agent_mean_cost_ms =
      sensing_jobs_total > 0 ? sensing_ms_total / static_cast<double>(sensing_jobs_total) : 0.0;
  if (!timing_csv_path.empty()) {
    std::ofstream out(timing_csv_path);
    if (!out) throw std::runtime_error("run_parallel: cannot open " + timing_csv_path);
    out << run.timing.to_csv();
  }
  return run;
}

// --- filtering ---

std::vector<Scene> filter_scenes(const std::vector<Scene>& scenes, int min_length_frames,
                                 const CategoryMinima& min_counts, const SceneRewardFn& reward_fn,
                                 double reward_threshold) {
  if (min_length_frames < 0) throw std::invalid_argument("filter_scenes: thresholds must be >= 0");
  std::vector<Scene> kept;
  for (const auto& s : scenes) {
    if (static_cast<int>(s.frames.size()) < min_length_frames) continue;
    int cav = 0, rsu = 0, obstacle = 0;
    if (!s.frames.empty()) {
      for (const auto& a : s.frames.front().agents) {
        if (a.kind == AgentKind::ControlledCav || a.kind == AgentKind::UncontrolledCav) ++cav;
        else if (a.kind == AgentKind::Rsu) ++rsu;
        else ++obstacle;
      }
    }
    if (cav < min_counts.cav || rsu < min_counts.rsu || obstacle < min_counts.obstacle) continue;
    if (reward_fn && reward_fn(s) < reward_threshold) continue;
    kept.push_back(s);
  }
  return kept;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit_r2: need matched samples, n >= 2");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  if (vx <= 0.0 || vy <= 0.0) return 1.0;
  return (cov * cov) / (vx * vy);
}

}  // namespace coopsim
