#pragma once
// Core world model: poses, agents, object boxes, frames, scenes, samples.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coopsim/geometry.hpp"

namespace coopsim {

constexpr double kTickIntervalS = 0.1;
constexpr double kFrameIntervalS = 0.5;
constexpr int kTicksPerFrame = 5;

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;  // [-pi, pi)

  static Pose at(double x, double y, double z = 0.0, double yaw = 0.0) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw std::invalid_argument("Pose: non-finite coordinate");
    return Pose{x, y, z, normalize_angle(yaw)};
  }
  Vec2 xy() const { return {x, y}; }
};

inline double planar_distance(const Pose& a, const Pose& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

enum class AgentKind { ControlledCav, UncontrolledCav, Rsu, Obstacle };

inline bool is_sensored(AgentKind k) { return k != AgentKind::Obstacle; }

const char* agent_kind_name(AgentKind k);
AgentKind agent_kind_from_name(const std::string& name);

struct SensorConfig {
  double range_m = 200.0;
  int channels = 64;
  long points_per_second = 256000;
  std::array<double, 2> fov_vertical_rad = {-40.0 * kPi / 180.0, 0.0};
  double rate_hz = 20.0;

  bool operator==(const SensorConfig&) const = default;
};

struct Agent {
  std::string id;
  AgentKind kind = AgentKind::UncontrolledCav;
  Pose pose;
  std::array<double, 2> velocity = {0.0, 0.0};
  std::optional<SensorConfig> sensor;
  // BEV footprint used for occlusion (vehicle body / RSU pole)
  double footprint_length = 4.6;
  double footprint_width = 1.9;

  bool sensored() const { return sensor.has_value(); }
  OrientedRect footprint() const {
    return {pose.xy(), footprint_length, footprint_width, pose.yaw};
  }

  static Agent make(std::string id, AgentKind kind, Pose pose,
                    std::array<double, 2> velocity = {0.0, 0.0});
};

enum class ObjectClass { Vehicle, Pedestrian, Cyclist };

const char* object_class_name(ObjectClass c);
ObjectClass object_class_from_name(const std::string& name);

struct BoxSize {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  bool operator==(const BoxSize&) const = default;
};

struct ObjectBox {
  std::string id;
  ObjectClass cls = ObjectClass::Vehicle;
  Pose center;
  BoxSize size;
  std::array<double, 2> velocity = {0.0, 0.0};

  OrientedRect footprint() const {
    return {center.xy(), size.length, size.width, center.yaw};
  }

  static ObjectBox make(std::string id, ObjectClass cls, Pose center, BoxSize size,
                        std::array<double, 2> velocity = {0.0, 0.0});
};

struct Frame {
  int index = 0;
  double sim_time = 0.0;
  std::vector<Agent> agents;
  std::vector<ObjectBox> objects;

  const Agent* find_agent(const std::string& id) const;
  int sensored_agent_count() const;
};

enum class SceneKind { Intersection, TJunction, HighwayRamp, Roundabout, FiveWay };

const char* scene_kind_name(SceneKind k);
SceneKind scene_kind_from_name(const std::string& name);

struct AgentCounts {
  int controlled_cav = 0;
  int uncontrolled_cav = 0;
  int rsu = 0;
  int obstacle = 0;
  bool operator==(const AgentCounts&) const = default;
};

struct ScenarioConfig {
  SceneKind scene_kind = SceneKind::Intersection;
  Pose center;
  double spawn_rect_width = 120.0;
  double spawn_rect_height = 120.0;
  AgentCounts counts;
  int object_count = 0;
  double duration_s = 20.0;  // multiple of 0.5 s
  uint64_t seed = 0;
};

struct Scene {
  std::string id;
  ScenarioConfig config;
  std::vector<Frame> frames;

  // M: sensored agents, constant across the scene
  int sensored_agent_count() const {
    return frames.empty() ? 0 : frames.front().sensored_agent_count();
  }
};

struct Sample {
  int frame_index = 0;
  std::string ego_id;
  std::vector<ObjectBox> annotations;  // ego frame, all within range
};

// --- core-world operations ---

// Rigid transform of a world-frame box into the ego coordinate system.
ObjectBox transform_to_ego(const ObjectBox& box, const Pose& ego);
// Inverse of transform_to_ego.
ObjectBox transform_from_ego(const ObjectBox& box, const Pose& ego);

// Keeps boxes whose center planar distance to the ego origin is <= range (inclusive).
std::vector<ObjectBox> filter_valid(const std::vector<ObjectBox>& boxes, double range_m);

// Ego-frame annotations for one (frame, ego) pair. The ego's own twin box is excluded.
Sample build_sample(const Frame& frame, const std::string& ego_id, double range_m);

}  // namespace coopsim
