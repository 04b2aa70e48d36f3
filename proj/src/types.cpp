#include "coopsim/types.hpp"

#include <algorithm>
#include <stdexcept>

namespace coopsim {

const char* agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::ControlledCav: return "controlled_cav";
    case AgentKind::UncontrolledCav: return "uncontrolled_cav";
    case AgentKind::Rsu: return "rsu";
    case AgentKind::Obstacle: return "obstacle";
  }
  throw std::logic_error("agent_kind_name: bad enum");
}

AgentKind agent_kind_from_name(const std::string& name) {
  if (name == "controlled_cav") return AgentKind::ControlledCav;
  if (name == "uncontrolled_cav") return AgentKind::UncontrolledCav;
  if (name == "rsu") return AgentKind::Rsu;
  if (name == "obstacle") return AgentKind::Obstacle;
  throw std::invalid_argument("unknown agent kind: " + name);
}

const char* object_class_name(ObjectClass c) {
  switch (c) {
    case ObjectClass::Vehicle: return "vehicle";
    case ObjectClass::Pedestrian: return "pedestrian";
    case ObjectClass::Cyclist: return "cyclist";
  }
  throw std::logic_error("object_class_name: bad enum");
}

ObjectClass object_class_from_name(const std::string& name) {
  if (name == "vehicle") return ObjectClass::Vehicle;
  if (name == "pedestrian") return ObjectClass::Pedestrian;
  if (name == "cyclist") return ObjectClass::Cyclist;
  throw std::invalid_argument("unknown object class: " + name);
}

const char* scene_kind_name(SceneKind k) {
  switch (k) {
    case SceneKind::Intersection: return "intersection";
    case SceneKind::TJunction: return "t_junction";
    case SceneKind::HighwayRamp: return "highway_ramp";
    case SceneKind::Roundabout: return "roundabout";
    case SceneKind::FiveWay: return "five_way";
  }
  throw std::logic_error("scene_kind_name: bad enum");
}

SceneKind scene_kind_from_name(const std::string& name) {
  if (name == "intersection") return SceneKind::Intersection;
  if (name == "t_junction") return SceneKind::TJunction;
  if (name == "highway_ramp") return SceneKind::HighwayRamp;
  if (name == "roundabout") return SceneKind::Roundabout;
  if (name == "five_way") return SceneKind::FiveWay;
  throw std::invalid_argument("unknown scene kind: " + name);
}

Agent Agent::make(std::string id, AgentKind kind, Pose pose, std::array<double, 2> velocity) {
  Agent a;
  a.id = std::move(id);
  a.kind = kind;
  a.pose = pose;
  a.velocity = velocity;
  if (kind != AgentKind::Obstacle) a.sensor = SensorConfig{};
  if (kind == AgentKind::Rsu) {
    a.footprint_length = 0.4;
    a.footprint_width = 0.4;
  }
  return a;
}

ObjectBox ObjectBox::make(std::string id, ObjectClass cls, Pose center, BoxSize size,
                          std::array<double, 2> velocity) {
  if (size.length <= 0.0 || size.width <= 0.0 || size.height <= 0.0)
    throw std::invalid_argument("ObjectBox: size components must be > 0");
  ObjectBox b;
  b.id = std::move(id);
  b.cls = cls;
  b.center = center;
  b.size = size;
  b.velocity = velocity;
  return b;
}

const Agent* Frame::find_agent(const std::string& id) const {
  for (const auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

int Frame::sensored_agent_count() const {
  int n = 0;
  for (const auto& a : agents)
    if (a.sensored()) ++n;
  return n;
}

ObjectBox transform_to_ego(const ObjectBox& box, const Pose& ego) {
  if (!std::isfinite(ego.x) || !std::isfinite(ego.y) || !std::isfinite(ego.yaw))
    throw std::invalid_argument("transform_to_ego: non-finite ego pose");
  if (!std::isfinite(box.center.x) || !std::isfinite(box.center.y))
    throw std::invalid_argument("transform_to_ego: non-finite box center");
  ObjectBox out = box;
  const Vec2 d = rotate({box.center.x - ego.x, box.center.y - ego.y}, -ego.yaw);
  out.center.x = d.x;
  out.center.y = d.y;
  out.center.z = box.center.z - ego.z;
  out.center.yaw = normalize_angle(box.center.yaw - ego.yaw);
  const Vec2 v = rotate({box.velocity[0], box.velocity[1]}, -ego.yaw);
  out.velocity = {v.x, v.y};
  return out;
}

ObjectBox transform_from_ego(const ObjectBox& box, const Pose& ego) {
  ObjectBox out = box;
  const Vec2 d = rotate({box.center.x, box.center.y}, ego.yaw);
  out.center.x = d.x + ego.x;
  out.center.y = d.y + ego.y;
  out.center.z = box.center.z + ego.z;
  out.center.yaw = normalize_angle(box.center.yaw + ego.yaw);
  const Vec2 v = rotate({box.velocity[0], box.velocity[1]}, ego.yaw);
  out.velocity = {v.x, v.y};
  return out;
}

std::vector<ObjectBox> filter_valid(const std::vector<ObjectBox>& boxes, double range_m) {
  if (range_m <= 0.0) throw std::invalid_argument("filter_valid: range must be > 0");
  std::vector<ObjectBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes)
    if (std::hypot(b.center.x, b.center.y) <= range_m) out.push_back(b);
  return out;
}

Sample build_sample(const Frame& frame, const std::string& ego_id, double range_m) {
  const Agent* ego = frame.find_agent(ego_id);
  if (ego == nullptr) throw std::invalid_argument("build_sample: unknown ego id " + ego_id);
  if (!ego->sensored())
    throw std::invalid_argument("build_sample: ego " + ego_id + " has no sensor");
  std::vector<ObjectBox> projected;
  projected.reserve(frame.objects.size());
  for (const auto& obj : frame.objects) {
    if (obj.id == ego_id) continue;  // ego's own twin box
    projected.push_back(transform_to_ego(obj, ego->pose));
  }
  Sample s;
  s.frame_index = frame.index;
  s.ego_id = ego_id;
  s.annotations = filter_valid(projected, range_m);
  return s;
}

}  // namespace coopsim
