#include "coopsim/dataio.hpp"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace coopsim {

namespace {

// --- serialization ---

json pose_to_json(const Pose& p) {
  return json{{"x", p.x}, {"y", p.y}, {"z", p.z}, {"yaw", p.yaw}};
}

Pose pose_from_json(const json& j) {
  return Pose::at(j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>(),
                  j.at("yaw").get<double>());
}

json agent_to_json(const Agent& a) {
  json j{{"id", a.id},
         {"kind", agent_kind_name(a.kind)},
         {"pose", pose_to_json(a.pose)},
         {"velocity", a.velocity},
         {"footprint", {a.footprint_length, a.footprint_width}}};
  if (a.sensor.has_value()) {
    const SensorConfig& s = *a.sensor;
    j["sensor"] = json{{"range_m", s.range_m},
                       {"channels", s.channels},
                       {"points_per_second", s.points_per_second},
                       {"fov_vertical_rad", s.fov_vertical_rad},
                       {"rate_hz", s.rate_hz}};
  }
  return j;
}

Agent agent_from_json(const json& j) {
  Agent a;
  a.id = j.at("id").get<std::string>();
  a.kind = agent_kind_from_name(j.at("kind").get<std::string>());
  a.pose = pose_from_json(j.at("pose"));
  a.velocity = j.at("velocity").get<std::array<double, 2>>();
  const auto fp = j.at("footprint").get<std::array<double, 2>>();
  a.footprint_length = fp[0];
  a.footprint_width = fp[1];
  if (j.contains("sensor")) {
    const json& s = j.at("sensor");
    SensorConfig sc;
    sc.range_m = s.at("range_m").get<double>();
    sc.channels = s.at("channels").get<int>();
    sc.points_per_second = s.at("points_per_second").get<long>();
    sc.fov_vertical_rad = s.at("fov_vertical_rad").get<std::array<double, 2>>();
    sc.rate_hz = s.at("rate_hz").get<double>();
    a.sensor = sc;
  }
  return a;
}

json box_to_json(const ObjectBox& b) {
  return json{{"id", b.id},
              {"class", object_class_name(b.cls)},
              {"center", pose_to_json(b.center)},
              {"size", {b.size.length, b.size.width, b.size.height}},
              {"velocity", b.velocity}};
}

ObjectBox box_from_json(const json& j) {
  const auto s = j.at("size").get<std::array<double, 3>>();
  return ObjectBox::make(j.at("id").get<std::string>(),
                         object_class_from_name(j.at("class").get<std::string>()),
                         pose_from_json(j.at("center")), BoxSize{s[0], s[1], s[2]},
                         j.at("velocity").get<std::array<double, 2>>());
}

json config_to_json(const ScenarioConfig& c) {
  return json{{"scene_kind", scene_kind_name(c.scene_kind)},
              {"center", pose_to_json(c.center)},
              {"spawn_rect", {c.spawn_rect_width, c.spawn_rect_height}},
              {"counts",
               {{"controlled_cav", c.counts.controlled_cav},
                {"uncontrolled_cav", c.counts.uncontrolled_cav},
                {"rsu", c.counts.rsu},
                {"obstacle", c.counts.obstacle}}},
              {"object_count", c.object_count},
              {"duration_s", c.duration_s},
              {"seed", c.seed}};
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  c.scene_kind = scene_kind_from_name(j.at("scene_kind").get<std::string>());
  c.center = pose_from_json(j.at("center"));
  const auto rect = j.at("spawn_rect").get<std::array<double, 2>>();
  c.spawn_rect_width = rect[0];
  c.spawn_rect_height = rect[1];
  const json& counts = j.at("counts");
  c.counts.controlled_cav = counts.at("controlled_cav").get<int>();
  c.counts.uncontrolled_cav = counts.at("uncontrolled_cav").get<int>();
  c.counts.rsu = counts.at("rsu").get<int>();
  c.counts.obstacle = counts.at("obstacle").get<int>();
  c.object_count = j.at("object_count").get<int>();
  c.duration_s = j.at("duration_s").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

void write_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_scene: cannot open " + path.string());
  out << j.dump(2) << '\n';
}

json read_file(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("import: missing " + what + " at " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("import: truncated or corrupt " + what + " at " + path.string() +
                             ": " + e.what());
  }
}

void check_schema(const json& j, const std::string& what) {
  const int v = j.at("schema_version").get<int>();
  if (v != kSchemaVersion) {
    std::ostringstream os;
    os << "import: schema version mismatch in " << what << ": file has " << v << ", expected "
       << kSchemaVersion;
    throw std::runtime_error(os.str());
  }
}

std::string frame_file_name(int idx) {
  std::ostringstream os;
  os << idx << ".json";
  return os.str();
}

}  // namespace

int DatasetManifest::total_frames() const {
  return std::accumulate(scenes.begin(), scenes.end(), 0,
                         [](int acc, const SceneManifestEntry& s) { return acc + s.frames; });
}

int DatasetManifest::total_samples() const {
  return std::accumulate(scenes.begin(), scenes.end(), 0,
                         [](int acc, const SceneManifestEntry& s) { return acc + s.samples; });
}

SceneManifestEntry export_scene(const Scene& scene, const VisibilityModel& model,
                                const std::string& root_path,
                                const std::vector<FramePerception>* perception) {
  model.validate();
  if (perception != nullptr && perception->size() != scene.frames.size())
    throw std::invalid_argument("export_scene: perception/frame count mismatch");

  const fs::path root(root_path);
  const fs::path scene_dir = root / scene.id;
  fs::create_directories(root);

  SceneManifestEntry entry;
  entry.id = scene.id;
  entry.config = scene.config;
  entry.frames = static_cast<int>(scene.frames.size());

  try {
    fs::create_directories(scene_dir / "frames");
    fs::create_directories(scene_dir / "samples");
    fs::create_directories(scene_dir / "graphs");

    for (size_t fi = 0; fi < scene.frames.size(); ++fi) {
      const Frame& frame = scene.frames[fi];

      json jf{{"schema_version", kSchemaVersion},
              {"scene_id", scene.id},
              {"index", frame.index},
              {"sim_time", frame.sim_time}};
      jf["agents"] = json::array();
      for (const auto& a : frame.agents) jf["agents"].push_back(agent_to_json(a));
      jf["objects"] = json::array();
      for (const auto& o : frame.objects) jf["objects"].push_back(box_to_json(o));
      write_file(scene_dir / "frames" / frame_file_name(frame.index), jf);

      // one sample per sensored agent
      for (const auto& a : frame.agents) {
        if (!a.sensored()) continue;
        const Sample s = build_sample(frame, a.id, model.range_m);
        json js{{"schema_version", kSchemaVersion},
                {"scene_id", scene.id},
                {"frame_index", s.frame_index},
                {"ego_id", s.ego_id},
                {"range_m", model.range_m}};
        js["annotations"] = json::array();
        for (const auto& b : s.annotations) js["annotations"].push_back(box_to_json(b));
        std::ostringstream name;
        name << frame.index << "_" << a.id << ".json";
        write_file(scene_dir / "samples" / name.str(), js);
        entry.samples += 1;
      }

      // visibility sets and the agent graph
      FramePerception computed;
      const FramePerception* fp = nullptr;
      if (perception != nullptr) {
        fp = &(*perception)[fi];
      } else {
        computed.frame_index = frame.index;
        for (const auto& a : frame.agents)
          if (a.sensored()) computed.visibility.by_agent[a.id] = visible_objects(a, frame, model);
        if (!frame.agents.empty()) computed.graph = coop_graph(frame, model);
        fp = &computed;
      }
      json jg{{"schema_version", kSchemaVersion},
              {"scene_id", scene.id},
              {"frame_index", frame.index}};
      jg["visibility"] = json::object();
      for (const auto& [aid, ids] : fp->visibility.by_agent)
        jg["visibility"][aid] = std::vector<std::string>(ids.begin(), ids.end());
      jg["agents"] = fp->graph.agent_ids;
      jg["distance"] = fp->graph.distance;
      jg["occluded"] = fp->graph.occluded;
      write_file(scene_dir / "graphs" / frame_file_name(frame.index), jg);
    }
  } catch (...) {
    std::error_code ec;
    fs::remove_all(scene_dir, ec);  // clean up the partial write
    throw;
  }

  // read-modify-write the manifest, keeping scene entries sorted by id
  DatasetManifest manifest;
  if (fs::exists(root / "manifest.json")) manifest = read_manifest(root_path);
  std::erase_if(manifest.scenes,
                [&](const SceneManifestEntry& s) { return s.id == entry.id; });
  manifest.scenes.push_back(entry);
  std::sort(manifest.scenes.begin(), manifest.scenes.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });

  json jm{{"schema_version", kSchemaVersion}, {"generator_version", kGeneratorVersion}};
  jm["scenes"] = json::array();
  for (const auto& s : manifest.scenes)
    jm["scenes"].push_back(json{{"id", s.id},
                                {"frames", s.frames},
                                {"samples", s.samples},
                                {"config", config_to_json(s.config)}});
  write_file(root / "manifest.json", jm);
  return entry;
}

DatasetManifest read_manifest(const std::string& root_path) {
  const json jm = read_file(fs::path(root_path) / "manifest.json", "manifest");
  check_schema(jm, "manifest");
  DatasetManifest m;
  for (const auto& js : jm.at("scenes")) {
    SceneManifestEntry e;
    e.id = js.at("id").get<std::string>();
    e.frames = js.at("frames").get<int>();
    e.samples = js.at("samples").get<int>();
    e.config = config_from_json(js.at("config"));
    m.scenes.push_back(std::move(e));
  }
  return m;
}

ImportedScene import_scene(const std::string& root_path, const std::string& scene_id) {
  const DatasetManifest manifest = read_manifest(root_path);
  const SceneManifestEntry* entry = nullptr;
  for (const auto& s : manifest.scenes)
    if (s.id == scene_id) entry = &s;
  if (entry == nullptr)
    throw std::runtime_error("import_scene: scene " + scene_id + " not listed in manifest");

  const fs::path scene_dir = fs::path(root_path) / scene_id;
  if (!fs::exists(scene_dir))
    throw std::runtime_error("import_scene: manifest lists missing scene " + scene_id);

  ImportedScene out;
  out.scene.id = scene_id;
  out.scene.config = entry->config;

  for (int fi = 0; fi < entry->frames; ++fi) {
    std::ostringstream what;
    what << "frame record " << fi << " of scene " << scene_id;
    const json jf = read_file(scene_dir / "frames" / frame_file_name(fi), what.str());
    check_schema(jf, what.str());
    Frame frame;
    frame.index = jf.at("index").get<int>();
    frame.sim_time = jf.at("sim_time").get<double>();
    for (const auto& ja : jf.at("agents")) frame.agents.push_back(agent_from_json(ja));
    for (const auto& jo : jf.at("objects")) frame.objects.push_back(box_from_json(jo));

    for (const auto& a : frame.agents) {
      if (!a.sensored()) continue;
      std::ostringstream name, swhat;
      name << fi << "_" << a.id << ".json";
      swhat << "sample record (frame " << fi << ", ego " << a.id << ") of scene " << scene_id;
      json js;
      try {
        js = read_file(scene_dir / "samples" / name.str(), swhat.str());
        check_schema(js, swhat.str());
        Sample s;
        s.frame_index = js.at("frame_index").get<int>();
        s.ego_id = js.at("ego_id").get<std::string>();
        for (const auto& jb : js.at("annotations")) s.annotations.push_back(box_from_json(jb));
        out.samples.push_back(std::move(s));
      } catch (const json::exception& e) {
        throw std::runtime_error("import_scene: corrupt " + swhat.str() + ": " + e.what());
      }
    }

    std::ostringstream gwhat;
    gwhat << "graph record " << fi << " of scene " << scene_id;
    const json jg = read_file(scene_dir / "graphs" / frame_file_name(fi), gwhat.str());
    check_schema(jg, gwhat.str());
    FramePerception fp;
    fp.frame_index = jg.at("frame_index").get<int>();
    for (const auto& [aid, ids] : jg.at("visibility").items()) {
      IdSet set;
      for (const auto& id : ids) set.insert(id.get<std::string>());
      fp.visibility.by_agent[aid] = std::move(set);
    }
    fp.graph.agent_ids = jg.at("agents").get<std::vector<std::string>>();
    fp.graph.distance = jg.at("distance").get<std::vector<std::vector<double>>>();
    fp.graph.occluded = jg.at("occluded").get<std::vector<std::vector<uint8_t>>>();
    out.perception.push_back(std::move(fp));

    out.scene.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace coopsim
