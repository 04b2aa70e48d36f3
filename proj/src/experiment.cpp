#include "coopsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "coopsim/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace coopsim {

// --- config parsing ---

namespace {

[[noreturn]] void config_error(const std::string& origin, const std::string& path,
                               const std::string& msg) {
  throw std::runtime_error("config error at " + origin + ":" + path + ": " + msg);
}

template <typename T>
T get_field(const json& j, const std::string& origin, const std::string& path,
            const std::string& key) {
  if (!j.contains(key)) config_error(origin, path + "/" + key, "missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(origin, path + "/" + key, e.what());
  }
}

template <typename T>
T get_field_or(const json& j, const std::string& origin, const std::string& path,
               const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(origin, path + "/" + key, e.what());
  }
}

ScenarioConfig parse_scenario(const json& j, const std::string& origin,
                              const std::string& path) {
  ScenarioConfig c;
  c.scene_kind = scene_kind_from_name(get_field<std::string>(j, origin, path, "scene_kind"));
  if (j.contains("center")) {
    const json& jc = j.at("center");
    c.center = Pose::at(get_field_or<double>(jc, origin, path + "/center", "x", 0.0),
                        get_field_or<double>(jc, origin, path + "/center", "y", 0.0),
                        get_field_or<double>(jc, origin, path + "/center", "z", 0.0),
                        get_field_or<double>(jc, origin, path + "/center", "yaw", 0.0));
  }
  if (j.contains("spawn_rect")) {
    const auto rect = get_field<std::array<double, 2>>(j, origin, path, "spawn_rect");
    c.spawn_rect_width = rect[0];
    c.spawn_rect_height = rect[1];
  }
  const json& counts = j.contains("counts") ? j.at("counts") : json::object();
  c.counts.controlled_cav =
      get_field_or<int>(counts, origin, path + "/counts", "controlled_cav", 0);
  c.counts.uncontrolled_cav =
      get_field_or<int>(counts, origin, path + "/counts", "uncontrolled_cav", 0);
  c.counts.rsu = get_field_or<int>(counts, origin, path + "/counts", "rsu", 0);
  c.counts.obstacle = get_field_or<int>(counts, origin, path + "/counts", "obstacle", 0);
  c.object_count = get_field_or<int>(j, origin, path, "object_count", 0);
  c.duration_s = get_field_or<double>(j, origin, path, "duration_s", 20.0);
  c.seed = get_field_or<uint64_t>(j, origin, path, "seed", 0);
  if (c.duration_s <= 0.0) config_error(origin, path + "/duration_s", "must be > 0");
  return c;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config error at " + origin + ": " + e.what());
  }

  ExperimentConfig cfg;
  if (!j.contains("scenarios") || !j.at("scenarios").is_array() || j.at("scenarios").empty())
    config_error(origin, "/scenarios", "need at least one scenario");
  int idx = 0;
  for (const auto& js : j.at("scenarios")) {
    std::ostringstream p;
    p << "/scenarios/" << idx++;
    cfg.scenarios.push_back(parse_scenario(js, origin, p.str()));
  }

  if (j.contains("visibility")) {
    const json& jv = j.at("visibility");
    cfg.visibility.samples_per_box =
        get_field_or<int>(jv, origin, "/visibility", "samples_per_box", 8);
    cfg.visibility.require_fraction =
        get_field_or<double>(jv, origin, "/visibility", "require_fraction", 0.125);
  }
  if (j.contains("noise")) {
    const json& jn = j.at("noise");
    cfg.noise.sigma_xy_m = get_field_or<double>(jn, origin, "/noise", "sigma_xy_m", 0.0);
    cfg.noise.sigma_yaw_rad = get_field_or<double>(jn, origin, "/noise", "sigma_yaw_rad", 0.0);
    cfg.noise.size_jitter_fraction =
        get_field_or<double>(jn, origin, "/noise", "size_jitter_fraction", 0.0);
    cfg.noise.sigma_v_mps = get_field_or<double>(jn, origin, "/noise", "sigma_v_mps", 0.0);
    cfg.noise.dropout_p = get_field_or<double>(jn, origin, "/noise", "dropout_p", 0.0);
    cfg.noise.false_positive_rate =
        get_field_or<double>(jn, origin, "/noise", "false_positive_rate", 0.0);
    try {
      cfg.noise.validate();
    } catch (const std::exception& e) {
      config_error(origin, "/noise", e.what());
    }
  }

  if (!j.contains("policies") || !j.at("policies").is_array() || j.at("policies").empty())
    config_error(origin, "/policies", "need at least one policy");
  idx = 0;
  for (const auto& jp : j.at("policies")) {
    std::ostringstream p;
    p << "/policies/" << idx++;
    const auto name = get_field<std::string>(jp, origin, p.str(), "name");
    const int k = get_field_or<int>(jp, origin, p.str(), "k", 1);
    const double beta = get_field_or<double>(jp, origin, p.str(), "beta", 1.0);
    PolicySpec spec;
    try {
      spec.policy = Policy::from_name(name, k, beta);
    } catch (const std::exception& e) {
      config_error(origin, p.str(), e.what());
    }
    std::ostringstream label;
    label << name;
    if (spec.policy.kind == PolicyKind::MultipleRandom) label << "_k" << k;
    if (spec.policy.kind == PolicyKind::MassUcb) label << "_b" << beta;
    spec.label = label.str();
    cfg.policies.push_back(std::move(spec));
  }

  if (j.contains("ranges_m")) {
    cfg.ranges_m = j.at("ranges_m").get<std::vector<double>>();
    for (const double r : cfg.ranges_m)
      if (r <= 0.0) config_error(origin, "/ranges_m", "ranges must be > 0");
    if (cfg.ranges_m.empty()) config_error(origin, "/ranges_m", "need at least one range");
  }
  if (j.contains("seeds")) {
    cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    if (cfg.seeds.empty()) config_error(origin, "/seeds", "need at least one seed");
  }
  if (j.contains("filter")) {
    const json& jf = j.at("filter");
    cfg.min_length_frames = get_field_or<int>(jf, origin, "/filter", "min_length_frames", 0);
    cfg.min_counts.cav = get_field_or<int>(jf, origin, "/filter", "min_cav", 0);
    cfg.min_counts.rsu = get_field_or<int>(jf, origin, "/filter", "min_rsu", 0);
    cfg.min_counts.obstacle = get_field_or<int>(jf, origin, "/filter", "min_obstacle", 0);
  }
  cfg.dump_detections = get_field_or<bool>(j, origin, "", "dump_detections", false);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config error: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path);
}

// --- generation ---

GenerateSummary run_generate(const ExperimentConfig& config, const std::string& dataset_dir) {
  std::vector<Scene> scenes;
  for (const auto& sc : config.scenarios) scenes.push_back(generate_scene(sc));
  scenes = filter_scenes(scenes, config.min_length_frames, config.min_counts);

  GenerateSummary summary;
  VisibilityModel model = config.visibility;
  model.range_m = config.ranges_m.front();
  for (const auto& scene : scenes) {
    const SceneManifestEntry entry = export_scene(scene, model, dataset_dir);
    summary.scenes += 1;
    summary.frames += entry.frames;
    summary.samples += entry.samples;
    for (const auto& f : scene.frames) summary.boxes += static_cast<long>(f.objects.size());
  }
  if (scenes.empty()) {
    // an empty manifest is still a valid dataset root
    fs::create_directories(dataset_dir);
    json jm{{"schema_version", kSchemaVersion},
            {"generator_version", kGeneratorVersion},
            {"scenes", json::array()}};
    std::ofstream out(fs::path(dataset_dir) / "manifest.json", std::ios::binary);
    out << jm.dump(2) << '\n';
  }
  return summary;
}

// --- replay ---

namespace {

// Visible sets for every sensored agent of one frame, shared across egos.
std::map<std::string, IdSet> frame_visibility(const Frame& frame, const VisibilityModel& model) {
  std::map<std::string, IdSet> vis;
  for (const auto& a : frame.agents)
    if (a.sensored()) vis[a.id] = visible_objects(a, frame, model);
  return vis;
}

IdSet coverage_from_cache(const std::string& ego_id, const std::vector<std::string>& coops,
                          const std::map<std::string, IdSet>& vis, const Frame& frame,
                          const VisibilityModel& model) {
  const Agent* ego = frame.find_agent(ego_id);
  IdSet unioned = vis.at(ego_id);
  for (const auto& c : coops) {
    const IdSet& s = vis.at(c);
    unioned.insert(s.begin(), s.end());
  }
  IdSet out;
  for (const auto& obj : frame.objects)
    if (unioned.count(obj.id) != 0 &&
        (obj.center.xy() - ego->pose.xy()).norm() <= model.range_m)
      out.insert(obj.id);
  return out;
}

struct SceneReplayOutput {
  SceneProvenance provenance;
  std::vector<SampleDetections> detections;
  std::vector<SampleTruth> truth;
  long coverage_sum = 0;
  long truth_sum = 0;
  uint64_t bytes_total = 0;
  uint64_t bytes_max = 0;
  long refused = 0;
};

SceneReplayOutput replay_scene(const ImportedScene& data, const PolicySpec& spec,
                               const VisibilityModel& model, const NoiseModel& noise,
                               uint64_t seed) {
  const Scene& scene = data.scene;
  SceneReplayOutput out;
  out.provenance.scene_id = scene.id;
  out.provenance.frames = static_cast<int>(scene.frames.size());

  std::map<std::string, PolicyState> states;  // per ego
  for (const Frame& frame : scene.frames) {
    const auto vis = frame_visibility(frame, model);

    std::vector<std::string> sensored;
    for (const auto& a : frame.agents)
      if (a.sensored()) sensored.push_back(a.id);
    std::sort(sensored.begin(), sensored.end());

    for (const auto& ego_id : sensored) {
      std::vector<std::string> candidates;
      for (const auto& id : sensored)
        if (id != ego_id) candidates.push_back(id);

      PolicyState& state = states[ego_id];
      BandwidthBudget budget;
      const uint64_t ego_seed =
          mix_seed(mix_seed(mix_seed(seed, scene.id), ego_id), static_cast<uint64_t>(frame.index));

      std::optional<std::map<std::string, int>> handshake_gains;
      if (spec.policy.uses_handshake() && !candidates.empty()) {
        const auto replies = run_handshake(
            ego_id, candidates, frame,
            [&](const std::string& cid) {
              const IdSet base = coverage_from_cache(ego_id, {}, vis, frame, model);
              const IdSet with_c = coverage_from_cache(ego_id, {cid}, vis, frame, model);
              return static_cast<int>(with_c.size() - base.size());
            },
            nullptr);
        // request + one reply per candidate, against the same budget
        Message req{frame.index, MessageKind::Request, ego_id, "*", kControlMessageBytes, 0.0};
        budget.try_charge(req);
        handshake_gains.emplace();
        for (const auto& [cid, gain] : replies) {
          Message rep{frame.index, MessageKind::BenchmarkReply, cid, ego_id,
                      kControlMessageBytes, static_cast<double>(gain)};
          budget.try_charge(rep);
          (*handshake_gains)[cid] = gain;
        }
      }

      const ScheduleDecision decision =
          schedule(spec.policy, ego_id, candidates, frame, state, ego_seed);

      // raw shares from the chosen cooperators, dropped when over budget
      std::vector<std::string> accepted;
      std::map<std::string, int> realized;
      const IdSet base = coverage_from_cache(ego_id, {}, vis, frame, model);
      for (const auto& cid : decision.chosen) {
        const Agent* sender = frame.find_agent(cid);
        Message share{frame.index, MessageKind::DataShare, cid, ego_id,
                      payload_size(*sender, frame), 0.0};
        if (budget.try_charge(share)) {
          accepted.push_back(cid);
          const IdSet with_c = coverage_from_cache(ego_id, {cid}, vis, frame, model);
          realized[cid] = static_cast<int>(with_c.size() - base.size());
        } else {
          out.refused += 1;
          realized[cid] = 0;  // refused share contributes nothing
        }
      }
      if (budget.spent_bytes > budget.limit_bytes)
        throw std::logic_error("replay: bandwidth budget exceeded");
      out.bytes_total += budget.spent_bytes;
      out.bytes_max = std::max(out.bytes_max, budget.spent_bytes);

      update_state(state, decision, realized, handshake_gains);

      const IdSet coverage = coverage_from_cache(ego_id, accepted, vis, frame, model);
      const Agent* ego = frame.find_agent(ego_id);
      SampleDetections dets;
      dets.scene_id = scene.id;
      dets.frame_index = frame.index;
      dets.ego_id = ego_id;
      dets.detections = simulate_detections(coverage, frame, *ego, noise, model.range_m,
                                            mix_seed(ego_seed, "detections"));
      out.detections.push_back(std::move(dets));

      const Sample gt = build_sample(frame, ego_id, model.range_m);
      SampleTruth st;
      st.scene_id = scene.id;
      st.frame_index = frame.index;
      st.ego_id = ego_id;
      st.boxes = gt.annotations;
      out.truth.push_back(std::move(st));

      out.coverage_sum += static_cast<long>(coverage.size());
      out.truth_sum += static_cast<long>(gt.annotations.size());

      std::ostringstream dec;
      dec << frame.index << ":" << ego_id << "->";
      for (size_t i = 0; i < decision.chosen.size(); ++i) {
        if (i > 0) dec << ',';
        dec << decision.chosen[i];
      }
      out.provenance.decisions.push_back(dec.str());
    }
  }
  out.provenance.coverage_recall =
      out.truth_sum > 0 ? static_cast<double>(out.coverage_sum) / out.truth_sum : 0.0;
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed << v;
  return os.str();
}

}  // namespace

ExperimentResults run_experiment(const ExperimentConfig& config, const std::string& dataset_dir,
                                 const std::string& out_dir, int workers) {
  const DatasetManifest manifest = read_manifest(dataset_dir);
  std::vector<ImportedScene> scenes;
  for (const auto& entry : manifest.scenes)
    scenes.push_back(import_scene(dataset_dir, entry.id));

  fs::create_directories(out_dir);
  ExperimentResults results;

  for (const auto& spec : config.policies) {
    for (const double range : config.ranges_m) {
      VisibilityModel model = config.visibility;
      model.range_m = range;
      for (const uint64_t seed : config.seeds) {
        std::vector<SceneReplayOutput> per_scene(scenes.size());
        parallel_for(static_cast<int>(scenes.size()), workers, [&](int i) {
          per_scene[static_cast<size_t>(i)] =
              replay_scene(scenes[static_cast<size_t>(i)], spec, model, config.noise, seed);
        });

        CellResult cell;
        cell.policy_label = spec.label;
        cell.range_m = range;
        cell.seed = seed;
        std::vector<SampleDetections> all_dets;
        std::vector<SampleTruth> all_truth;
        long cov_sum = 0, truth_sum = 0;
        for (auto& so : per_scene) {
          cov_sum += so.coverage_sum;
          truth_sum += so.truth_sum;
          cell.bytes_total += so.bytes_total;
          cell.bytes_max_per_ego_frame = std::max(cell.bytes_max_per_ego_frame, so.bytes_max);
          cell.refused_shares += so.refused;
          cell.scenes.push_back(std::move(so.provenance));
          std::move(so.detections.begin(), so.detections.end(), std::back_inserter(all_dets));
          std::move(so.truth.begin(), so.truth.end(), std::back_inserter(all_truth));
        }
        cell.coverage_recall = truth_sum > 0 ? static_cast<double>(cov_sum) / truth_sum : 0.0;
        cell.report = score(all_dets, all_truth);
        if (config.dump_detections) {
          std::ostringstream name;
          name << "detections_" << spec.label << "_" << range << "_" << seed << ".json";
          save_detections(all_dets, (fs::path(out_dir) / name.str()).string());
        }
        results.cells.push_back(std::move(cell));
      }
    }
  }

  // results.json: full provenance
  json jr{{"schema_version", kSchemaVersion}};
  jr["cells"] = json::array();
  for (const auto& c : results.cells) {
    json jc{{"policy", c.policy_label},
            {"range_m", c.range_m},
            {"seed", c.seed},
            {"mAP", c.report.mean_ap},
            {"NDS", c.report.nds},
            {"mATE", c.report.mate},
            {"mASE", c.report.mase},
            {"mAOE", c.report.maoe},
            {"mAVE", c.report.mave},
            {"coverage_recall", c.coverage_recall},
            {"bytes_total", c.bytes_total},
            {"bytes_max_per_ego_frame", c.bytes_max_per_ego_frame},
            {"refused_shares", c.refused_shares}};
    jc["scenes"] = json::array();
    for (const auto& s : c.scenes)
      jc["scenes"].push_back(json{{"scene_id", s.scene_id},
                                  {"frames", s.frames},
                                  {"coverage_recall", s.coverage_recall},
                                  {"decisions", s.decisions}});
    jr["cells"].push_back(std::move(jc));
  }
  {
    std::ofstream out(fs::path(out_dir) / "results.json", std::ios::binary);
    if (!out) throw std::runtime_error("run_experiment: cannot write results.json");
    out << jr.dump(2) << '\n';
  }

  // results.csv: per-seed rows plus mean/std rows per (policy, range)
  std::ostringstream csv;
  csv << "policy,range_m,seed,mAP,NDS,coverage_recall,bytes_total,bytes_max_per_ego_frame,"
         "refused_shares\n";
  std::ostringstream md;
  md << "| policy | range_m | seed | mAP | NDS | coverage_recall |\n";
  md << "|---|---|---|---|---|---|\n";
  for (const auto& spec : config.policies) {
    for (const double range : config.ranges_m) {
      std::vector<const CellResult*> group;
      for (const auto& c : results.cells)
        if (c.policy_label == spec.label && c.range_m == range) group.push_back(&c);
      double map_sum = 0, nds_sum = 0, cov_sum = 0;
      for (const CellResult* c : group) {
        csv << c->policy_label << ',' << c->range_m << ',' << c->seed << ','
            << format_double(c->report.mean_ap) << ',' << format_double(c->report.nds) << ','
            << format_double(c->coverage_recall) << ',' << c->bytes_total << ','
            << c->bytes_max_per_ego_frame << ',' << c->refused_shares << '\n';
        md << "| " << c->policy_label << " | " << c->range_m << " | " << c->seed << " | "
           << format_double(c->report.mean_ap) << " | " << format_double(c->report.nds)
           << " | " << format_double(c->coverage_recall) << " |\n";
        map_sum += c->report.mean_ap;
        nds_sum += c->report.nds;
        cov_sum += c->coverage_recall;
      }
      if (group.size() > 1) {
        const double n = static_cast<double>(group.size());
        const double map_mean = map_sum / n, nds_mean = nds_sum / n, cov_mean = cov_sum / n;
        double map_var = 0, nds_var = 0, cov_var = 0;
        for (const CellResult* c : group) {
          map_var += (c->report.mean_ap - map_mean) * (c->report.mean_ap - map_mean);
          nds_var += (c->report.nds - nds_mean) * (c->report.nds - nds_mean);
          cov_var += (c->coverage_recall - cov_mean) * (c->coverage_recall - cov_mean);
        }
        csv << spec.label << ',' << range << ",mean," << format_double(map_mean) << ','
            << format_double(nds_mean) << ',' << format_double(cov_mean) << ",,,\n";
        csv << spec.label << ',' << range << ",std," << format_double(std::sqrt(map_var / n))
            << ',' << format_double(std::sqrt(nds_var / n)) << ','
            << format_double(std::sqrt(cov_var / n)) << ",,,\n";
      }
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "results.csv", std::ios::binary);
    out << csv.str();
    std::ofstream outm(fs::path(out_dir) / "results.md", std::ios::binary);
    outm << md.str();
  }
  return results;
}

// --- scaling benchmark ---

std::string ScalingReport::to_csv() const {
  std::ostringstream os;
  os << "agents,mean_tick_ms\n";
  for (const auto& r : rows) os << r.agents << ',' << r.mean_tick_ms << '\n';
  os << "r2," << std::setprecision(4) << std::fixed << r2 << '\n';
  return os.str();
}

ScalingReport bench_scaling(const std::vector<int>& agent_counts, uint64_t seed,
                            int worker_count) {
  if (!std::is_sorted(agent_counts.begin(), agent_counts.end()))
    throw std::invalid_argument("bench_scaling: counts must be ascending");

  ScalingReport report;
  std::vector<double> xs, ys;
  for (const int n : agent_counts) {
    ScenarioConfig cfg;
    cfg.scene_kind = SceneKind::Intersection;
    cfg.spawn_rect_width = 220.0;
    cfg.spawn_rect_height = 220.0;
    cfg.counts.uncontrolled_cav = n;
    cfg.counts.obstacle = 10;
    cfg.object_count = 50;
    cfg.duration_s = 10.0;
    cfg.seed = mix_seed(seed, static_cast<uint64_t>(n));

    const SceneRun run = run_parallel(cfg, worker_count, VisibilityModel{});
    double total = 0.0;
    for (const auto& t : run.timing.ticks) total += t.wall_ms;
    const double mean_ms = total / static_cast<double>(run.timing.ticks.size());
    report.rows.push_back({n, mean_ms});
    xs.push_back(static_cast<double>(n));
    ys.push_back(mean_ms);
  }
  report.r2 = linear_fit_r2(xs, ys);
  return report;
}

// --- detection dumps ---

void save_detections(const std::vector<SampleDetections>& dets, const std::string& path) {
  json j{{"schema_version", kSchemaVersion}};
  j["samples"] = json::array();
  for (const auto& sd : dets) {
    json js{{"scene_id", sd.scene_id}, {"frame_index", sd.frame_index}, {"ego_id", sd.ego_id}};
    js["detections"] = json::array();
    for (const auto& d : sd.detections) {
      js["detections"].push_back(
          json{{"id", d.box.id},
               {"class", object_class_name(d.box.cls)},
               {"center", {d.box.center.x, d.box.center.y, d.box.center.z, d.box.center.yaw}},
               {"size", {d.box.size.length, d.box.size.width, d.box.size.height}},
               {"velocity", d.box.velocity},
               {"score", d.score}});
    }
    j["samples"].push_back(std::move(js));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_detections: cannot open " + path);
  out << j.dump(2) << '\n';
}

std::vector<SampleDetections> load_detections(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_detections: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("load_detections: corrupt file " + path + ": " + e.what());
  }
  if (j.at("schema_version").get<int>() != kSchemaVersion)
    throw std::runtime_error("load_detections: schema version mismatch in " + path);
  std::vector<SampleDetections> out;
  for (const auto& js : j.at("samples")) {
    SampleDetections sd;
    sd.scene_id = js.at("scene_id").get<std::string>();
    sd.frame_index = js.at("frame_index").get<int>();
    sd.ego_id = js.at("ego_id").get<std::string>();
    for (const auto& jd : js.at("detections")) {
      const auto c = jd.at("center").get<std::array<double, 4>>();
      const auto s = jd.at("size").get<std::array<double, 3>>();
      Detection d;
      d.box = ObjectBox::make(jd.at("id").get<std::string>(),
                              object_class_from_name(jd.at("class").get<std::string>()),
                              Pose::at(c[0], c[1], c[2], c[3]), BoxSize{s[0], s[1], s[2]},
                              jd.at("velocity").get<std::array<double, 2>>());
      d.score = jd.at("score").get<double>();
      sd.detections.push_back(std::move(d));
    }
    out.push_back(std::move(sd));
  }
  return out;
}

std::vector<SampleTruth> dataset_truth(const std::string& dataset_dir, double range_m) {
  const DatasetManifest manifest = read_manifest(dataset_dir);
  std::vector<SampleTruth> out;
  for (const auto& entry : manifest.scenes) {
    const ImportedScene data = import_scene(dataset_dir, entry.id);
    for (const Frame& frame : data.scene.frames) {
      for (const auto& a : frame.agents) {
        if (!a.sensored()) continue;
        const Sample s = build_sample(frame, a.id, range_m);
        out.push_back({data.scene.id, frame.index, a.id, s.annotations});
      }
    }
  }
  return out;
}

}  // namespace coopsim
