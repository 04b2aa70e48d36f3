#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "coopsim/experiment.hpp"

namespace fs = std::filesystem;
using namespace coopsim;

namespace {

const char* kSmallConfig = R"json({
  "scenarios": [
    {"scene_kind": "intersection", "spawn_rect": [140, 140],
     "counts": {"controlled_cav": 1, "uncontrolled_cav": 2, "rsu": 1, "obstacle": 2},
     "object_count": 6, "duration_s": 5.0, "seed": 3},
    {"scene_kind": "t_junction", "spawn_rect": [140, 140],
     "counts": {"controlled_cav": 1, "uncontrolled_cav": 2, "rsu": 1, "obstacle": 2},
     "object_count": 6, "duration_s": 5.0, "seed": 4}
  ],
  "policies": [
    {"name": "no_fusion"},
    {"name": "closest_agent"},
    {"name": "historical_best"}
  ],
  "ranges_m": [50.0],
  "seeds": [1, 2]
})json";

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("coopsim_harness_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("config parsing accepts the reference config") {
  const ExperimentConfig cfg = parse_experiment_config(kSmallConfig);
  CHECK(cfg.scenarios.size() == 2);
  CHECK(cfg.scenarios[0].scene_kind == SceneKind::Intersection);
  CHECK(cfg.scenarios[1].scene_kind == SceneKind::TJunction);
  CHECK(cfg.scenarios[0].counts.uncontrolled_cav == 2);
  CHECK(cfg.policies.size() == 3);
  CHECK(cfg.policies[0].label == "no_fusion");
  CHECK(cfg.ranges_m == std::vector<double>{50.0});
  CHECK(cfg.seeds == std::vector<uint64_t>{1, 2});
  CHECK_FALSE(cfg.dump_detections);
}

TEST_CASE("config errors carry the json path of the offending field") {
  const auto expect_error = [](const char* text, const char* needle) {
    try {
      parse_experiment_config(text, "test.json");
      FAIL_CHECK("expected a config error for: " << text);
    } catch (const std::runtime_error& e) {
      const std::string msg = e.what();
      CHECK(msg.rfind("config error", 0) == 0);
      CHECK_MESSAGE(msg.find(needle) != std::string::npos, msg);
    }
  };
  expect_error("{not json", "test.json");
  expect_error(R"({"policies": [{"name": "no_fusion"}]})", "/scenarios");
  expect_error(R"({"scenarios": [{}], "policies": [{"name": "no_fusion"}]})",
               "/scenarios/0/scene_kind");
  expect_error(R"({"scenarios": [{"scene_kind": "intersection"}], "policies": []})",
               "/policies");
  expect_error(
      R"({"scenarios": [{"scene_kind": "intersection"}], "policies": [{"name": "bogus"}]})",
      "/policies/0");
  expect_error(
      R"({"scenarios": [{"scene_kind": "intersection"}],
          "policies": [{"name": "no_fusion"}], "ranges_m": [-5]})",
      "/ranges_m");
  expect_error(
      R"({"scenarios": [{"scene_kind": "intersection"}],
          "policies": [{"name": "no_fusion"}], "noise": {"dropout_p": 1.5}})",
      "/noise");
  expect_error(
      R"({"scenarios": [{"scene_kind": "intersection", "duration_s": -1}],
          "policies": [{"name": "no_fusion"}]})",
      "/scenarios/0/duration_s");
}

TEST_CASE("policy labels embed their parameters") {
  const ExperimentConfig cfg = parse_experiment_config(R"json({
    "scenarios": [{"scene_kind": "intersection"}],
    "policies": [{"name": "multiple_random", "k": 3}, {"name": "mass_ucb", "beta": 0.5}]
  })json");
  CHECK(cfg.policies[0].label == "multiple_random_k3");
  CHECK(cfg.policies[1].label == "mass_ucb_b0.5");
}

TEST_CASE("generate summary arithmetic matches the manifest") {
  const fs::path dataset = fresh_dir("gen");
  const ExperimentConfig cfg = parse_experiment_config(kSmallConfig);
  const GenerateSummary s = run_generate(cfg, dataset.string());
  CHECK(s.scenes == 2);
  CHECK(s.frames == 20);        // 2 scenes x 10 frames
  CHECK(s.samples == 20 * 4);   // 4 sensored agents per frame
  CHECK(s.boxes == 20 * 8);     // 6 standalone objects + 2 obstacle twins per frame

  const DatasetManifest m = read_manifest(dataset.string());
  CHECK(static_cast<int>(m.scenes.size()) == s.scenes);
  CHECK(m.total_frames() == s.frames);
  CHECK(m.total_samples() == s.samples);
}

TEST_CASE("an all-filtering generate still writes a valid empty manifest") {
  const fs::path dataset = fresh_dir("gen_empty");
  ExperimentConfig cfg = parse_experiment_config(kSmallConfig);
  cfg.min_length_frames = 1000;  // nothing qualifies
  const GenerateSummary s = run_generate(cfg, dataset.string());
  CHECK(s.scenes == 0);
  CHECK(read_manifest(dataset.string()).scenes.empty());
}

TEST_CASE("experiment runs every cell and is byte-reproducible") {
  const fs::path dataset = fresh_dir("exp_data");
  const ExperimentConfig cfg = parse_experiment_config(kSmallConfig);
  run_generate(cfg, dataset.string());

  const fs::path out1 = fresh_dir("exp_out1");
  const ExperimentResults r1 = run_experiment(cfg, dataset.string(), out1.string(), 1);
  CHECK(r1.cells.size() == 3 * 1 * 2);  // policies x ranges x seeds
  for (const auto& c : r1.cells) {
    CHECK(c.coverage_recall >= 0.0);
    CHECK(c.coverage_recall <= 1.0 + 1e-12);
    CHECK(c.bytes_max_per_ego_frame <= kBandwidthLimitBytes);
    CHECK(c.scenes.size() == 2);
    // one decision per (frame, ego)
    for (const auto& sp : c.scenes) CHECK(sp.decisions.size() == 10 * 4);
    // zero noise: every covered object is detected perfectly
    CHECK(c.report.mean_ap > 0.0);
  }
  CHECK(fs::exists(out1 / "results.json"));
  CHECK(fs::exists(out1 / "results.csv"));
  CHECK(fs::exists(out1 / "results.md"));

  // multi-seed summary rows
  const std::string csv = slurp(out1 / "results.csv");
  CHECK(csv.find(",mean,") != std::string::npos);
  CHECK(csv.find(",std,") != std::string::npos);

  // rerun and rerun-with-workers produce identical bytes
  const fs::path out2 = fresh_dir("exp_out2");
  run_experiment(cfg, dataset.string(), out2.string(), 1);
  CHECK(slurp(out1 / "results.json") == slurp(out2 / "results.json"));
  const fs::path out3 = fresh_dir("exp_out3");
  run_experiment(cfg, dataset.string(), out3.string(), 4);
  CHECK(slurp(out1 / "results.json") == slurp(out3 / "results.json"));
  CHECK(slurp(out1 / "results.csv") == slurp(out3 / "results.csv"));
}

TEST_CASE("cooperation beats isolation on coverage") {
  const fs::path dataset = fresh_dir("coop_data");
  ExperimentConfig cfg = parse_experiment_config(kSmallConfig);
  cfg.seeds = {1};
  run_generate(cfg, dataset.string());
  const fs::path out = fresh_dir("coop_out");
  const ExperimentResults r = run_experiment(cfg, dataset.string(), out.string(), 2);

  double no_fusion = -1.0, closest = -1.0;
  for (const auto& c : r.cells) {
    if (c.policy_label == "no_fusion") no_fusion = c.coverage_recall;
    if (c.policy_label == "closest_agent") closest = c.coverage_recall;
  }
  REQUIRE(no_fusion >= 0.0);
  REQUIRE(closest >= 0.0);
  CHECK(closest >= no_fusion);
  // no fusion sends no data shares
  for (const auto& c : r.cells)
    if (c.policy_label == "no_fusion") CHECK(c.bytes_total == 0);
}

TEST_CASE("scaling benchmark fits a line over agent counts") {
  const ScalingReport rep = bench_scaling({2, 4}, 1);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].agents == 2);
  CHECK(rep.rows[1].agents == 4);
  CHECK(rep.rows[0].mean_tick_ms > 0.0);
  CHECK(rep.r2 >= 0.0);
  CHECK(rep.r2 <= 1.0);
  const std::string csv = rep.to_csv();
  CHECK(csv.rfind("agents,mean_tick_ms\n", 0) == 0);
  CHECK(csv.find("r2,") != std::string::npos);
  CHECK_THROWS_AS(bench_scaling({4, 2}, 1), std::invalid_argument);
}

TEST_CASE("detection dumps round-trip") {
  const fs::path dir = fresh_dir("dets");
  std::vector<SampleDetections> dets;
  SampleDetections sd;
  sd.scene_id = "s";
  sd.frame_index = 2;
  sd.ego_id = "cav00";
  sd.detections.push_back(
      {ObjectBox::make("a", ObjectClass::Cyclist, Pose::at(1.5, -2.0, 0.0, 0.3),
                       {1.8, 0.6, 1.6}, {2.0, -1.0}),
       0.75});
  dets.push_back(sd);
  const std::string path = (dir / "d.json").string();
  save_detections(dets, path);
  const auto back = load_detections(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].scene_id == "s");
  CHECK(back[0].frame_index == 2);
  REQUIRE(back[0].detections.size() == 1);
  CHECK(back[0].detections[0].box.id == "a");
  CHECK(back[0].detections[0].box.cls == ObjectClass::Cyclist);
  CHECK(back[0].detections[0].box.center.x == 1.5);
  CHECK(back[0].detections[0].score == 0.75);

  std::ofstream bad(dir / "bad.json");
  bad << "{\"schema_version\": 99, \"samples\": []}";
  bad.close();
  CHECK_THROWS_WITH_AS(load_detections((dir / "bad.json").string()),
                       doctest::Contains("schema version mismatch"), std::runtime_error);
}

TEST_CASE("dataset truth covers every frame-ego pair") {
  const fs::path dataset = fresh_dir("truth");
  const ExperimentConfig cfg = parse_experiment_config(kSmallConfig);
  run_generate(cfg, dataset.string());
  const auto truth = dataset_truth(dataset.string(), 50.0);
  CHECK(truth.size() == 20 * 4);
  for (const auto& t : truth)
    for (const auto& b : t.boxes) CHECK(std::hypot(b.center.x, b.center.y) <= 50.0);
}
