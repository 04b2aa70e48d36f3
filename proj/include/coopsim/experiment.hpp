#pragma once
// Experiment harness: config parsing, dataset generation, policy x range
// replay with budget accounting, scoring, and table emission.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coopsim/comms.hpp"
#include "coopsim/dataio.hpp"
#include "coopsim/engine.hpp"
#include "coopsim/metrics.hpp"
#include "coopsim/scheduling.hpp"

namespace coopsim {

struct PolicySpec {
  Policy policy;
  std::string label;  // policy name plus parameters
};

struct ExperimentConfig {
  std::vector<ScenarioConfig> scenarios;
  VisibilityModel visibility;  // range_m overridden per detection range
  NoiseModel noise;
  std::vector<PolicySpec> policies;
  std::vector<double> ranges_m{50.0, 100.0};
  std::vector<uint64_t> seeds{1};
  int min_length_frames = 0;
  CategoryMinima min_counts;
  bool dump_detections = false;
};

// Parses and validates the experiment config; errors carry the JSON path of
// the offending field.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& origin = "<config>");

struct GenerateSummary {
  int scenes = 0;
  int frames = 0;
  int samples = 0;
  long boxes = 0;
};

// Generates, filters, and exports every configured scenario.
GenerateSummary run_generate(const ExperimentConfig& config, const std::string& dataset_dir);

struct SceneProvenance {
  std::string scene_id;
  int frames = 0;
  double coverage_recall = 0.0;
  // one entry per (frame, ego) scheduling decision
  std::vector<std::string> decisions;  // "frame:ego->a,b"
};

struct CellResult {
  std::string policy_label;
  double range_m = 0.0;
  uint64_t seed = 0;
  MetricsReport report;
  double coverage_recall = 0.0;
  uint64_t bytes_total = 0;
  uint64_t bytes_max_per_ego_frame = 0;
  long refused_shares = 0;
  std::vector<SceneProvenance> scenes;
};

struct ExperimentResults {
  std::vector<CellResult> cells;  // policy-major, then range, then seed
};

// Replays the dataset for every policy x range x seed and writes
// results.{json,csv,md} under out_dir. Byte-reproducible for fixed seeds,
// independent of worker count.
ExperimentResults run_experiment(const ExperimentConfig& config, const std::string& dataset_dir,
                                 const std::string& out_dir, int workers = 1);

struct ScalingRow {
  int agents = 0;
  double mean_tick_ms = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double r2 = 0.0;
  std::string to_csv() const;
};

// Measures run_parallel per-tick cost across agent counts and fits a line.
ScalingReport bench_scaling(const std::vector<int>& agent_counts, uint64_t seed,
                            int worker_count = 1);

// Detection dump round-trip for the score subcommand.
void save_detections(const std::vector<SampleDetections>& dets, const std::string& path);
std::vector<SampleDetections> load_detections(const std::string& path);

// Ground-truth samples for every (frame, ego) of the dataset at this range.
std::vector<SampleTruth> dataset_truth(const std::string& dataset_dir, double range_m);

}  // namespace coopsim
