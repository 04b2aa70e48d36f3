#pragma once
// Detection scoring: center-distance matched per-class AP, TP errors, and NDS
// with the attribute error preset to 1; plus the noise model used to exercise
// the pipeline.

#include <map>
#include <string>
#include <vector>

#include "coopsim/sensing.hpp"
#include "coopsim/types.hpp"

namespace coopsim {

struct NoiseModel {
  double sigma_xy_m = 0.0;
  double sigma_yaw_rad = 0.0;
  double size_jitter_fraction = 0.0;
  double sigma_v_mps = 0.0;
  double dropout_p = 0.0;
  double false_positive_rate = 0.0;  // expected count per frame

  void validate() const {
    if (sigma_xy_m < 0 || sigma_yaw_rad < 0 || size_jitter_fraction < 0 || sigma_v_mps < 0 ||
        dropout_p < 0 || false_positive_rate < 0)
      throw std::invalid_argument("NoiseModel: parameters must be >= 0");
    if (dropout_p >= 1.0) throw std::invalid_argument("NoiseModel: dropout_p must be < 1");
  }
};

struct Detection {
  ObjectBox box;  // ego frame
  double score = 1.0;
};

// One ego's detections for one frame, keyed so pooled scoring can match
// detections to truth inside the right sample.
struct SampleDetections {
  std::string scene_id;
  int frame_index = 0;
  std::string ego_id;
  std::vector<Detection> detections;
};

struct SampleTruth {
  std::string scene_id;
  int frame_index = 0;
  std::string ego_id;
  std::vector<ObjectBox> boxes;  // ego frame
};

inline const std::vector<double>& default_match_thresholds() {
  static const std::vector<double> t{0.5, 1.0, 2.0, 4.0};
  return t;
}
constexpr double kTpErrorThresholdM = 2.0;
constexpr double kMinRecall = 0.1;
constexpr double kMinPrecision = 0.1;

struct MetricsReport {
  bool empty = false;  // no truth and no detections anywhere
  // class name -> threshold -> AP
  std::map<std::string, std::map<double, double>> ap;
  double mean_ap = 0.0;
  double mate = 1.0;
  double mase = 1.0;
  double maoe = 1.0;
  double mave = 1.0;
  double maae = 1.0;  // preset: no attribute labels
  double nds = 0.0;

  std::string to_json_string() const;
  static std::string csv_header();
  std::string to_csv_row(const std::string& label) const;
};

// Oracle detections for one (ego, frame): visible objects dropped/perturbed
// per the noise model, false positives injected uniformly within range.
// Deterministic given seed.
std::vector<Detection> simulate_detections(const IdSet& visible, const Frame& frame,
                                           const Agent& ego, const NoiseModel& noise,
                                           double range_m, uint64_t seed);

MetricsReport score(const std::vector<SampleDetections>& detections,
                    const std::vector<SampleTruth>& truth,
                    const std::vector<double>& thresholds = default_match_thresholds());

// 1 - intersection-over-union of the two boxes after aligning center and yaw.
double scale_error(const BoxSize& est, const BoxSize& truth);

}  // namespace coopsim
