#include "coopsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "coopsim/rng.hpp"

using nlohmann::json;

namespace coopsim {

double scale_error(const BoxSize& est, const BoxSize& truth) {
  const double inter = std::min(est.length, truth.length) * std::min(est.width, truth.width) *
                       std::min(est.height, truth.height);
  const double vol_e = est.length * est.width * est.height;
  const double vol_t = truth.length * truth.width * truth.height;
  const double uni = vol_e + vol_t - inter;
  return uni > 0.0 ? 1.0 - inter / uni : 1.0;
}

std::vector<Detection> simulate_detections(const IdSet& visible, const Frame& frame,
                                           const Agent& ego, const NoiseModel& noise,
                                           double range_m, uint64_t seed) {
  noise.validate();
  if (range_m <= 0.0) throw std::invalid_argument("simulate_detections: range must be > 0");

  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> uni01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Detection> out;
  // iterate in id order for determinism
  for (const auto& obj : frame.objects) {
    if (visible.count(obj.id) == 0) continue;
    if (uni01(rng) < noise.dropout_p) continue;
    ObjectBox b = transform_to_ego(obj, ego.pose);
    const double dx = noise.sigma_xy_m * gauss(rng);
    const double dy = noise.sigma_xy_m * gauss(rng);
    b.center.x += dx;
    b.center.y += dy;
    b.center.yaw = normalize_angle(b.center.yaw + noise.sigma_yaw_rad * gauss(rng));
    const double sf = std::max(0.05, 1.0 + noise.size_jitter_fraction * gauss(rng));
    b.size = {b.size.length * sf, b.size.width * sf, b.size.height * sf};
    b.velocity[0] += noise.sigma_v_mps * gauss(rng);
    b.velocity[1] += noise.sigma_v_mps * gauss(rng);
    out.push_back({b, 1.0 / (1.0 + std::hypot(dx, dy))});
  }

  // false positives, count ~ Poisson(rate), uniform in the detection disk
  if (noise.false_positive_rate > 0.0) {
    std::poisson_distribution<int> n_fp(noise.false_positive_rate);
    const int n = n_fp(rng);
    std::uniform_int_distribution<int> pick_class(0, 2);
    for (int i = 0; i < n; ++i) {
      const double r = range_m * std::sqrt(uni01(rng));
      const double a = 2.0 * kPi * uni01(rng) - kPi;
      const auto cls = static_cast<ObjectClass>(pick_class(rng));
      BoxSize size{4.6, 1.9, 1.6};
      if (cls == ObjectClass::Pedestrian) size = {0.5, 0.5, 1.8};
      if (cls == ObjectClass::Cyclist) size = {1.8, 0.6, 1.6};
      std::ostringstream id;
      id << "fp" << frame.index << "_" << i;
      ObjectBox b = ObjectBox::make(id.str(), cls,
                                    Pose::at(r * std::cos(a), r * std::sin(a), 0.0,
                                             2.0 * kPi * uni01(rng) - kPi),
                                    size);
      out.push_back({b, 0.1 + 0.4 * uni01(rng)});
    }
  }
  return out;
}

namespace {

struct PooledDetection {
  size_t sample = 0;  // index into the truth/detection sample pairing
  const Detection* det = nullptr;
};

struct MatchResult {
  // precision/recall points in score-descending order
  std::vector<double> recall;
  std::vector<double> precision;
  // matched (det, truth) pairs, for TP errors
  std::vector<std::pair<const Detection*, const ObjectBox*>> matches;
  int truth_count = 0;
};

// Greedy score-descending matching by planar center distance, per class.
MatchResult match_class(const std::vector<std::vector<const Detection*>>& dets_by_sample,
                        const std::vector<std::vector<const ObjectBox*>>& truth_by_sample,
                        double threshold) {
  MatchResult res;
  for (const auto& t : truth_by_sample) res.truth_count += static_cast<int>(t.size());

  std::vector<PooledDetection> pool;
  for (size_t s = 0; s < dets_by_sample.size(); ++s)
    for (const Detection* d : dets_by_sample[s]) pool.push_back({s, d});
  std::sort(pool.begin(), pool.end(), [](const PooledDetection& a, const PooledDetection& b) {
    if (a.det->score != b.det->score) return a.det->score > b.det->score;
    if (a.sample != b.sample) return a.sample < b.sample;
    return a.det->box.id < b.det->box.id;  // stable under input permutation
  });

  std::vector<std::vector<bool>> taken(truth_by_sample.size());
  for (size_t s = 0; s < truth_by_sample.size(); ++s)
    taken[s].assign(truth_by_sample[s].size(), false);

  int tp = 0, fp = 0;
  for (const auto& pd : pool) {
    const auto& truths = truth_by_sample[pd.sample];
    int best = -1;
    double best_d = 0.0;
    for (size_t i = 0; i < truths.size(); ++i) {
      if (taken[pd.sample][i]) continue;
      const double d = std::hypot(pd.det->box.center.x - truths[i]->center.x,
                                  pd.det->box.center.y - truths[i]->center.y);
      if (d <= threshold && (best < 0 || d < best_d)) {
        best = static_cast<int>(i);
        best_d = d;
      }
    }
    if (best >= 0) {
      taken[pd.sample][static_cast<size_t>(best)] = true;
      res.matches.emplace_back(pd.det, truths[static_cast<size_t>(best)]);
      ++tp;
    } else {
      ++fp;
    }
    res.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    res.recall.push_back(res.truth_count > 0
                             ? static_cast<double>(tp) / static_cast<double>(res.truth_count)
                             : 0.0);
  }
  return res;
}

// 101-point interpolated AP with recall and precision floors.
double calc_ap(const MatchResult& m) {
  if (m.truth_count == 0) return 0.0;
  if (m.recall.empty()) return 0.0;
  constexpr int kSamples = 101;
  double acc = 0.0;
  int used = 0;
  for (int i = 0; i < kSamples; ++i) {
    const double r = static_cast<double>(i) / (kSamples - 1);
    if (r < kMinRecall + 1e-12 && i < static_cast<int>(std::round(kMinRecall * (kSamples - 1))) + 1)
      continue;
    // interpolate precision at recall r (0 beyond the max achieved recall)
    double p = 0.0;
    if (r <= m.recall.back()) {
      // recall is non-decreasing; find first point with recall >= r
      const auto it = std::lower_bound(m.recall.begin(), m.recall.end(), r);
      const size_t hi = static_cast<size_t>(it - m.recall.begin());
      if (hi == 0) {
        p = m.precision.front();
      } else if (m.recall[hi] == m.recall[hi - 1]) {
        p = m.precision[hi];
      } else {
        const double t = (r - m.recall[hi - 1]) / (m.recall[hi] - m.recall[hi - 1]);
        p = m.precision[hi - 1] + t * (m.precision[hi] - m.precision[hi - 1]);
      }
    }
    acc += std::max(p - kMinPrecision, 0.0);
    ++used;
  }
  if (used == 0) return 0.0;
  return (acc / used) / (1.0 - kMinPrecision);
}

double yaw_error(double a, double b) {
  return std::abs(normalize_angle(a - b));
}

}  // namespace

MetricsReport score(const std::vector<SampleDetections>& detections,
                    const std::vector<SampleTruth>& truth,
                    const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw std::invalid_argument("score: need at least one threshold");

  // unify the sample key space: every truth sample plus any detection-only ones
  std::map<std::tuple<std::string, int, std::string>, size_t> sample_index;
  const auto key_of = [](const std::string& sc, int fi, const std::string& ego) {
    return std::make_tuple(sc, fi, ego);
  };
  for (const auto& t : truth) {
    const auto k = key_of(t.scene_id, t.frame_index, t.ego_id);
    if (sample_index.find(k) == sample_index.end())
      sample_index[k] = sample_index.size();
  }
  for (const auto& d : detections) {
    const auto k = key_of(d.scene_id, d.frame_index, d.ego_id);
    if (sample_index.find(k) == sample_index.end())
      sample_index[k] = sample_index.size();
  }

  const size_t n_samples = sample_index.size();
  bool any_truth = false, any_det = false;

  const std::vector<ObjectClass> classes{ObjectClass::Vehicle, ObjectClass::Pedestrian,
                                         ObjectClass::Cyclist};
  MetricsReport report;
  double ap_sum = 0.0;
  int ap_cells = 0;
  double ate_sum = 0, ase_sum = 0, aoe_sum = 0, ave_sum = 0;
  int tp_classes = 0;

  for (const ObjectClass cls : classes) {
    std::vector<std::vector<const Detection*>> dets_by_sample(n_samples);
    std::vector<std::vector<const ObjectBox*>> truth_by_sample(n_samples);
    for (const auto& d : detections) {
      const size_t s = sample_index.at(key_of(d.scene_id, d.frame_index, d.ego_id));
      for (const auto& det : d.detections) {
        any_det = true;
        if (det.box.cls == cls) dets_by_sample[s].push_back(&det);
      }
    }
    int class_truth = 0;
    for (const auto& t : truth) {
      const size_t s = sample_index.at(key_of(t.scene_id, t.frame_index, t.ego_id));
      for (const auto& b : t.boxes) {
        any_truth = true;
        if (b.cls == cls) {
          truth_by_sample[s].push_back(&b);
          ++class_truth;
        }
      }
    }
    if (class_truth == 0) continue;  // class absent from the ground truth

    const std::string cname = object_class_name(cls);
    MatchResult tp_match;
    bool have_tp_match = false;
    for (const double thr : thresholds) {
      const MatchResult m = match_class(dets_by_sample, truth_by_sample, thr);
      report.ap[cname][thr] = calc_ap(m);
      ap_sum += report.ap[cname][thr];
      ++ap_cells;
      if (thr == kTpErrorThresholdM) {
        tp_match = m;
        have_tp_match = true;
      }
    }
    if (!have_tp_match)
      tp_match = match_class(dets_by_sample, truth_by_sample, kTpErrorThresholdM);

    ++tp_classes;
    if (tp_match.matches.empty()) {
      ate_sum += 1.0;
      ase_sum += 1.0;
      aoe_sum += 1.0;
      ave_sum += 1.0;
    } else {
      double ate = 0, ase = 0, aoe = 0, ave = 0;
      for (const auto& [det, gt] : tp_match.matches) {
        ate += std::hypot(det->box.center.x - gt->center.x, det->box.center.y - gt->center.y);
        ase += scale_error(det->box.size, gt->size);
        aoe += yaw_error(det->box.center.yaw, gt->center.yaw);
        ave += std::hypot(det->box.velocity[0] - gt->velocity[0],
                          det->box.velocity[1] - gt->velocity[1]);
      }
      const double n = static_cast<double>(tp_match.matches.size());
      ate_sum += ate / n;
      ase_sum += ase / n;
      aoe_sum += aoe / n;
      ave_sum += ave / n;
    }
  }

  if (!any_truth && !any_det) {
    report.empty = true;
    return report;
  }

  report.mean_ap = ap_cells > 0 ? ap_sum / ap_cells : 0.0;
  if (tp_classes > 0) {
    report.mate = ate_sum / tp_classes;
    report.mase = ase_sum / tp_classes;
    report.maoe = aoe_sum / tp_classes;
    report.mave = ave_sum / tp_classes;
  }
  report.maae = 1.0;

  const auto tp_term = [](double v) { return 1.0 - std::min(1.0, v); };
  report.nds = (5.0 * report.mean_ap + tp_term(report.mate) + tp_term(report.mase) +
                tp_term(report.maoe) + tp_term(report.mave) + tp_term(report.maae)) /
               10.0;
  return report;
}

std::string MetricsReport::to_json_string() const {
  json j{{"empty", empty},   {"mAP", mean_ap}, {"mATE", mate}, {"mASE", mase},
         {"mAOE", maoe},     {"mAVE", mave},   {"mAAE", maae}, {"NDS", nds}};
  j["ap"] = json::object();
  for (const auto& [cls, by_thr] : ap) {
    json jt = json::object();
    for (const auto& [thr, v] : by_thr) {
      std::ostringstream key;
      key << thr;
      jt[key.str()] = v;
    }
    j["ap"][cls] = jt;
  }
  return j.dump(2);
}

std::string MetricsReport::csv_header() {
  return "label,mAP,mATE,mASE,mAOE,mAVE,mAAE,NDS,empty";
}

std::string MetricsReport::to_csv_row(const std::string& label) const {
  std::ostringstream os;
  os << label << ',' << mean_ap << ',' << mate << ',' << mase << ',' << maoe << ',' << mave
     << ',' << maae << ',' << nds << ',' << (empty ? 1 : 0);
  return os.str();
}

}  // namespace coopsim
