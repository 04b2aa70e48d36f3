// coopsim command-line harness: gen, run, bench-scaling, score.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "coopsim/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
  const auto config = coopsim::load_experiment_config(config_path);
  const auto summary = coopsim::run_generate(config, out_dir);
  std::cout << "scenes=" << summary.scenes << " frames=" << summary.frames
            << " samples=" << summary.samples << " boxes=" << summary.boxes << "\n";
  return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& dataset_dir,
            const std::string& out_dir, int workers) {
  const auto config = coopsim::load_experiment_config(config_path);
  const auto results = coopsim::run_experiment(config, dataset_dir, out_dir, workers);
  std::ifstream md(out_dir + "/results.md");
  std::cout << md.rdbuf();
  std::cout << "cells=" << results.cells.size() << " written to " << out_dir << "\n";
  return kExitOk;
}

int cmd_bench_scaling(const std::vector<int>& counts, uint64_t seed, const std::string& out_path,
                      int workers) {
  const auto report = coopsim::bench_scaling(counts, seed, workers);
  const std::string csv = report.to_csv();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("bench-scaling: cannot open " + out_path);
    out << csv;
  }
  std::cout << csv;
  return kExitOk;
}

int cmd_score(const std::string& dataset_dir, const std::string& detections_path,
              double range_m, const std::string& out_path) {
  const auto dets = coopsim::load_detections(detections_path);
  const auto truth = coopsim::dataset_truth(dataset_dir, range_m);
  const auto report = coopsim::score(dets, truth);
  const std::string text = report.to_json_string();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("score: cannot open " + out_path);
    out << text << '\n';
  }
  std::cout << text << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative-perception scheduling simulator and benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", dataset_dir = "dataset", detections_path;
  uint64_t seed = 1;
  int workers = 1;
  double range_m = 50.0;
  std::vector<int> counts{2, 4, 8, 16, 32};

  auto* gen = app.add_subcommand("gen", "generate, filter and export scenes");
  gen->add_option("--config", config_path, "experiment config JSON")->required();
  gen->add_option("--out", out_dir, "dataset output directory");

  auto* run = app.add_subcommand("run", "replay the dataset under every policy x range");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--dataset", dataset_dir, "dataset root directory");
  run->add_option("--out", out_dir, "results output directory");
  run->add_option("--workers", workers, "concurrent scene replays");

  auto* bench = app.add_subcommand("bench-scaling", "per-tick cost vs agent count");
  bench->add_option("--counts", counts, "ascending agent counts");
  bench->add_option("--seed", seed, "base seed");
  bench->add_option("--out", out_dir, "CSV output path");
  bench->add_option("--workers", workers, "sensing workers");

  auto* scorecmd = app.add_subcommand("score", "score a detections dump against the dataset");
  scorecmd->add_option("--dataset", dataset_dir, "dataset root directory");
  scorecmd->add_option("--detections", detections_path, "detections JSON dump")->required();
  scorecmd->add_option("--range", range_m, "detection range in meters");
  scorecmd->add_option("--out", out_dir, "report output path (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_dir);
    if (run->parsed()) return cmd_run(config_path, dataset_dir, out_dir, workers);
    if (bench->parsed())
      return cmd_bench_scaling(counts, seed, out_dir == "out" ? "" : out_dir, workers);
    if (scorecmd->parsed())
      return cmd_score(dataset_dir, detections_path, range_m, out_dir == "out" ? "" : out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    const std::string what = e.what();
    return what.rfind("config error", 0) == 0 ? kExitConfigError : kExitRuntimeError;
  }
  return kExitConfigError;
}
