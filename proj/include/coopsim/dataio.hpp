#pragma once
// Dataset export/import: scenes -> frames -> samples -> annotations, plus
// per-frame visibility sets and agent graphs.
//
// Layout: root/manifest.json
//         root/<scene_id>/frames/<idx>.json
//         root/<scene_id>/samples/<idx>_<ego>.json
//         root/<scene_id>/graphs/<idx>.json

#include <string>
#include <vector>

#include "coopsim/engine.hpp"
#include "coopsim/sensing.hpp"
#include "coopsim/types.hpp"

namespace coopsim {

constexpr int kSchemaVersion = 1;
constexpr const char* kGeneratorVersion = "coopsim-1.0";

struct SceneManifestEntry {
  std::string id;
  int frames = 0;
  int samples = 0;
  ScenarioConfig config;
};

struct DatasetManifest {
  std::vector<SceneManifestEntry> scenes;

  int total_frames() const;
  int total_samples() const;
};

struct ImportedScene {
  Scene scene;
  std::vector<Sample> samples;                 // frame-major, ego-id order
  std::vector<FramePerception> perception;     // one per frame
};

// Writes one scene under root and updates the manifest. Byte-deterministic for
// identical inputs; a failed export removes the partially written scene dir.
SceneManifestEntry export_scene(const Scene& scene, const VisibilityModel& model,
                                const std::string& root_path,
                                const std::vector<FramePerception>* perception = nullptr);

DatasetManifest read_manifest(const std::string& root_path);

ImportedScene import_scene(const std::string& root_path, const std::string& scene_id);

}  // namespace coopsim
