#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "treecount/counting.hpp"
#include "treecount/geo.hpp"
#include "treecount/types.hpp"

namespace treecount::sim {

// One trunk on the tree line, at a fixed distance from the camera path.
struct TreeSpec {
  double position_m = 0.0;  // along-road position
  double trunk_width_m = 1.0;
  double trunk_height_m = 4.0;
};

struct NoiseSpec {
  double center_jitter_px = 0.0;   // uniform per-frame center jitter
  double dropout_prob = 0.0;       // chance a visible box is dropped
  double false_positive_rate = 0.0;  // expected spurious boxes per frame
  std::uint64_t seed = 0;
};

// A straight street: camera translating at constant speed past a line of
// trees at constant lateral depth, pinhole projection onto the image plane.
struct SceneSpec {
  std::vector<TreeSpec> trees;
  double camera_speed_mps = 10.0;
  double lateral_depth_m = 5.0;
  double focal_px = 1000.0;
  ImageGeometry geometry;
  double duration_s = 10.0;
  NoiseSpec noise;
};

// First frame at which a tree's (noiseless) projected center sits inside the
// counting band — found by exhaustive per-frame scan.
struct CrossingEvent {
  std::size_t tree = 0;
  std::int64_t frame = 0;
  double position_m = 0.0;
};

struct GroundTruth {
  std::vector<CrossingEvent> crossings;
  // Spurious generated boxes whose center fell inside the counting band
  // (each can add at most one count).
  std::int64_t false_positives_in_band = 0;

  std::int64_t count() const { return static_cast<std::int64_t>(crossings.size()); }
};

struct SceneOutput {
  DetectionStream stream;
  geo::TrackLog track;
  GroundTruth truth;
};

// Throws InvalidScene when dimensions are non-positive or tree positions
// fall outside the camera's reachable range (plus a 100 m margin).
void validate(const SceneSpec& scene);

std::int64_t frame_count(const SceneSpec& scene);

// Noiseless pinhole projection of one trunk at one frame; empty when the box
// lies fully outside the image.
std::optional<Box> project_tree(const SceneSpec& scene, const TreeSpec& tree,
                                std::int64_t frame_index);

// Produce the detection stream (noise applied after ground truth), the
// matching constant-speed GPS track, and the exhaustive-scan ground truth
// for the band described by `band`.
SceneOutput generate(const SceneSpec& scene, const counting::CountingConfig& band);

// True when the scene is inside the regime where the counting algorithm is
// guaranteed to equal ground truth on noiseless input: per-frame center
// displacement fits in the band, every tree's in-band dwell fits inside the
// suppression window, a tree's in-band boxes all match its first one by IoU,
// and no two trees' in-band boxes match each other inside the window.
bool validity_check(const SceneSpec& scene, const counting::CountingConfig& config);

// Scene config file (JSON): documented key/value schema mirroring SceneSpec.
SceneSpec read_scene(std::istream& in);
SceneSpec load_scene(const std::string& path);

std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const std::string& text);

// GPX 1.1 text for a track (used for the synthetic track file).
std::string to_gpx(const geo::TrackLog& track);

}  // namespace treecount::sim
