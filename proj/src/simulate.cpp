#include "treecount/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "treecount/errors.hpp"

namespace treecount::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Synthetic track anchor: an arbitrary street-scale location and epoch.
constexpr double kTrackLat = 17.4;
constexpr double kTrackLon = 78.5;
constexpr double kTrackEpoch = 1609459200.0;  // 2021-01-01T00:00:00Z

bool visible(const Box& b, const ImageGeometry& geom) {
  return b.x < geom.width && b.x + b.w > 0.0 && b.y < geom.height && b.y + b.h > 0.0;
}

// Band bounds written out directly so the ground-truth scan does not lean on
// the counting module it is meant to check.
struct BandPx {
  double lo;
  double hi;
};

BandPx band_px(const ImageGeometry& geom, const counting::CountingConfig& band) {
  return {geom.width * (band.band_center_fraction - band.band_width_fraction / 2.0),
          geom.width * (band.band_center_fraction + band.band_width_fraction / 2.0)};
}

double center_x_at(const SceneSpec& scene, const TreeSpec& tree, std::int64_t frame) {
  const double s =
      scene.camera_speed_mps * static_cast<double>(frame) / scene.geometry.fps;
  return scene.geometry.width / 2.0 +
         scene.focal_px * (tree.position_m - s) / scene.lateral_depth_m;
}

geo::TrackLog build_track(const SceneSpec& scene) {
  const double mpd_lat = geo::meters_per_deg_lat();
  const double mpd_lon = mpd_lat * std::cos(kTrackLat * kPi / 180.0);
  const auto last = static_cast<std::int64_t>(std::max(1.0, std::ceil(scene.duration_s)));
  std::vector<TrackPoint> points;
  points.reserve(static_cast<std::size_t>(last) + 1);
  for (std::int64_t k = 0; k <= last; ++k) {
    TrackPoint p;
    p.lat = kTrackLat;
    p.lon = kTrackLon + scene.camera_speed_mps * static_cast<double>(k) / mpd_lon;
    p.t = kTrackEpoch + static_cast<double>(k);
    points.push_back(p);
  }
  return geo::TrackLog(std::move(points));
}

std::string format_time(double t) {
  auto secs = static_cast<std::int64_t>(std::floor(t));
  auto ms = static_cast<std::int64_t>(std::llround((t - static_cast<double>(secs)) * 1000.0));
  if (ms >= 1000) {
    secs += 1;
    ms -= 1000;
  }
  const auto tt = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[48];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  std::string out = buf;
  if (ms > 0) {
    char frac[8];
    std::snprintf(frac, sizeof(frac), ".%03d", static_cast<int>(ms % 1000));
    out += frac;
  }
  out += 'Z';
  return out;
}

}  // namespace

void validate(const SceneSpec& scene) {
  if (!(scene.camera_speed_mps > 0.0)) throw InvalidScene("camera speed must be positive");
  if (!(scene.lateral_depth_m > 0.0)) throw InvalidScene("lateral depth must be positive");
  if (!(scene.focal_px > 0.0)) throw InvalidScene("focal length must be positive");
  if (!(scene.duration_s > 0.0)) throw InvalidScene("duration must be positive");
  if (scene.geometry.width <= 0 || scene.geometry.height <= 0 ||
      !(scene.geometry.fps > 0.0)) {
    throw InvalidScene("image geometry must be positive");
  }
  const double reach = scene.camera_speed_mps * scene.duration_s + 100.0;
  for (std::size_t i = 0; i < scene.trees.size(); ++i) {
    const auto& t = scene.trees[i];
    if (!(t.trunk_width_m > 0.0) || !(t.trunk_height_m > 0.0)) {
      throw InvalidScene("tree " + std::to_string(i) + " has non-positive trunk size");
    }
    if (t.position_m < 0.0 || t.position_m > reach) {
      throw InvalidScene("tree " + std::to_string(i) + " position " +
                         std::to_string(t.position_m) + " outside [0, " +
                         std::to_string(reach) + "]");
    }
  }
  if (scene.noise.center_jitter_px < 0.0 || scene.noise.dropout_prob < 0.0 ||
      scene.noise.dropout_prob >= 1.0 || scene.noise.false_positive_rate < 0.0) {
    throw InvalidScene("noise parameters out of range");
  }
}

std::int64_t frame_count(const SceneSpec& scene) {
  return static_cast<std::int64_t>(scene.duration_s * scene.geometry.fps);
}

std::optional<Box> project_tree(const SceneSpec& scene, const TreeSpec& tree,
                                std::int64_t frame_index) {
  const double cx = center_x_at(scene, tree, frame_index);
  const double bw = scene.focal_px * tree.trunk_width_m / scene.lateral_depth_m;
  const double bh = scene.focal_px * tree.trunk_height_m / scene.lateral_depth_m;
  const double cy = scene.geometry.height / 2.0;
  Box b{cx - bw / 2.0, cy - bh / 2.0, bw, bh, 1.0};
  if (!visible(b, scene.geometry)) return std::nullopt;
  return b;
}

SceneOutput generate(const SceneSpec& scene, const counting::CountingConfig& band) {
  validate(scene);
  const std::int64_t frames = frame_count(scene);
  const BandPx bp = band_px(scene.geometry, band);

  // Ground truth first, on the noiseless geometry: per tree, the first frame
  // whose projected center sits inside the band.
  GroundTruth truth;
  for (std::size_t i = 0; i < scene.trees.size(); ++i) {
    for (std::int64_t f = 0; f < frames; ++f) {
      const double cx = center_x_at(scene, scene.trees[i], f);
      if (cx >= bp.lo && cx <= bp.hi) {
        truth.crossings.push_back(CrossingEvent{i, f, scene.trees[i].position_m});
        break;
      }
    }
  }

  std::mt19937_64 rng(scene.noise.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  DetectionStream stream;
  stream.geometry = scene.geometry;
  stream.frames.reserve(static_cast<std::size_t>(frames));
  for (std::int64_t f = 0; f < frames; ++f) {
    FrameDetections fd;
    fd.frame = f;
    for (const auto& tree : scene.trees) {
      auto box = project_tree(scene, tree, f);
      if (!box) continue;
      if (scene.noise.center_jitter_px > 0.0) {
        const double jx = (unit(rng) * 2.0 - 1.0) * scene.noise.center_jitter_px;
        const double jy = (unit(rng) * 2.0 - 1.0) * scene.noise.center_jitter_px;
        box->x += jx;
        box->y += jy;
        if (!visible(*box, scene.geometry)) continue;
      }
      if (scene.noise.dropout_prob > 0.0 && unit(rng) < scene.noise.dropout_prob) {
        continue;
      }
      box->confidence = 0.95;
      fd.boxes.push_back(*box);
    }
    if (scene.noise.false_positive_rate > 0.0) {
      const double rate = scene.noise.false_positive_rate;
      auto k = static_cast<std::int64_t>(std::floor(rate));
      if (unit(rng) < rate - std::floor(rate)) ++k;
      for (std::int64_t j = 0; j < k; ++j) {
        // Spurious boxes are drawn fully inside the image so they survive
        // ingest clamping unchanged.
        const double w = 30.0 + unit(rng) * 90.0;
        const double h = 100.0 + unit(rng) * 300.0;
        const double cx = w / 2.0 + unit(rng) * (scene.geometry.width - w);
        const double cy = h / 2.0 + unit(rng) * (scene.geometry.height - h);
        const double conf = 0.3 + unit(rng) * 0.6;
        fd.boxes.push_back(Box{cx - w / 2.0, cy - h / 2.0, w, h, conf});
        if (cx >= bp.lo && cx <= bp.hi) ++truth.false_positives_in_band;
      }
    }
    stream.frames.push_back(std::move(fd));
  }

  return SceneOutput{std::move(stream), build_track(scene), std::move(truth)};
}

bool validity_check(const SceneSpec& scene, const counting::CountingConfig& config) {
  const BandPx bp = band_px(scene.geometry, config);
  const double band_width_px = scene.geometry.width * config.band_width_fraction;
  const double step_px = scene.focal_px *
                         (scene.camera_speed_mps / scene.geometry.fps) /
                         scene.lateral_depth_m;
  if (step_px > band_width_px) return false;

  const std::int64_t frames = frame_count(scene);
  struct InBand {
    std::vector<std::pair<std::int64_t, Box>> boxes;  // (frame, noiseless box)
  };
  std::vector<InBand> per_tree(scene.trees.size());
  for (std::size_t i = 0; i < scene.trees.size(); ++i) {
    for (std::int64_t f = 0; f < frames; ++f) {
      const double cx = center_x_at(scene, scene.trees[i], f);
      if (cx < bp.lo || cx > bp.hi) continue;
      const auto box = project_tree(scene, scene.trees[i], f);
      if (!box) return false;  // in-band center must be visible
      per_tree[i].boxes.emplace_back(f, *box);
    }
  }

  for (const auto& tb : per_tree) {
    if (tb.boxes.empty()) continue;
    // Dwell must fit inside the suppression window, else the tree would be
    // counted again after its registry entry expires.
    const std::int64_t span = tb.boxes.back().first - tb.boxes.front().first + 1;
    if (span > config.next_frames_to_consider) return false;
    // Every in-band box must still match the first one (the registry keeps
    // the box from the counting frame, not the latest).
    for (const auto& [f, b] : tb.boxes) {
      if (counting::iou(tb.boxes.front().second, b) < config.iou_threshold) {
        return false;
      }
    }
  }

  // No cross-tree matches while both can be registry-live.
  for (std::size_t i = 0; i < per_tree.size(); ++i) {
    for (std::size_t j = i + 1; j < per_tree.size(); ++j) {
      for (const auto& [fi, bi] : per_tree[i].boxes) {
        for (const auto& [fj, bj] : per_tree[j].boxes) {
          if (std::llabs(fi - fj) >= config.next_frames_to_consider) continue;
          if (counting::iou(bi, bj) >= config.iou_threshold) return false;
        }
      }
    }
  }
  return true;
}

SceneSpec read_scene(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScene(std::string("scene config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidScene("scene config must be a JSON object");

  SceneSpec scene;
  scene.camera_speed_mps = j.value("camera_speed_mps", scene.camera_speed_mps);
  scene.lateral_depth_m = j.value("lateral_depth_m", scene.lateral_depth_m);
  scene.focal_px = j.value("focal_px", scene.focal_px);
  scene.duration_s = j.value("duration_s", scene.duration_s);
  if (j.contains("geometry")) {
    const auto& jg = j["geometry"];
    scene.geometry.width = jg.value("width", scene.geometry.width);
    scene.geometry.height = jg.value("height", scene.geometry.height);
    scene.geometry.fps = jg.value("fps", scene.geometry.fps);
  }
  if (j.contains("trees")) {
    if (!j["trees"].is_array()) throw InvalidScene("'trees' must be an array");
    for (const auto& jt : j["trees"]) {
      if (!jt.is_array() || jt.size() != 3) {
        throw InvalidScene("each tree must be [position_m, trunk_width_m, trunk_height_m]");
      }
      scene.trees.push_back(TreeSpec{jt[0].get<double>(), jt[1].get<double>(),
                                     jt[2].get<double>()});
    }
  }
  if (j.contains("noise")) {
    const auto& jn = j["noise"];
    scene.noise.center_jitter_px = jn.value("center_jitter_px", 0.0);
    scene.noise.dropout_prob = jn.value("dropout_prob", 0.0);
    scene.noise.false_positive_rate = jn.value("false_positive_rate", 0.0);
    scene.noise.seed = jn.value("seed", std::uint64_t{0});
  }
  validate(scene);
  return scene;
}

SceneSpec load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open scene config: " + path);
  }
  return read_scene(in);
}

std::string truth_to_json(const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["count"] = truth.count();
  j["crossings"] = nlohmann::ordered_json::array();
  for (const auto& c : truth.crossings) {
    nlohmann::ordered_json jc;
    jc["tree"] = c.tree;
    jc["frame"] = c.frame;
    jc["position_m"] = c.position_m;
    j["crossings"].push_back(std::move(jc));
  }
  j["false_positives_in_band"] = truth.false_positives_in_band;
  return j.dump(2) + "\n";
}

GroundTruth truth_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord(1, std::string("ground truth is not valid JSON: ") + e.what());
  }
  GroundTruth truth;
  for (const auto& jc : j.at("crossings")) {
    truth.crossings.push_back(CrossingEvent{jc.at("tree").get<std::size_t>(),
                                            jc.at("frame").get<std::int64_t>(),
                                            jc.at("position_m").get<double>()});
  }
  truth.false_positives_in_band = j.value("false_positives_in_band", std::int64_t{0});
  if (j.contains("count") &&
      j["count"].get<std::int64_t>() != truth.count()) {
    throw MalformedRecord(1, "ground truth count does not match its crossing list");
  }
  return truth;
}

std::string to_gpx(const geo::TrackLog& track) {
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<gpx version=\"1.1\" creator=\"treecount\" "
         "xmlns=\"http://www.topografix.com/GPX/1/1\">\n";
  out += "  <trk>\n    <trkseg>\n";
  for (const auto& p : track.points()) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "      <trkpt lat=\"%.17g\" lon=\"%.17g\">", p.lat,
                  p.lon);
    out += buf;
    out += "<time>" + format_time(p.t) + "</time></trkpt>\n";
  }
  out += "    </trkseg>\n  </trk>\n</gpx>\n";
  return out;
}

}  // namespace treecount::sim
