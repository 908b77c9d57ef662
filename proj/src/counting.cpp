#include "treecount/counting.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "treecount/errors.hpp"

namespace treecount::counting {

using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

bool in_counting_range(const Box& box, const ImageGeometry& geometry,
                       const CountingConfig& config) {
  const double lo =
      geometry.width * (config.band_center_fraction - config.band_width_fraction / 2.0);
  const double hi =
      geometry.width * (config.band_center_fraction + config.band_width_fraction / 2.0);
  const double cx = box.center_x();
  return cx >= lo && cx <= hi;
}

double frame_time(std::int64_t frame_index, const ImageGeometry& geometry,
                  double gps_offset_s, double track_start_s) {
  return track_start_s + static_cast<double>(frame_index) / geometry.fps + gps_offset_s;
}

TreeCounter::TreeCounter(const ImageGeometry& geometry, const CountingConfig& config)
    : geometry_(geometry), config_(config) {}

std::vector<std::size_t> TreeCounter::step(std::int64_t frame_index,
                                           const std::vector<Box>& boxes) {
  if (frame_index <= last_frame_) {
    throw NonMonotoneFrame(frame_index);
  }
  const std::int64_t elapsed = frame_index - last_frame_;
  last_frame_ = frame_index;

  // Age the registry once per elapsed frame index and drop expired entries.
  const int dec = static_cast<int>(
      std::min<std::int64_t>(elapsed, config_.next_frames_to_consider + 1));
  for (auto& e : registry_) e.frames_remaining -= dec;
  registry_.erase(std::remove_if(registry_.begin(), registry_.end(),
                                 [](const Entry& e) { return e.frames_remaining <= 0; }),
                  registry_.end());

  std::vector<std::size_t> counted;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box& bb = boxes[i];
    if (!in_counting_range(bb, geometry_, config_)) continue;
    bool suppressed = false;
    for (const Entry& e : registry_) {
      if (iou(bb, e.box) >= config_.iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (suppressed) continue;
    ++total_;
    registry_.push_back(Entry{bb, config_.next_frames_to_consider});
    counted.push_back(i);
  }
  return counted;
}

CountResult run(const DetectionStream& stream, const geo::TrackLog& track,
                const CountingConfig& config, double gps_offset_s) {
  TreeCounter counter(stream.geometry, config);
  CountResult result;
  const double t0 = track.start_time();
  for (const auto& fd : stream.frames) {
    std::vector<Box> kept;
    kept.reserve(fd.boxes.size());
    for (const auto& b : fd.boxes) {
      if (b.confidence >= config.min_confidence) kept.push_back(b);
    }
    const auto counted = counter.step(fd.frame, kept);
    if (!counted.empty()) {
      const double t = frame_time(fd.frame, stream.geometry, gps_offset_s, t0);
      const GeoPoint pos = geo::interpolate(track, t);
      for (const std::size_t idx : counted) {
        result.events.push_back(TreeEvent{fd.frame, kept[idx], pos, t});
      }
    }
    result.per_frame_cumulative.emplace_back(fd.frame, counter.total());
  }
  result.total = counter.total();
  return result;
}

void write_report(const CountResult& result, std::ostream& out) {
  ordered_json j;
  j["total"] = result.total;
  j["events"] = ordered_json::array();
  for (const auto& ev : result.events) {
    ordered_json je;
    je["frame"] = ev.frame;
    je["lat"] = ev.position.lat;
    je["lon"] = ev.position.lon;
    je["box"] = {ev.box.x, ev.box.y, ev.box.w, ev.box.h};
    j["events"].push_back(std::move(je));
  }
  j["cumulative"] = ordered_json::array();
  for (const auto& [frame, count] : result.per_frame_cumulative) {
    j["cumulative"].push_back({frame, count});
  }
  out << j.dump(2) << '\n';
}

void save_report(const CountResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open output file: " + path);
  }
  write_report(result, out);
  if (!out) {
    throw Error("failed while writing: " + path);
  }
}

CountResult read_report(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw MalformedRecord(1, std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("total") || !j.contains("events") ||
      !j.contains("cumulative")) {
    throw MalformedRecord(1, "report must carry total, events, and cumulative");
  }
  CountResult result;
  result.total = j["total"].get<std::int64_t>();
  for (const auto& je : j["events"]) {
    TreeEvent ev;
    ev.frame = je.at("frame").get<std::int64_t>();
    ev.position.lat = je.at("lat").get<double>();
    ev.position.lon = je.at("lon").get<double>();
    const auto& jb = je.at("box");
    if (!jb.is_array() || jb.size() != 4) {
      throw MalformedRecord(1, "event box must be [x,y,w,h]");
    }
    ev.box = Box{jb[0].get<double>(), jb[1].get<double>(), jb[2].get<double>(),
                 jb[3].get<double>(), 1.0};
    result.events.push_back(ev);
  }
  for (const auto& jc : j["cumulative"]) {
    if (!jc.is_array() || jc.size() != 2) {
      throw MalformedRecord(1, "cumulative rows must be [frame,count]");
    }
    result.per_frame_cumulative.emplace_back(jc[0].get<std::int64_t>(),
                                             jc[1].get<std::int64_t>());
  }
  if (result.total != static_cast<std::int64_t>(result.events.size())) {
    throw MalformedRecord(1, "report total does not match its event list");
  }
  return result;
}

CountResult load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open report: " + path);
  }
  return read_report(in);
}

void recompute_event_times(CountResult& result, double fps, double gps_offset_s,
                           double track_start_s) {
  if (!(fps > 0.0)) {
    throw Error("fps must be positive to recompute event times");
  }
  ImageGeometry geom;
  geom.fps = fps;
  for (auto& ev : result.events) {
    ev.t = frame_time(ev.frame, geom, gps_offset_s, track_start_s);
  }
}

}  // namespace treecount::counting
