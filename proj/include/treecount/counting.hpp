#pragma once

#include <cstdint>
#include <deque>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "treecount/geo.hpp"
#include "treecount/types.hpp"

namespace treecount::counting {

// Vertical counting band (full image height). A box participates in counting
// when its center x lies inside [width*(center - width_frac/2),
// width*(center + width_frac/2)] — closed on both ends.
struct CountingConfig {
  double band_center_fraction = 0.5;
  double band_width_fraction = 0.10;
  double iou_threshold = 0.5;
  int next_frames_to_consider = 7;
  // Boxes below this confidence are dropped before counting.
  double min_confidence = 0.25;
};

// Intersection-over-union of two boxes; 0 when they do not overlap.
double iou(const Box& a, const Box& b);

bool in_counting_range(const Box& box, const ImageGeometry& geometry,
                       const CountingConfig& config);

// Absolute time of a frame: track start + frame/fps + GPS clock offset.
double frame_time(std::int64_t frame_index, const ImageGeometry& geometry,
                  double gps_offset_s, double track_start_s);

// One counted tree.
struct TreeEvent {
  std::int64_t frame = 0;
  Box box;
  GeoPoint position;
  double t = 0.0;
};

struct CountResult {
  std::int64_t total = 0;
  std::vector<TreeEvent> events;
  // Cumulative count after each input frame, in input order.
  std::vector<std::pair<std::int64_t, std::int64_t>> per_frame_cumulative;
};

// Sequential counting state machine.
//
// A registry holds recently counted boxes, each with a countdown of frames
// it stays eligible for matching. Per frame: countdowns drop by the number
// of elapsed frame indices (gaps age entries too) and expired entries leave
// the registry; then each in-band box is compared against the registry in
// insertion order — the first entry with IoU >= threshold suppresses it,
// otherwise the box is counted and appended with a fresh countdown. Boxes
// counted earlier in the same frame are already visible to later ones.
class TreeCounter {
public:
  TreeCounter(const ImageGeometry& geometry, const CountingConfig& config);

  // Process one frame (boxes must already be confidence-filtered).
  // Returns indices into `boxes` of the newly counted boxes, in order.
  // Throws NonMonotoneFrame unless frame_index exceeds the previous one.
  std::vector<std::size_t> step(std::int64_t frame_index, const std::vector<Box>& boxes);

  std::int64_t total() const { return total_; }
  std::size_t active_entries() const { return registry_.size(); }
  std::int64_t last_frame_index() const { return last_frame_; }

private:
  struct Entry {
    Box box;
    int frames_remaining;
  };

  ImageGeometry geometry_;
  CountingConfig config_;
  std::deque<Entry> registry_;
  std::int64_t total_ = 0;
  std::int64_t last_frame_ = -1;
};

// Run the counter over a whole stream, geo-tagging each event by
// interpolating the track at the event frame's time.
CountResult run(const DetectionStream& stream, const geo::TrackLog& track,
                const CountingConfig& config = {}, double gps_offset_s = 0.0);

// Report file: {"total":N,"events":[{"frame":..,"lat":..,"lon":..,
// "box":[x,y,w,h]},...],"cumulative":[[frame,count],...]}
void write_report(const CountResult& result, std::ostream& out);
void save_report(const CountResult& result, const std::string& path);

// Loaded events carry frame/box/position; event times are not stored in the
// file — restore them with recompute_event_times before time-based use.
CountResult read_report(std::istream& in);
CountResult load_report(const std::string& path);

void recompute_event_times(CountResult& result, double fps, double gps_offset_s,
                           double track_start_s);

}  // namespace treecount::counting
