#pragma once

#include <cstdint>
#include <vector>

namespace treecount {

// Pixel geometry of the video the detections were produced from.
struct ImageGeometry {
  int width = 1920;
  int height = 1080;
  double fps = 30.0;
};

// Axis-aligned detection box in pixel coordinates (x,y = top-left corner).
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double confidence = 1.0;

  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
};

// All detections reported for one video frame.
struct FrameDetections {
  std::int64_t frame = 0;
  std::vector<Box> boxes;
};

struct DetectionStream {
  ImageGeometry geometry;
  std::vector<FrameDetections> frames;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

// One GPS fix: position plus time in seconds relative to an epoch.
struct TrackPoint {
  double lat = 0.0;
  double lon = 0.0;
  double t = 0.0;
};

}  // namespace treecount
