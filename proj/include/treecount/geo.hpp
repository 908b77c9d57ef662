#pragma once

#include <vector>

#include "treecount/errors.hpp"
#include "treecount/types.hpp"

namespace treecount::geo {

// Mean Earth radius in meters.
inline constexpr double kEarthRadiusM = 6'371'000.0;

// Meters spanned by one degree of latitude on the mean-radius sphere.
double meters_per_deg_lat();

// Great-circle distance between two points, in meters.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

// Local planar frame: an equirectangular projection anchored at `origin`.
// x grows east, y grows north, both in meters. Valid for points within
// 50 km of the origin; beyond that the flat-earth error is no longer
// negligible and to_local throws OutOfProjectionRange.
class LocalFrame {
public:
  explicit LocalFrame(const GeoPoint& origin);

  const GeoPoint& origin() const { return origin_; }

  struct XY {
    double x = 0.0;
    double y = 0.0;
  };

  XY to_local(const GeoPoint& p) const;
  GeoPoint from_local(const XY& xy) const;

private:
  GeoPoint origin_;
  double m_per_deg_lat_;
  double m_per_deg_lon_;
};

// Time-ordered GPS track. Points are strictly increasing in t.
class TrackLog {
public:
  explicit TrackLog(std::vector<TrackPoint> points);

  const std::vector<TrackPoint>& points() const { return points_; }
  double start_time() const { return points_.front().t; }
  double end_time() const { return points_.back().t; }

  // Total polyline length in meters (sum of great-circle leg lengths).
  double length_m() const;

private:
  std::vector<TrackPoint> points_;
};

// Position at time t by linear interpolation of lat/lon between the two
// bracketing fixes. Times outside the track clamp to the nearest endpoint.
GeoPoint interpolate(const TrackLog& track, double t);

// One piece of a track split at fixed arc-length intervals.
struct RouteSegment {
  std::vector<TrackPoint> polyline;
  double length_m = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
};

// Cut the track into consecutive pieces of arc length `segment_length_m`
// (the last piece keeps the remainder). Boundary vertices are synthesized
// by interpolating along the leg where the cut falls and shared between
// neighbouring segments. Throws DegenerateTrack if the whole track is
// shorter than one meter.
std::vector<RouteSegment> segment_route(const TrackLog& track, double segment_length_m);

}  // namespace treecount::geo
