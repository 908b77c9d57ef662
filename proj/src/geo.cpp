#include "treecount/geo.hpp"

#include <algorithm>
#include <cmath>

namespace treecount::geo {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kProjectionLimitM = 50'000.0;
// Cut points landing within this distance of an existing vertex snap to it
// instead of inserting a near-duplicate.
constexpr double kSnapM = 1e-6;
}  // namespace

double meters_per_deg_lat() { return kEarthRadiusM * kDegToRad; }

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::min(1.0, h)));
}

LocalFrame::LocalFrame(const GeoPoint& origin)
    : origin_(origin),
      m_per_deg_lat_(meters_per_deg_lat()),
      m_per_deg_lon_(meters_per_deg_lat() * std::cos(origin.lat * kDegToRad)) {}

LocalFrame::XY LocalFrame::to_local(const GeoPoint& p) const {
  XY xy;
  xy.x = (p.lon - origin_.lon) * m_per_deg_lon_;
  xy.y = (p.lat - origin_.lat) * m_per_deg_lat_;
  if (std::hypot(xy.x, xy.y) > kProjectionLimitM) {
    throw OutOfProjectionRange("point is more than 50 km from the projection origin");
  }
  return xy;
}

GeoPoint LocalFrame::from_local(const XY& xy) const {
  GeoPoint p;
  p.lat = origin_.lat + xy.y / m_per_deg_lat_;
  p.lon = origin_.lon + xy.x / m_per_deg_lon_;
  return p;
}

TrackLog::TrackLog(std::vector<TrackPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw DegenerateTrack("a track needs at least two points");
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].t > points_[i - 1].t)) {
      throw NonMonotoneTime(points_[i].t);
    }
  }
}

double TrackLog::length_m() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    total += haversine_m({points_[i - 1].lat, points_[i - 1].lon},
                         {points_[i].lat, points_[i].lon});
  }
  return total;
}

GeoPoint interpolate(const TrackLog& track, double t) {
  const auto& pts = track.points();
  if (t <= pts.front().t) return {pts.front().lat, pts.front().lon};
  if (t >= pts.back().t) return {pts.back().lat, pts.back().lon};
  // First point with time >= t; pts is strictly increasing in t.
  auto it = std::lower_bound(pts.begin(), pts.end(), t,
                             [](const TrackPoint& p, double v) { return p.t < v; });
  if (it->t == t) return {it->lat, it->lon};
  const TrackPoint& b = *it;
  const TrackPoint& a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  return {a.lat + f * (b.lat - a.lat), a.lon + f * (b.lon - a.lon)};
}

namespace {

TrackPoint lerp_point(const TrackPoint& a, const TrackPoint& b, double f) {
  return {a.lat + f * (b.lat - a.lat), a.lon + f * (b.lon - a.lon),
          a.t + f * (b.t - a.t)};
}

}  // namespace

std::vector<RouteSegment> segment_route(const TrackLog& track, double segment_length_m) {
  if (!(segment_length_m > 0.0)) {
    throw DegenerateSegment("segment length must be positive");
  }
  if (track.length_m() < 1.0) {
    throw DegenerateTrack("track is shorter than one meter");
  }

  const auto& pts = track.points();
  std::vector<RouteSegment> segments;
  std::vector<TrackPoint> poly = {pts.front()};
  double poly_len = 0.0;

  auto close_segment = [&](const TrackPoint& boundary) {
    poly.push_back(boundary);
    RouteSegment seg;
    seg.polyline = poly;
    seg.length_m = poly_len;
    seg.t_start = poly.front().t;
    seg.t_end = poly.back().t;
    segments.push_back(std::move(seg));
    poly = {boundary};
    poly_len = 0.0;
  };

  for (std::size_t i = 1; i < pts.size(); ++i) {
    TrackPoint cursor = poly.back();
    double leg_remaining =
        haversine_m({cursor.lat, cursor.lon}, {pts[i].lat, pts[i].lon});
    // Cut as many full segments as fit inside this leg.
    while (poly_len + leg_remaining > segment_length_m + kSnapM) {
      const double need = segment_length_m - poly_len;
      const double f = need / leg_remaining;
      const TrackPoint cut = lerp_point(cursor, pts[i], f);
      poly_len += need;
      close_segment(cut);
      cursor = cut;
      leg_remaining -= need;
    }
    poly_len += leg_remaining;
    poly.push_back(pts[i]);
    if (segment_length_m - poly_len <= kSnapM) {
      // The vertex itself lands (within snap distance) on a boundary.
      RouteSegment seg;
      seg.polyline = poly;
      seg.length_m = poly_len;
      seg.t_start = poly.front().t;
      seg.t_end = poly.back().t;
      segments.push_back(std::move(seg));
      poly = {pts[i]};
      poly_len = 0.0;
    }
  }

  if (poly.size() >= 2) {
    RouteSegment seg;
    seg.polyline = poly;
    seg.length_m = poly_len;
    seg.t_start = poly.front().t;
    seg.t_end = poly.back().t;
    segments.push_back(std::move(seg));
  }
  return segments;
}

}  // namespace treecount::geo
