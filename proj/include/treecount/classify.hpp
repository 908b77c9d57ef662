#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treecount/counting.hpp"
#include "treecount/geo.hpp"

namespace treecount::classify {

// Five-bin density index over trees per kilometer.
enum class DensityCategory { VeryLow, Low, Moderate, Good, VeryGood };

// Human-readable label, e.g. "Very Low".
const char* label(DensityCategory c);
// Map color bound to the category (lowercase hex, "#rrggbb").
const char* color(DensityCategory c);
// Ordering rank, 0 (VeryLow) .. 4 (VeryGood).
int rank(DensityCategory c);

// Trees per kilometer.
double per_km_rate(std::int64_t count, double length_m);

// Half-open bins: [0,20) VeryLow, [20,30) Low, [30,40) Moderate,
// [40,50) Good, [50,inf) VeryGood.
DensityCategory categorize(double per_km);

struct ClassifiedSegment {
  geo::RouteSegment segment;
  std::int64_t count = 0;
  double per_km = 0.0;
  DensityCategory category = DensityCategory::VeryLow;
};

// Assign each event to the first segment whose [t_start, t_end] contains its
// timestamp (shared boundaries go to the earlier segment), then classify
// every segment by its per-km rate. Throws UnassignedEvent when an event
// falls outside all segments.
std::vector<ClassifiedSegment> classify_segments(
    const std::vector<counting::TreeEvent>& events,
    const std::vector<geo::RouteSegment>& segments);

// GeoJSON FeatureCollection: one LineString per segment with properties
// count, per_km, category, color. Coordinates are [lon, lat].
std::string to_category_geojson(const std::vector<ClassifiedSegment>& classified);

// Plain-text table, one row per segment: index, length, count, rate, category.
std::string to_table(const std::vector<ClassifiedSegment>& classified);

}  // namespace treecount::classify
