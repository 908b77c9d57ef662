#include "treecount/classify.hpp"

#include <sstream>

#include <json.hpp>

#include "treecount/errors.hpp"

namespace treecount::classify {

using ordered_json = nlohmann::ordered_json;

const char* label(DensityCategory c) {
  switch (c) {
    case DensityCategory::VeryLow: return "Very Low";
    case DensityCategory::Low: return "Low";
    case DensityCategory::Moderate: return "Moderate";
    case DensityCategory::Good: return "Good";
    case DensityCategory::VeryGood: return "Very Good";
  }
  return "Very Low";
}

const char* color(DensityCategory c) {
  switch (c) {
    case DensityCategory::VeryLow: return "#000000";
    case DensityCategory::Low: return "#ff0000";
    case DensityCategory::Moderate: return "#0000ff";
    case DensityCategory::Good: return "#008000";
    case DensityCategory::VeryGood: return "#006400";
  }
  return "#000000";
}

int rank(DensityCategory c) { return static_cast<int>(c); }

double per_km_rate(std::int64_t count, double length_m) {
  if (!(length_m > 0.0)) {
    throw DegenerateSegment("segment length must be positive");
  }
  return static_cast<double>(count) * 1000.0 / length_m;
}

DensityCategory categorize(double per_km) {
  if (per_km < 20.0) return DensityCategory::VeryLow;
  if (per_km < 30.0) return DensityCategory::Low;
  if (per_km < 40.0) return DensityCategory::Moderate;
  if (per_km < 50.0) return DensityCategory::Good;
  return DensityCategory::VeryGood;
}

std::vector<ClassifiedSegment> classify_segments(
    const std::vector<counting::TreeEvent>& events,
    const std::vector<geo::RouteSegment>& segments) {
  std::vector<ClassifiedSegment> out;
  out.reserve(segments.size());
  for (const auto& seg : segments) {
    ClassifiedSegment cs;
    cs.segment = seg;
    out.push_back(std::move(cs));
  }
  for (const auto& ev : events) {
    bool assigned = false;
    for (auto& cs : out) {
      if (ev.t >= cs.segment.t_start && ev.t <= cs.segment.t_end) {
        ++cs.count;
        assigned = true;
        break;
      }
    }
    if (!assigned) {
      std::ostringstream msg;
      msg << "event at frame " << ev.frame << " (t=" << ev.t
          << ") lies outside every segment";
      throw UnassignedEvent(msg.str());
    }
  }
  for (auto& cs : out) {
    cs.per_km = per_km_rate(cs.count, cs.segment.length_m);
    cs.category = categorize(cs.per_km);
  }
  return out;
}

std::string to_category_geojson(const std::vector<ClassifiedSegment>& classified) {
  ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = ordered_json::array();
  for (const auto& cs : classified) {
    ordered_json feat;
    feat["type"] = "Feature";
    feat["geometry"]["type"] = "LineString";
    auto& coords = feat["geometry"]["coordinates"] = ordered_json::array();
    for (const auto& p : cs.segment.polyline) {
      coords.push_back({p.lon, p.lat});
    }
    feat["properties"]["count"] = cs.count;
    feat["properties"]["per_km"] = cs.per_km;
    feat["properties"]["category"] = label(cs.category);
    feat["properties"]["color"] = color(cs.category);
    fc["features"].push_back(std::move(feat));
  }
  return fc.dump(2) + "\n";
}

std::string to_table(const std::vector<ClassifiedSegment>& classified) {
  std::ostringstream out;
  out << "segment\tlength_m\tcount\tper_km\tcategory\n";
  for (std::size_t i = 0; i < classified.size(); ++i) {
    const auto& cs = classified[i];
    char line[160];
    std::snprintf(line, sizeof(line), "%zu\t%.3f\t%lld\t%.6f\t%s\n", i,
                  cs.segment.length_m, static_cast<long long>(cs.count), cs.per_km,
                  label(cs.category));
    out << line;
  }
  return out.str();
}

}  // namespace treecount::classify
