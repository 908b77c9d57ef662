#include "treecount/kdr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "treecount/errors.hpp"

namespace treecount::kdr {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<geo::LocalFrame::XY> to_local_all(const std::vector<GeoPoint>& points,
                                              const geo::LocalFrame& frame) {
  std::vector<geo::LocalFrame::XY> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(frame.to_local(p));
  return out;
}

// Densities of the data points themselves, in input order.
std::vector<double> point_densities(const std::vector<geo::LocalFrame::XY>& pts,
                                    double h) {
  std::vector<double> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(kde_at(pts, p, h));
  return out;
}

void format_value(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

double kde_at(const std::vector<geo::LocalFrame::XY>& points_local,
              const geo::LocalFrame::XY& q, double h) {
  double sum = 0.0;
  for (const auto& p : points_local) {
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    const double d = std::sqrt(dx * dx + dy * dy);
    if (d < h) {
      const double r = d / h;
      sum += 1.0 - r * r;
    }
  }
  return 3.0 / (kPi * h * h) * sum;
}

DensityGrid kde_grid(const std::vector<GeoPoint>& points, const KdrConfig& config) {
  if (points.empty()) {
    throw EmptyPointSet("density grid needs at least one point");
  }
  if (!(config.bandwidth_m > 0.0)) {
    throw Error("bandwidth must be positive");
  }
  if (config.grid_cols < 2 || config.grid_rows < 2) {
    throw Error("grid must be at least 2x2");
  }

  GeoPoint centroid{0.0, 0.0};
  for (const auto& p : points) {
    centroid.lat += p.lat;
    centroid.lon += p.lon;
  }
  centroid.lat /= static_cast<double>(points.size());
  centroid.lon /= static_cast<double>(points.size());

  const geo::LocalFrame frame(centroid);
  const auto pts = to_local_all(points, frame);

  double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  min_x -= config.padding_m;
  max_x += config.padding_m;
  min_y -= config.padding_m;
  max_y += config.padding_m;

  const double ext_x = max_x - min_x;
  const double ext_y = max_y - min_y;
  double cell = std::max(ext_x / config.grid_cols, ext_y / config.grid_rows);
  if (!(cell > 0.0)) cell = 1.0;

  // Center the padded bounding box inside the (possibly larger) grid extent.
  const double grid_min_x = (min_x + max_x) / 2.0 - config.grid_cols * cell / 2.0;
  const double grid_min_y = (min_y + max_y) / 2.0 - config.grid_rows * cell / 2.0;

  DensityGrid grid(frame);
  grid.origin_x_m = grid_min_x + cell / 2.0;
  grid.origin_y_m = grid_min_y + cell / 2.0;
  grid.cell_size_m = cell;
  grid.cols = config.grid_cols;
  grid.rows = config.grid_rows;
  grid.kind = GridKind::Kde;
  grid.bandwidth_m = config.bandwidth_m;
  grid.values.resize(static_cast<std::size_t>(grid.rows) * grid.cols);

  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      grid.values[static_cast<std::size_t>(r) * grid.cols + c] =
          kde_at(pts, grid.cell_center(r, c), config.bandwidth_m);
    }
  }
  return grid;
}

DensityGrid kdr_grid(const std::vector<GeoPoint>& points, const DensityGrid& kde) {
  if (points.empty()) {
    throw EmptyPointSet("density ranking needs at least one point");
  }
  const auto pts = to_local_all(points, kde.local_frame);
  return rank_against(point_densities(pts, kde.bandwidth_m), kde);
}

DensityGrid rank_against(std::vector<double> reference_densities, const DensityGrid& kde) {
  if (reference_densities.empty()) {
    throw EmptyPointSet("density ranking needs at least one reference density");
  }
  std::sort(reference_densities.begin(), reference_densities.end());
  DensityGrid grid = kde;
  grid.kind = GridKind::Kdr;
  const double n = static_cast<double>(reference_densities.size());
  for (auto& v : grid.values) {
    const auto le = std::upper_bound(reference_densities.begin(),
                                     reference_densities.end(), v) -
                    reference_densities.begin();
    v = static_cast<double>(le) / n;
  }
  return grid;
}

std::string export_raster(const DensityGrid& grid) {
  // Lower-left corner of cell (0,0), back in geographic coordinates.
  const GeoPoint ll = [&] {
    geo::LocalFrame::XY corner{grid.origin_x_m - grid.cell_size_m / 2.0,
                               grid.origin_y_m - grid.cell_size_m / 2.0};
    return grid.local_frame.from_local(corner);
  }();
  const double cellsize_deg = grid.cell_size_m / geo::meters_per_deg_lat();

  std::string out;
  out.reserve(grid.values.size() * 20 + 200);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "ncols %d\n", grid.cols);
  out += buf;
  std::snprintf(buf, sizeof(buf), "nrows %d\n", grid.rows);
  out += buf;
  std::snprintf(buf, sizeof(buf), "xllcorner %.17g\n", ll.lon);
  out += buf;
  std::snprintf(buf, sizeof(buf), "yllcorner %.17g\n", ll.lat);
  out += buf;
  std::snprintf(buf, sizeof(buf), "cellsize %.17g\n", cellsize_deg);
  out += buf;
  out += "NODATA_value -9999\n";
  for (int r = grid.rows - 1; r >= 0; --r) {
    for (int c = 0; c < grid.cols; ++c) {
      if (c > 0) out += ' ';
      format_value(out, grid.at(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string points_geojson(const std::vector<GeoPoint>& points, const DensityGrid& kde) {
  using ordered_json = nlohmann::ordered_json;
  const auto pts = to_local_all(points, kde.local_frame);
  const std::vector<double> dens = point_densities(pts, kde.bandwidth_m);
  std::vector<double> ranked = dens;
  std::sort(ranked.begin(), ranked.end());
  const double n = static_cast<double>(ranked.size());

  ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = ordered_json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    ordered_json feat;
    feat["type"] = "Feature";
    feat["geometry"]["type"] = "Point";
    feat["geometry"]["coordinates"] = {points[i].lon, points[i].lat};
    feat["properties"]["density"] = dens[i];
    const auto le =
        std::upper_bound(ranked.begin(), ranked.end(), dens[i]) - ranked.begin();
    feat["properties"]["alpha"] = static_cast<double>(le) / n;
    fc["features"].push_back(std::move(feat));
  }
  return fc.dump(2) + "\n";
}

}  // namespace treecount::kdr
