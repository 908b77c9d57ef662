#pragma once

#include <string>
#include <vector>

#include "treecount/geo.hpp"
#include "treecount/types.hpp"

namespace treecount::kdr {

struct KdrConfig {
  double bandwidth_m = 50.0;  // kernel radius h
  int grid_cols = 256;
  int grid_rows = 256;
  double padding_m = 50.0;  // grid margin beyond the point bounding box
};

enum class GridKind { Kde, Kdr };

// Raster over a local planar frame. Cell (row 0, col 0) is the south-west
// cell; rows grow north, columns grow east; values are row-major.
struct DensityGrid {
  explicit DensityGrid(const geo::LocalFrame& frame) : local_frame(frame) {}

  geo::LocalFrame local_frame;
  double origin_x_m = 0.0;  // center of cell (0,0)
  double origin_y_m = 0.0;
  double cell_size_m = 1.0;
  int cols = 0;
  int rows = 0;
  std::vector<double> values;
  GridKind kind = GridKind::Kde;
  double bandwidth_m = 0.0;  // h the grid was built with

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * cols + col]; }
  geo::LocalFrame::XY cell_center(int row, int col) const {
    return {origin_x_m + col * cell_size_m, origin_y_m + row * cell_size_m};
  }
};

// Compact-support kernel density at q: (3/(pi h^2)) * sum over points with
// d < h of (1 - (d/h)^2). Distances are planar meters in the local frame.
double kde_at(const std::vector<geo::LocalFrame::XY>& points_local,
              const geo::LocalFrame::XY& q, double h);

// Rasterized density: local frame at the point centroid, grid covering the
// padded point bounding box, every cell-center evaluated with kde_at.
DensityGrid kde_grid(const std::vector<GeoPoint>& points, const KdrConfig& config);

// Density ranking: each cell becomes the fraction of data points whose
// density is <= the cell's density. Data-point densities are evaluated at
// their exact coordinates, not snapped to cells.
DensityGrid kdr_grid(const std::vector<GeoPoint>& points, const DensityGrid& kde);

// The rank transform kdr_grid is built on: each cell value is replaced by
// the fraction of reference densities <= it (ranks depend only on order, so
// scaling all densities by one positive factor changes nothing).
DensityGrid rank_against(std::vector<double> reference_densities, const DensityGrid& kde);

// ESRI ASCII grid text (ncols/nrows/xllcorner/yllcorner/cellsize/NODATA
// header, then rows north to south). Corner and cellsize are in degrees.
std::string export_raster(const DensityGrid& grid);

// GeoJSON point dump: one feature per data point with its density and rank.
std::string points_geojson(const std::vector<GeoPoint>& points, const DensityGrid& kde);

}  // namespace treecount::kdr
