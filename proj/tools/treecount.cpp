// Command-line front end: count / classify / density / evaluate / simulate
// subcommands wired over the documented file formats.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "treecount/classify.hpp"
#include "treecount/config.hpp"
#include "treecount/counting.hpp"
#include "treecount/errors.hpp"
#include "treecount/geo.hpp"
#include "treecount/ingest.hpp"
#include "treecount/kdr.hpp"
#include "treecount/metrics.hpp"
#include "treecount/simulate.hpp"

namespace {

using namespace treecount;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open output file: " + path);
  }
  out << text;
  out.flush();
  if (!out) {
    throw Error("failed while writing: " + path);
  }
}

// Flag values shared across subcommands; unset flags keep config/defaults.
struct Overrides {
  std::string config_path;
  std::optional<double> offset_s;
  std::optional<double> segment_km;
  std::optional<double> bandwidth_m;
  std::optional<std::string> grid;
  std::optional<double> band_center;
  std::optional<double> band_width;
  std::optional<double> min_conf;
  std::optional<double> fps;
};

void add_shared_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "Pipeline config file (JSON)");
  cmd->add_option("--offset-s", ov.offset_s, "GPS clock offset in seconds");
  cmd->add_option("--segment-km", ov.segment_km, "Segment length in kilometers");
  cmd->add_option("--bandwidth-m", ov.bandwidth_m, "Density kernel radius in meters");
  cmd->add_option("--grid", ov.grid, "Raster size as COLSxROWS (or one number for square)");
  cmd->add_option("--band-center", ov.band_center,
                  "Counting band center as a fraction of image width");
  cmd->add_option("--band-width", ov.band_width,
                  "Counting band width as a fraction of image width");
  cmd->add_option("--min-conf", ov.min_conf, "Minimum detection confidence");
  cmd->add_option("--fps", ov.fps,
                  "Frame rate used to turn report frames back into times "
                  "(default 30)");
}

PipelineConfig resolve_config(const Overrides& ov) {
  PipelineConfig config;
  if (!ov.config_path.empty()) {
    config = load_pipeline_config(ov.config_path);
  }
  if (ov.offset_s) config.gps_offset_s = *ov.offset_s;
  if (ov.segment_km) config.segment_length_m = *ov.segment_km * 1000.0;
  if (ov.bandwidth_m) config.kdr.bandwidth_m = *ov.bandwidth_m;
  if (ov.band_center) config.counting.band_center_fraction = *ov.band_center;
  if (ov.band_width) config.counting.band_width_fraction = *ov.band_width;
  if (ov.min_conf) config.counting.min_confidence = *ov.min_conf;
  if (ov.fps) config.fps_override = *ov.fps;
  if (ov.grid) {
    const auto& g = *ov.grid;
    const auto x = g.find('x');
    try {
      if (x == std::string::npos) {
        config.kdr.grid_cols = config.kdr.grid_rows = std::stoi(g);
      } else {
        config.kdr.grid_cols = std::stoi(g.substr(0, x));
        config.kdr.grid_rows = std::stoi(g.substr(x + 1));
      }
    } catch (const std::exception&) {
      throw Error("cannot parse --grid value: " + g);
    }
  }
  validate(config);
  return config;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Street-tree counting, density index maps, and density-ranking rasters"};
  app.require_subcommand(1);

  Overrides ov;

  // count
  std::string detections_path, gpx_path, report_out;
  auto* count = app.add_subcommand("count", "Count trees in a detection stream");
  count->add_option("detections", detections_path, "Detection stream (JSON lines)")
      ->required();
  count->add_option("gpx", gpx_path, "GPS track (GPX 1.1)")->required();
  count->add_option("--out", report_out, "Count report output path")->required();
  add_shared_flags(count, ov);
  count->callback([&] {
    const PipelineConfig config = resolve_config(ov);
    const DetectionStream stream = ingest::load_detections(detections_path);
    const geo::TrackLog track = ingest::load_gpx(gpx_path);
    auto result = counting::run(stream, track, config.counting, config.gps_offset_s);
    counting::save_report(result, report_out);
    std::cout << result.total << "\n";
  });

  // classify
  std::string cls_report, cls_gpx, out_geojson, out_table;
  auto* classify_cmd = app.add_subcommand(
      "classify", "Split the route into segments and classify tree density");
  classify_cmd->add_option("report", cls_report, "Count report (JSON)")->required();
  classify_cmd->add_option("gpx", cls_gpx, "GPS track (GPX 1.1)")->required();
  classify_cmd->add_option("--out-geojson", out_geojson, "Category map output (GeoJSON)");
  classify_cmd->add_option("--out-table", out_table, "Per-segment table output (TSV)");
  add_shared_flags(classify_cmd, ov);
  classify_cmd->callback([&] {
    if (out_geojson.empty() && out_table.empty()) {
      throw Error("classify needs --out-geojson and/or --out-table");
    }
    const PipelineConfig config = resolve_config(ov);
    auto report = counting::load_report(cls_report);
    const geo::TrackLog track = ingest::load_gpx(cls_gpx);
    const double fps = config.fps_override.value_or(30.0);
    counting::recompute_event_times(report, fps, config.gps_offset_s, track.start_time());
    const auto segments = geo::segment_route(track, config.segment_length_m);
    const auto classified = classify::classify_segments(report.events, segments);
    if (!out_geojson.empty()) {
      write_text_file(out_geojson, classify::to_category_geojson(classified));
    }
    if (!out_table.empty()) {
      write_text_file(out_table, classify::to_table(classified));
    }
  });

  // density
  std::string den_report, den_out, kde_out, points_out;
  auto* density = app.add_subcommand(
      "density", "Rasterize counted-tree density ranking over the route area");
  density->add_option("report", den_report, "Count report (JSON)")->required();
  density->add_option("--out", den_out, "Density-ranking raster output (.asc)")
      ->required();
  density->add_option("--kde-out", kde_out, "Raw density raster output (.asc)");
  density->add_option("--points-out", points_out,
                      "Per-point density/rank dump (GeoJSON)");
  add_shared_flags(density, ov);
  density->callback([&] {
    const PipelineConfig config = resolve_config(ov);
    const auto report = counting::load_report(den_report);
    std::vector<GeoPoint> points;
    points.reserve(report.events.size());
    for (const auto& ev : report.events) points.push_back(ev.position);
    const auto kde = kdr::kde_grid(points, config.kdr);
    const auto ranked = kdr::kdr_grid(points, kde);
    write_text_file(den_out, kdr::export_raster(ranked));
    if (!kde_out.empty()) {
      write_text_file(kde_out, kdr::export_raster(kde));
    }
    if (!points_out.empty()) {
      write_text_file(points_out, kdr::points_geojson(points, kde));
    }
  });

  // evaluate
  std::string evals_path, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score predicted counts per route");
  evaluate->add_option("evals", evals_path, "Route evaluations (JSON lines)")
      ->required();
  evaluate->add_option("--out", eval_out, "Evaluation report output")->required();
  evaluate->callback([&] {
    const auto evals = metrics::load_evals(evals_path);
    if (evals.empty()) {
      throw EmptyEvalSet("evaluation file has no routes: " + evals_path);
    }
    std::ostringstream report;
    metrics::write_eval_report(evals, report);
    write_text_file(eval_out, report.str());
    std::printf("MAE %.6f\nTCDCA %.6f\n", metrics::mae(evals), metrics::tcdca(evals));
  });

  // simulate
  std::string scene_path, out_prefix;
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic scene: detections, track, ground truth");
  simulate->add_option("scene", scene_path, "Scene config (JSON)")->required();
  simulate->add_option("--out-prefix", out_prefix, "Output path prefix")->required();
  add_shared_flags(simulate, ov);
  simulate->callback([&] {
    const PipelineConfig config = resolve_config(ov);
    const sim::SceneSpec scene = sim::load_scene(scene_path);
    const sim::SceneOutput out = sim::generate(scene, config.counting);
    ingest::save_detections(out.stream, out_prefix + ".detections.jsonl");
    write_text_file(out_prefix + ".gpx", sim::to_gpx(out.track));
    write_text_file(out_prefix + ".truth.json", sim::truth_to_json(out.truth));
    if (!sim::validity_check(scene, config.counting)) {
      std::cerr << "note: scene is outside the exact-count regime (boxes move "
                   "too far, or overlap too little, between frames while in "
                   "the band); the counter may not match the ground truth\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
