#include "treecount/config.hpp"

#include <fstream>

#include <json.hpp>

#include "treecount/errors.hpp"

namespace treecount {

using nlohmann::json;

void validate(const PipelineConfig& config) {
  const auto& c = config.counting;
  if (!(c.band_width_fraction > 0.0) || c.band_width_fraction > 1.0) {
    throw Error("config: band_width_fraction must be in (0,1]");
  }
  if (c.band_center_fraction < c.band_width_fraction / 2.0 ||
      c.band_center_fraction > 1.0 - c.band_width_fraction / 2.0) {
    throw Error("config: counting band must lie inside the image");
  }
  if (!(c.iou_threshold > 0.0) || c.iou_threshold > 1.0) {
    throw Error("config: iou_threshold must be in (0,1]");
  }
  if (c.next_frames_to_consider < 1) {
    throw Error("config: next_frames_to_consider must be at least 1");
  }
  if (c.min_confidence < 0.0 || c.min_confidence > 1.0) {
    throw Error("config: confidence_threshold must be in [0,1]");
  }
  if (!(config.kdr.bandwidth_m > 0.0)) {
    throw Error("config: bandwidth_m must be positive");
  }
  if (config.kdr.grid_cols < 2 || config.kdr.grid_rows < 2) {
    throw Error("config: grid must be at least 2x2");
  }
  if (config.kdr.padding_m < 0.0) {
    throw Error("config: padding_m must be non-negative");
  }
  if (!(config.segment_length_m > 0.0)) {
    throw Error("config: segment_length_m must be positive");
  }
  if (config.fps_override && !(*config.fps_override > 0.0)) {
    throw Error("config: fps override must be positive");
  }
}

PipelineConfig read_pipeline_config(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw Error("config must be a JSON object");
  }
  PipelineConfig config;
  if (j.contains("counting")) {
    const auto& jc = j["counting"];
    auto& c = config.counting;
    c.band_center_fraction = jc.value("band_center_fraction", c.band_center_fraction);
    c.band_width_fraction = jc.value("band_width_fraction", c.band_width_fraction);
    c.iou_threshold = jc.value("iou_threshold", c.iou_threshold);
    c.next_frames_to_consider = jc.value("next_frames_to_consider", c.next_frames_to_consider);
  }
  if (j.contains("kdr")) {
    const auto& jk = j["kdr"];
    auto& k = config.kdr;
    k.bandwidth_m = jk.value("bandwidth_m", k.bandwidth_m);
    k.grid_cols = jk.value("grid_cols", k.grid_cols);
    k.grid_rows = jk.value("grid_rows", k.grid_rows);
    k.padding_m = jk.value("padding_m", k.padding_m);
  }
  config.segment_length_m = j.value("segment_length_m", config.segment_length_m);
  config.gps_offset_s = j.value("gps_offset_s", config.gps_offset_s);
  config.counting.min_confidence =
      j.value("confidence_threshold", config.counting.min_confidence);
  if (j.contains("fps")) {
    config.fps_override = j["fps"].get<double>();
  }
  validate(config);
  return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open config: " + path);
  }
  return read_pipeline_config(in);
}

}  // namespace treecount
