#pragma once

#include <istream>
#include <optional>
#include <string>

#include "treecount/counting.hpp"
#include "treecount/kdr.hpp"

namespace treecount {

// One config file drives every pipeline stage; CLI flags override fields.
struct PipelineConfig {
  counting::CountingConfig counting;
  kdr::KdrConfig kdr;
  double segment_length_m = 1000.0;
  double gps_offset_s = 0.0;
  // Frame rate for stages that consume reports (which store frame indices,
  // not times); count reads fps from the detection header unless set.
  std::optional<double> fps_override;
};

// Throws Error on unreadable files, invalid JSON, or out-of-range values.
PipelineConfig read_pipeline_config(std::istream& in);
PipelineConfig load_pipeline_config(const std::string& path);

void validate(const PipelineConfig& config);

}  // namespace treecount
