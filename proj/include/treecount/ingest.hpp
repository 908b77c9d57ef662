#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "treecount/geo.hpp"
#include "treecount/types.hpp"

namespace treecount::ingest {

// --- Detection streams (JSON-lines) ---------------------------------------
//
// Line 1 is a header object:
//   {"type":"header","width":1920,"height":1080,"fps":30.0}
// Every following non-blank line is one frame record:
//   {"type":"frame","frame":12,"boxes":[[x,y,w,h,confidence],...]}
//
// Frame indices must be strictly increasing; gaps are allowed. Boxes are
// clamped to the image rectangle on read. A box whose clamped area is empty,
// or whose raw width/height is not positive, is a geometry error; a
// confidence outside [0,1] is a malformed record.

DetectionStream read_detections(std::istream& in);
DetectionStream load_detections(const std::string& path);

void write_detections(const DetectionStream& stream, std::ostream& out);
void save_detections(const DetectionStream& stream, const std::string& path);

// --- GPS tracks (GPX 1.1 subset) -------------------------------------------
//
// Reads <trkpt lat=".." lon=".."><time>ISO-8601</time></trkpt> elements from
// every <trkseg> of every <trk>, concatenated in document order. Times are
// returned as seconds since the Unix epoch. Every point must carry a
// timestamp and times must be strictly increasing.
//
// `max_spacing_m` is a sanity bound on the gap between consecutive fixes;
// tracks recorded from a moving vehicle sample every second or two, so a
// much larger gap means the file is broken or mis-joined.

geo::TrackLog read_gpx(std::istream& in, double max_spacing_m = 1000.0);
geo::TrackLog load_gpx(const std::string& path, double max_spacing_m = 1000.0);

// Parse one ISO-8601 UTC timestamp ("2021-01-01T00:00:00Z", optional
// fractional seconds) to seconds since the Unix epoch.
double parse_iso8601_utc(const std::string& text);

}  // namespace treecount::ingest
