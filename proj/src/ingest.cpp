#include "treecount/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "treecount/errors.hpp"

namespace treecount::ingest {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

json parse_line(const std::string& line, int line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedRecord(line_no, e.what());
  }
}

double require_number(const json& j, const char* key, int line_no) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw MalformedRecord(line_no, std::string("missing numeric field '") + key + "'");
  }
  return j[key].get<double>();
}

ImageGeometry parse_header(const json& j, int line_no) {
  if (j.value("type", "") != "header") {
    throw MalformedRecord(line_no, "first record must have type 'header'");
  }
  ImageGeometry geom;
  const double w = require_number(j, "width", line_no);
  const double h = require_number(j, "height", line_no);
  geom.fps = require_number(j, "fps", line_no);
  if (w <= 0 || h <= 0 || w != static_cast<int>(w) || h != static_cast<int>(h)) {
    throw MalformedRecord(line_no, "width/height must be positive integers");
  }
  if (!(geom.fps > 0)) {
    throw MalformedRecord(line_no, "fps must be positive");
  }
  geom.width = static_cast<int>(w);
  geom.height = static_cast<int>(h);
  return geom;
}

Box parse_box(const json& jb, const ImageGeometry& geom, int line_no) {
  if (!jb.is_array() || jb.size() != 5) {
    throw MalformedRecord(line_no, "box must be a [x,y,w,h,confidence] array");
  }
  for (const auto& v : jb) {
    if (!v.is_number()) {
      throw MalformedRecord(line_no, "box elements must be numbers");
    }
  }
  const double x = jb[0].get<double>();
  const double y = jb[1].get<double>();
  const double w = jb[2].get<double>();
  const double h = jb[3].get<double>();
  const double conf = jb[4].get<double>();
  if (conf < 0.0 || conf > 1.0) {
    throw MalformedRecord(line_no, "confidence must be in [0,1]");
  }
  if (!(w > 0.0) || !(h > 0.0)) {
    throw GeometryViolation("box at line " + std::to_string(line_no) +
                            " has non-positive width or height");
  }
  // Clamp to the image rectangle; a box entirely outside it is an error.
  const double x0 = std::clamp(x, 0.0, static_cast<double>(geom.width));
  const double x1 = std::clamp(x + w, 0.0, static_cast<double>(geom.width));
  const double y0 = std::clamp(y, 0.0, static_cast<double>(geom.height));
  const double y1 = std::clamp(y + h, 0.0, static_cast<double>(geom.height));
  if (!(x1 - x0 > 0.0) || !(y1 - y0 > 0.0)) {
    throw GeometryViolation("box at line " + std::to_string(line_no) +
                            " lies outside the image");
  }
  return Box{x0, y0, x1 - x0, y1 - y0, conf};
}

}  // namespace

DetectionStream read_detections(std::istream& in) {
  DetectionStream stream;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::int64_t last_frame = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json j = parse_line(line, line_no);
    if (!j.is_object()) {
      throw MalformedRecord(line_no, "record must be a JSON object");
    }
    if (!have_header) {
      stream.geometry = parse_header(j, line_no);
      have_header = true;
      continue;
    }
    if (j.value("type", "") != "frame") {
      throw MalformedRecord(line_no, "expected a record with type 'frame'");
    }
    if (!j.contains("frame") || !j["frame"].is_number_integer()) {
      throw MalformedRecord(line_no, "missing integer field 'frame'");
    }
    FrameDetections fd;
    fd.frame = j["frame"].get<std::int64_t>();
    if (fd.frame < 0) {
      throw MalformedRecord(line_no, "frame index must be non-negative");
    }
    if (fd.frame <= last_frame) {
      throw NonMonotoneFrame(fd.frame);
    }
    last_frame = fd.frame;
    if (!j.contains("boxes") || !j["boxes"].is_array()) {
      throw MalformedRecord(line_no, "missing array field 'boxes'");
    }
    for (const auto& jb : j["boxes"]) {
      fd.boxes.push_back(parse_box(jb, stream.geometry, line_no));
    }
    stream.frames.push_back(std::move(fd));
  }
  if (!have_header) {
    throw MalformedRecord(1, "stream has no header record");
  }
  return stream;
}

DetectionStream load_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open detection stream: " + path);
  }
  return read_detections(in);
}

void write_detections(const DetectionStream& stream, std::ostream& out) {
  ordered_json header;
  header["type"] = "header";
  header["width"] = stream.geometry.width;
  header["height"] = stream.geometry.height;
  header["fps"] = stream.geometry.fps;
  out << header.dump() << '\n';
  for (const auto& fd : stream.frames) {
    ordered_json rec;
    rec["type"] = "frame";
    rec["frame"] = fd.frame;
    rec["boxes"] = ordered_json::array();
    for (const auto& b : fd.boxes) {
      rec["boxes"].push_back({b.x, b.y, b.w, b.h, b.confidence});
    }
    out << rec.dump() << '\n';
  }
}

void save_detections(const DetectionStream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open output file: " + path);
  }
  write_detections(stream, out);
  if (!out) {
    throw Error("failed while writing: " + path);
  }
}

double parse_iso8601_utc(const std::string& text) {
  std::string s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.empty() || (s.back() != 'Z' && s.back() != 'z')) {
    throw MalformedGpx("timestamp is not UTC ('Z' suffix required): " + text);
  }
  s.pop_back();
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, consumed = 0;
  double sec = 0.0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%lf%n", &y, &mo, &d, &h, &mi, &sec,
                  &consumed) != 6 ||
      consumed != static_cast<int>(s.size())) {
    throw MalformedGpx("unparseable timestamp: " + text);
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
      sec < 0.0 || sec >= 61.0) {
    throw MalformedGpx("timestamp field out of range: " + text);
  }
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = 0;
  const std::time_t base = timegm(&tm);
  return static_cast<double>(base) + sec;
}

geo::TrackLog read_gpx(std::istream& in, double max_spacing_m) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw MalformedGpx(std::string("cannot parse GPX XML: ") + e.what());
  }

  const auto gpx = tree.get_child_optional("gpx");
  if (!gpx) {
    throw MalformedGpx("no <gpx> root element");
  }

  std::vector<TrackPoint> points;
  for (const auto& [trk_name, trk] : *gpx) {
    if (trk_name != "trk") continue;
    for (const auto& [seg_name, seg] : trk) {
      if (seg_name != "trkseg") continue;
      for (const auto& [pt_name, node] : seg) {
        if (pt_name != "trkpt") continue;
        TrackPoint p;
        try {
          p.lat = node.get<double>("<xmlattr>.lat");
          p.lon = node.get<double>("<xmlattr>.lon");
        } catch (const pt::ptree_error&) {
          throw MalformedGpx("trkpt without numeric lat/lon attributes");
        }
        if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0) {
          throw MalformedGpx("trkpt coordinates out of range");
        }
        const auto time_text = node.get_optional<std::string>("time");
        if (!time_text) {
          throw MissingTimestamps("trkpt without a <time> child");
        }
        p.t = parse_iso8601_utc(*time_text);
        points.push_back(p);
      }
    }
  }

  if (points.size() < 2) {
    throw MalformedGpx("track has fewer than two points");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].t > points[i - 1].t)) {
      throw NonMonotoneTime(points[i].t);
    }
    const double gap = geo::haversine_m({points[i - 1].lat, points[i - 1].lon},
                                        {points[i].lat, points[i].lon});
    if (gap > max_spacing_m) {
      std::ostringstream msg;
      msg << "fixes " << (i - 1) << " and " << i << " are " << gap
          << " m apart (limit " << max_spacing_m << " m)";
      throw MalformedGpx(msg.str());
    }
  }
  return geo::TrackLog(std::move(points));
}

geo::TrackLog load_gpx(const std::string& path, double max_spacing_m) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open GPX file: " + path);
  }
  return read_gpx(in, max_spacing_m);
}

}  // namespace treecount::ingest
