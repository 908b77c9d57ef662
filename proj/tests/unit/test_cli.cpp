#include <string>

#include <doctest.h>
#include <json.hpp>

#include "../common/subprocess.hpp"

namespace {

using testutil::read_file;
using testutil::run_command;
using testutil::TempDir;
using testutil::write_file;

const std::string kCli = TREECOUNT_CLI;

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// Minimal fixture: 3 frames, two countable trees, straight 1.1 km track.
void write_small_inputs(const TempDir& dir) {
  write_file(dir.file("dets.jsonl"),
             R"({"type":"header","width":1920,"height":1080,"fps":30.0})"
             "\n"
             R"({"type":"frame","frame":0,"boxes":[[910,400,100,300,0.9]]})"
             "\n"
             R"({"type":"frame","frame":30,"boxes":[[905,400,100,300,0.9]]})"
             "\n"
             R"({"type":"frame","frame":60,"boxes":[[915,420,100,300,0.8]]})"
             "\n");
  write_file(dir.file("track.gpx"),
             "<?xml version=\"1.0\"?>\n"
             "<gpx version=\"1.1\" creator=\"t\"><trk><trkseg>\n"
             "<trkpt lat=\"17.4\" lon=\"78.5\"><time>2021-01-01T00:00:00Z</time></trkpt>\n"
             "<trkpt lat=\"17.4\" lon=\"78.505\"><time>2021-01-01T00:01:00Z</time></trkpt>\n"
             "<trkpt lat=\"17.4\" lon=\"78.51\"><time>2021-01-01T00:02:00Z</time></trkpt>\n"
             "</trkseg></trk></gpx>\n");
}

}  // namespace

TEST_CASE("cli: count writes a report and prints the total") {
  TempDir dir;
  write_small_inputs(dir);
  const auto report = dir.file("report.json");
  const auto r = run_command(kCli + " count " + quoted(dir.file("dets.jsonl")) + " " +
                             quoted(dir.file("track.gpx")) + " --out " + quoted(report));
  CHECK(r.status == 0);
  // Frames 0 and 30 overlap heavily but the suppression window (7 frames)
  // has long expired between them: three counts.
  CHECK(r.out == "3\n");
  const auto j = nlohmann::json::parse(read_file(report));
  CHECK(j["total"] == 3);
  CHECK(j["events"].size() == 3);
  CHECK(j["cumulative"].size() == 3);
}

TEST_CASE("cli: missing GPX names the path") {
  TempDir dir;
  write_small_inputs(dir);
  const auto r = run_command(kCli + " count " + quoted(dir.file("dets.jsonl")) +
                             " /no/such/track.gpx --out " + quoted(dir.file("r.json")));
  CHECK(r.status != 0);
  CHECK(r.err.find("/no/such/track.gpx") != std::string::npos);
}

TEST_CASE("cli: malformed detection line is cited by number") {
  TempDir dir;
  write_small_inputs(dir);
  std::string text = read_file(dir.file("dets.jsonl"));
  // Pad with valid frames so the junk lands on line 17.
  for (int i = 0; i < 12; ++i) {
    text += R"({"type":"frame","frame":)" + std::to_string(100 + i) + R"(,"boxes":[]})" + "\n";
  }
  text += "this is not json\n";
  write_file(dir.file("bad.jsonl"), text);
  const auto r = run_command(kCli + " count " + quoted(dir.file("bad.jsonl")) + " " +
                             quoted(dir.file("track.gpx")) + " --out " +
                             quoted(dir.file("r.json")));
  CHECK(r.status != 0);
  CHECK(r.err.find("line 17") != std::string::npos);
}

TEST_CASE("cli: flag overrides reach the counting stage") {
  TempDir dir;
  write_small_inputs(dir);
  // A min-confidence above 0.9 drops every box.
  const auto r = run_command(kCli + " count " + quoted(dir.file("dets.jsonl")) + " " +
                             quoted(dir.file("track.gpx")) + " --out " +
                             quoted(dir.file("r.json")) + " --min-conf 0.95");
  CHECK(r.status == 0);
  CHECK(r.out == "0\n");
}

TEST_CASE("cli: config file drives the pipeline") {
  TempDir dir;
  write_small_inputs(dir);
  write_file(dir.file("config.json"),
             R"({"confidence_threshold": 0.85, "counting": {"band_width_fraction": 0.2}})");
  const auto r = run_command(kCli + " count " + quoted(dir.file("dets.jsonl")) + " " +
                             quoted(dir.file("track.gpx")) + " --out " +
                             quoted(dir.file("r.json")) + " --config " +
                             quoted(dir.file("config.json")));
  CHECK(r.status == 0);
  CHECK(r.out == "2\n");  // the 0.8-confidence box is gone
  // A broken config is a clean failure.
  write_file(dir.file("bad.json"), R"({"counting": {"iou_threshold": 0}})");
  const auto bad = run_command(kCli + " count " + quoted(dir.file("dets.jsonl")) + " " +
                               quoted(dir.file("track.gpx")) + " --out " +
                               quoted(dir.file("r.json")) + " --config " +
                               quoted(dir.file("bad.json")));
  CHECK(bad.status != 0);
  CHECK(bad.err.find("iou_threshold") != std::string::npos);
}

TEST_CASE("cli: classify and density consume the count report") {
  TempDir dir;
  write_small_inputs(dir);
  const auto report = dir.file("report.json");
  REQUIRE(run_command(kCli + " count " + quoted(dir.file("dets.jsonl")) + " " +
                      quoted(dir.file("track.gpx")) + " --out " + quoted(report))
              .status == 0);

  const auto geojson = dir.file("map.geojson");
  const auto table = dir.file("segments.tsv");
  const auto rc = run_command(kCli + " classify " + quoted(report) + " " +
                              quoted(dir.file("track.gpx")) + " --out-geojson " +
                              quoted(geojson) + " --out-table " + quoted(table) +
                              " --segment-km 0.5");
  CHECK(rc.status == 0);
  const auto j = nlohmann::json::parse(read_file(geojson));
  CHECK(j["type"] == "FeatureCollection");
  CHECK(j["features"].size() == 3);  // ~1061 m track in 500 m pieces
  CHECK(read_file(table).find("per_km") != std::string::npos);

  const auto asc = dir.file("rank.asc");
  const auto kde = dir.file("kde.asc");
  const auto rd = run_command(kCli + " density " + quoted(report) + " --out " +
                              quoted(asc) + " --kde-out " + quoted(kde) +
                              " --grid 32x24 --bandwidth-m 40");
  CHECK(rd.status == 0);
  const std::string asc_text = read_file(asc);
  CHECK(asc_text.substr(0, 8) == "ncols 32");
  CHECK(asc_text.find("nrows 24") != std::string::npos);
  CHECK(read_file(kde).find("NODATA_value -9999") != std::string::npos);

  // classify without any output flag is an error.
  const auto none = run_command(kCli + " classify " + quoted(report) + " " +
                                quoted(dir.file("track.gpx")));
  CHECK(none.status != 0);

  // Event times are recomputed from frames at the configured rate: an absurd
  // rate pushes the frame-60 event past the end of the two-minute track.
  const auto slow = run_command(kCli + " classify " + quoted(report) + " " +
                                quoted(dir.file("track.gpx")) + " --out-table " +
                                quoted(table) + " --fps 0.01");
  CHECK(slow.status != 0);
  const auto fps_ok = run_command(kCli + " classify " + quoted(report) + " " +
                                  quoted(dir.file("track.gpx")) + " --out-table " +
                                  quoted(table) + " --fps 30");
  CHECK(fps_ok.status == 0);
}

TEST_CASE("cli: evaluate prints the aggregates") {
  TempDir dir;
  write_file(dir.file("evals.jsonl"),
             R"({"route":"r1","km":0.63,"gt":125,"pred":118})" "\n"
             R"({"route":"r2","km":0.60,"gt":11,"pred":9})" "\n"
             R"({"route":"r3","km":0.89,"gt":32,"pred":21})" "\n"
             R"({"route":"r4","km":0.75,"gt":29,"pred":27})" "\n"
             R"({"route":"r5","km":0.70,"gt":36,"pred":35})" "\n");
  const auto out = dir.file("eval.txt");
  const auto r = run_command(kCli + " evaluate " + quoted(dir.file("evals.jsonl")) +
                             " --out " + quoted(out));
  CHECK(r.status == 0);
  CHECK(r.out.find("MAE 4.600000") != std::string::npos);
  CHECK(r.out.find("TCDCA 0.800000") != std::string::npos);
  CHECK(read_file(out).find("r3") != std::string::npos);

  // Re-running is byte-identical.
  const std::string first = read_file(out);
  const auto again = run_command(kCli + " evaluate " + quoted(dir.file("evals.jsonl")) +
                                 " --out " + quoted(out));
  CHECK(again.status == 0);
  CHECK(read_file(out) == first);

  const auto empty = run_command(kCli + " evaluate /dev/null --out " + quoted(out));
  CHECK(empty.status != 0);
}

TEST_CASE("cli: simulate emits pipeline-ready files") {
  TempDir dir;
  write_file(dir.file("scene.json"), R"({
    "camera_speed_mps": 10.0, "lateral_depth_m": 5.0, "focal_px": 1000.0,
    "duration_s": 14.0,
    "trees": [[30.0, 1.2, 4.0], [50.0, 1.2, 4.0], [70.0, 1.2, 4.0]],
    "noise": {"seed": 3}
  })");
  const auto prefix = dir.file("scene");
  const auto rs = run_command(kCli + " simulate " + quoted(dir.file("scene.json")) +
                              " --out-prefix " + quoted(prefix) + " --band-width 0.05");
  CHECK(rs.status == 0);
  CHECK(rs.err.empty());  // in-regime scenes pass without the regime note
  const auto truth = nlohmann::json::parse(read_file(dir.file("scene.truth.json")));
  CHECK(truth["count"] == 3);

  const auto rc = run_command(kCli + " count " + quoted(dir.file("scene.detections.jsonl")) +
                              " " + quoted(dir.file("scene.gpx")) + " --out " +
                              quoted(dir.file("scene.report.json")) + " --band-width 0.05");
  CHECK(rc.status == 0);
  CHECK(rc.out == "3\n");
}

TEST_CASE("cli: simulate warns when the scene leaves the exact-count regime") {
  TempDir dir;
  // Trunks 0.5 m wide move 66.7 px/frame against a 100 px box: consecutive
  // in-band boxes overlap too little to match, so the counter re-counts them.
  write_file(dir.file("scene.json"), R"({
    "camera_speed_mps": 10.0, "lateral_depth_m": 5.0, "focal_px": 1000.0,
    "duration_s": 14.0,
    "trees": [[30.0, 0.5, 4.0], [50.0, 0.5, 4.0], [70.0, 0.5, 4.0]],
    "noise": {"seed": 3}
  })");
  const auto r = run_command(kCli + " simulate " + quoted(dir.file("scene.json")) +
                             " --out-prefix " + quoted(dir.file("thin")));
  CHECK(r.status == 0);  // files are still written; the note is informational
  CHECK(r.err.find("exact-count regime") != std::string::npos);
  CHECK(read_file(dir.file("thin.truth.json")).find("\"count\": 3") != std::string::npos);
}

TEST_CASE("cli: unknown subcommands fail") {
  const auto r = run_command(kCli + " frobnicate");
  CHECK(r.status != 0);
}
