#include <sstream>

#include <doctest.h>

#include "treecount/counting.hpp"
#include "treecount/errors.hpp"
#include "treecount/geo.hpp"

using namespace treecount;
using namespace treecount::counting;

namespace {

Box box_at(double cx, double w = 100.0, double conf = 0.9) {
  return Box{cx - w / 2.0, 400.0, w, 300.0, conf};
}

const ImageGeometry kGeom{1920, 1080, 30.0};

// Band [720, 1200]: exactly representable bounds for boundary tests.
CountingConfig wide_band() {
  CountingConfig cfg;
  cfg.band_center_fraction = 0.5;
  cfg.band_width_fraction = 0.25;
  return cfg;
}

geo::TrackLog equator_track() {
  return geo::TrackLog({{0.0, 0.0, 0.0}, {0.0, 0.01, 100.0}});
}

}  // namespace

TEST_CASE("iou arithmetic") {
  const Box a{0, 0, 10, 10, 1.0};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, Box{20, 20, 10, 10, 1.0}) == 0.0);
  CHECK(iou(a, Box{5, 0, 10, 10, 1.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // Touching edges do not overlap.
  CHECK(iou(a, Box{10, 0, 10, 10, 1.0}) == 0.0);
  CHECK(iou(a, Box{2, 3, 4, 5, 1.0}) == doctest::Approx(20.0 / 100.0).epsilon(1e-15));
}

TEST_CASE("counting range membership") {
  CountingConfig cfg;  // defaults: center 0.5, width 0.10 -> [864, 1056]
  CHECK(in_counting_range(box_at(960.0), kGeom, cfg));
  CHECK_FALSE(in_counting_range(box_at(50.0), kGeom, cfg));
  CHECK_FALSE(in_counting_range(box_at(1910.0), kGeom, cfg));

  const CountingConfig wide = wide_band();
  CHECK(in_counting_range(box_at(720.0), kGeom, wide));   // lower edge, closed
  CHECK(in_counting_range(box_at(1200.0), kGeom, wide));  // upper edge, closed
  CHECK_FALSE(in_counting_range(box_at(719.9999), kGeom, wide));
  CHECK_FALSE(in_counting_range(box_at(1200.0001), kGeom, wide));
}

TEST_CASE("frame_time arithmetic") {
  CHECK(frame_time(45, kGeom, 2.5, 100.0) == 104.0);
  CHECK(frame_time(0, kGeom, 0.0, 7.0) == 7.0);
  CHECK(frame_time(60, kGeom, -1.0, 0.0) == 1.0);
}

TEST_CASE("counter: empty frames change nothing but the frame cursor") {
  TreeCounter counter(kGeom, wide_band());
  CHECK(counter.step(0, {}).empty());
  CHECK(counter.step(5, {}).empty());
  CHECK(counter.total() == 0);
  CHECK(counter.active_entries() == 0);
  CHECK(counter.last_frame_index() == 5);
}

TEST_CASE("counter: first box in band is counted, repeat is suppressed") {
  TreeCounter counter(kGeom, wide_band());
  const auto first = counter.step(0, {box_at(900.0)});
  REQUIRE(first.size() == 1);
  CHECK(first[0] == 0);
  CHECK(counter.total() == 1);
  CHECK(counter.active_entries() == 1);
  // Identical box next frame: IoU 1.0 with the registry entry.
  CHECK(counter.step(1, {box_at(900.0)}).empty());
  CHECK(counter.total() == 1);
}

TEST_CASE("counter: entry lives for exactly the suppression window") {
  SUBCASE("reappearance on the last covered frame is suppressed") {
    TreeCounter counter(kGeom, wide_band());
    counter.step(0, {box_at(900.0)});
    CHECK(counter.step(6, {box_at(900.0)}).empty());  // entry created at 0 covers 1..6
    CHECK(counter.total() == 1);
  }
  SUBCASE("reappearance after expiry is counted again") {
    TreeCounter counter(kGeom, wide_band());
    counter.step(0, {box_at(900.0)});
    CHECK(counter.step(7, {box_at(900.0)}).size() == 1);
    CHECK(counter.total() == 2);
  }
  SUBCASE("gap frames age entries too") {
    TreeCounter counter(kGeom, wide_band());
    counter.step(0, {box_at(900.0)});
    counter.step(3, {});  // ages by 3
    CHECK(counter.active_entries() == 1);
    counter.step(7, {});  // total elapsed 7 -> expired
    CHECK(counter.active_entries() == 0);
  }
}

TEST_CASE("counter: boxes outside the band are invisible to it") {
  TreeCounter counter(kGeom, wide_band());
  CHECK(counter.step(0, {box_at(100.0)}).empty());
  CHECK(counter.total() == 0);
  CHECK(counter.active_entries() == 0);
}

TEST_CASE("counter: same-frame boxes see earlier same-frame entries") {
  TreeCounter counter(kGeom, wide_band());
  // Two heavily overlapping boxes in one frame: second is suppressed by the
  // first one's fresh registry entry.
  const auto counted = counter.step(0, {box_at(900.0), box_at(910.0)});
  REQUIRE(counted.size() == 1);
  CHECK(counted[0] == 0);
  // Two distant in-band boxes in one frame both count.
  TreeCounter counter2(kGeom, wide_band());
  CHECK(counter2.step(0, {box_at(780.0), box_at(1150.0)}).size() == 2);
}

TEST_CASE("counter: rejects non-increasing frame indices") {
  TreeCounter counter(kGeom, wide_band());
  counter.step(4, {});
  CHECK_THROWS_AS(counter.step(4, {}), NonMonotoneFrame);
  CHECK_THROWS_AS(counter.step(3, {}), NonMonotoneFrame);
}

TEST_CASE("run: zero frames give an empty report") {
  DetectionStream stream;
  stream.geometry = kGeom;
  const auto result = run(stream, equator_track(), wide_band());
  CHECK(result.total == 0);
  CHECK(result.events.empty());
  CHECK(result.per_frame_cumulative.empty());
}

TEST_CASE("run: filters by confidence and geo-tags events") {
  DetectionStream stream;
  stream.geometry = kGeom;
  stream.frames.push_back({0, {box_at(900.0, 100.0, 0.1)}});   // below min_confidence
  stream.frames.push_back({30, {box_at(900.0, 100.0, 0.9)}});  // counted
  const auto track = equator_track();
  const auto result = run(stream, track, wide_band());
  CHECK(result.total == 1);
  REQUIRE(result.events.size() == 1);
  const auto& ev = result.events[0];
  CHECK(ev.frame == 30);
  CHECK(ev.t == 1.0);  // 30 frames at 30 fps after track start 0
  const GeoPoint expect = geo::interpolate(track, ev.t);
  CHECK(ev.position.lat == expect.lat);
  CHECK(ev.position.lon == expect.lon);
  REQUIRE(result.per_frame_cumulative.size() == 2);
  CHECK(result.per_frame_cumulative[0] == std::pair<std::int64_t, std::int64_t>{0, 0});
  CHECK(result.per_frame_cumulative[1] == std::pair<std::int64_t, std::int64_t>{30, 1});
}

TEST_CASE("run: cumulative series never decreases") {
  DetectionStream stream;
  stream.geometry = kGeom;
  for (int f = 0; f < 40; ++f) {
    FrameDetections fd;
    fd.frame = f;
    if (f % 9 == 0) fd.boxes.push_back(box_at(900.0 + (f % 3) * 150.0));
    stream.frames.push_back(fd);
  }
  const auto result = run(stream, equator_track(), wide_band());
  for (std::size_t i = 1; i < result.per_frame_cumulative.size(); ++i) {
    CHECK(result.per_frame_cumulative[i].second >=
          result.per_frame_cumulative[i - 1].second);
  }
  CHECK(result.per_frame_cumulative.size() == stream.frames.size());
  CHECK(result.total == static_cast<std::int64_t>(result.events.size()));
}

TEST_CASE("count report round trip") {
  DetectionStream stream;
  stream.geometry = kGeom;
  stream.frames.push_back({0, {box_at(900.0)}});
  stream.frames.push_back({8, {box_at(1100.0)}});
  const auto result = run(stream, equator_track(), wide_band());
  REQUIRE(result.total == 2);

  std::ostringstream out;
  write_report(result, out);
  std::istringstream in(out.str());
  auto loaded = read_report(in);
  CHECK(loaded.total == result.total);
  REQUIRE(loaded.events.size() == result.events.size());
  for (std::size_t i = 0; i < result.events.size(); ++i) {
    CHECK(loaded.events[i].frame == result.events[i].frame);
    CHECK(loaded.events[i].position.lat == result.events[i].position.lat);
    CHECK(loaded.events[i].position.lon == result.events[i].position.lon);
    CHECK(loaded.events[i].box.x == result.events[i].box.x);
    CHECK(loaded.events[i].box.w == result.events[i].box.w);
  }
  CHECK(loaded.per_frame_cumulative == result.per_frame_cumulative);

  recompute_event_times(loaded, kGeom.fps, 0.0, 0.0);
  for (std::size_t i = 0; i < result.events.size(); ++i) {
    CHECK(loaded.events[i].t == result.events[i].t);
  }
}

TEST_CASE("count report loader rejects inconsistent totals") {
  std::istringstream in(R"({"total":2,"events":[],"cumulative":[]})");
  CHECK_THROWS_AS(read_report(in), MalformedRecord);
  std::istringstream junk("[1,2,3]");
  CHECK_THROWS_AS(read_report(junk), MalformedRecord);
  std::istringstream notjson("x");
  CHECK_THROWS_AS(read_report(notjson), MalformedRecord);
}
