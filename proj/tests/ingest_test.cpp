#include "trackseg/ingest.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "trackseg/synth.hpp"

namespace trackseg {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("trackseg-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

synth::SyntheticSequence small_sequence(std::size_t frames = 3) {
  synth::SuiteParams p;
  p.frame_count = frames;
  p.width = 32;
  p.height = 24;
  p.distractors = 1;
  p.noise_sigma = 0.1;
  return synth::generate(synth::random_config(5, p));
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(IngestTest, VideoRoundTripsBitExactly) {
  TempDir dir;
  const auto seq = small_sequence();
  io::save_video(dir.path() / "v", seq.input, &seq.ground_truth);
  const auto loaded = io::load_video(dir.path() / "v");
  EXPECT_EQ(loaded, seq.input);
  EXPECT_EQ(loaded.frame_count(), 3u);
  EXPECT_EQ(io::load_mask_dir(dir.path() / "v" / "gt", "v").frames, seq.ground_truth);
}

TEST(IngestTest, MissingDetectionFrameIsNamed) {
  TempDir dir;
  const auto seq = small_sequence();
  const auto root = dir.path() / "v";
  io::save_video(root, seq.input);
  auto doc = io::read_json(root / "detections.json");
  doc["frames"].erase(1);
  io::write_json(root / "detections.json", doc);
  const auto msg = error_of([&] { io::load_video(root); });
  EXPECT_NE(msg.find("frame 1 missing"), std::string::npos) << msg;
}

TEST(IngestTest, DuplicateAndMalformedDetectionFrames) {
  const auto dup = io::json::parse(R"({"frames":[{"index":0,"detections":[]},{"index":0,"detections":[]}]})");
  EXPECT_THROW(io::parse_detections(dup, 1, 8, 8, "d"), FormatError);
  const auto bad_box = io::json::parse(
      R"({"frames":[{"index":0,"detections":[{"class_id":1,"score":0.5,"box":[0,0,2.5,3]}]}]})");
  EXPECT_THROW(io::parse_detections(bad_box, 1, 8, 8, "d"), FormatError);
  const auto bad_score = io::json::parse(
      R"({"frames":[{"index":0,"detections":[{"class_id":1,"score":1.5,"box":[0,0,2,3]}]}]})");
  EXPECT_THROW(io::parse_detections(bad_score, 1, 8, 8, "d"), FormatError);
  EXPECT_THROW(io::parse_detections(io::json::parse("[]"), 1, 8, 8, "d"), FormatError);
}

TEST(IngestTest, OutOfBoundsBoxesAreClippedOrDropped) {
  const auto doc = io::json::parse(R"({"video":"x","frames":[{"index":0,"detections":[
      {"class_id":1,"class_name":"a","score":0.5,"box":[-3,2,5,12]},
      {"class_id":2,"score":0.5,"box":[9,9,14,14]}]}]})");
  std::vector<std::string> warnings;
  const auto dets = io::parse_detections(doc, 1, 8, 10, "d", [&](const std::string& w) { warnings.push_back(w); });
  ASSERT_EQ(dets[0].size(), 1u);
  EXPECT_EQ(dets[0][0].box, BBox(0, 2, 5, 10));
  EXPECT_EQ(dets[0][0].class_name, "a");
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(IngestTest, EmptyAnnotationIsRejected) {
  TempDir dir;
  const auto seq = small_sequence();
  const auto root = dir.path() / "v";
  io::save_video(root, seq.input);
  io::write_indexed(root / "annotation.png", IndexedMask(32, 24));
  const auto msg = error_of([&] { io::load_video(root); });
  EXPECT_NE(msg.find("no annotated objects"), std::string::npos) << msg;
}

TEST(IngestTest, MissingMapFrameIsNamed) {
  TempDir dir;
  const auto seq = small_sequence(4);
  const auto root = dir.path() / "v";
  io::save_video(root, seq.input);
  fs::remove(root / "maps" / "1" / "00002.png");
  const auto msg = error_of([&] { io::load_video(root); });
  EXPECT_NE(msg.find("missing frame 2"), std::string::npos) << msg;
}

TEST(IngestTest, MapSizeMismatchIsNamed) {
  TempDir dir;
  const auto seq = small_sequence();
  const auto root = dir.path() / "v";
  io::save_video(root, seq.input);
  io::write_map(root / "maps" / "1" / "00001.png", GrayMap(10, 10));
  const auto msg = error_of([&] { io::load_video(root); });
  EXPECT_NE(msg.find("00001.png: frame 1"), std::string::npos) << msg;
}

TEST(IngestTest, SharedMapDirectoryServesAllObjects) {
  TempDir dir;
  const auto root = dir.path() / "v";
  fs::create_directories(root / "maps" / "0");
  IndexedMask ann(8, 8);
  ann(1, 1) = 1;
  ann(5, 5) = 2;
  io::write_indexed(root / "annotation.png", ann);
  GrayMap m(8, 8, 0.0f);
  m(1, 1) = 1.0f;
  io::write_map(root / "maps" / "0" / "00000.png", m);
  io::write_map(root / "maps" / "0" / "00001.png", m);
  io::write_json(root / "detections.json", io::json::parse(R"({"video":"shared","frames":[{"index":0},{"index":1}]})"));
  const auto v = io::load_video(root);
  EXPECT_EQ(v.name, "shared");
  ASSERT_EQ(v.maps.size(), 2u);
  EXPECT_EQ(v.maps.at(1), v.maps.at(2));
}

TEST(IngestTest, SixteenBitMapsUseFullScale) {
  TempDir dir;
  const std::vector<std::uint16_t> px{0, 65535, 32768, 1};
  io::write_png_gray16(dir.path() / "m.png", 2, 2, px);
  const auto m = io::read_map(dir.path() / "m.png");
  EXPECT_EQ(m[0], 0.0f);
  EXPECT_EQ(m[1], 1.0f);
  EXPECT_EQ(m[2], 32768.0f / 65535.0f);
  EXPECT_THROW(io::read_indexed(dir.path() / "m.png"), FormatError);
}

TEST(IngestTest, ResultRoundTripsAndManifestReproducesRun) {
  TempDir dir;
  const auto seq = small_sequence(5);
  const auto video = dir.path() / "v";
  io::save_video(video, seq.input);
  TrackerConfig tc;
  tc.t_bin = 0.45;
  tc.max_coast = 3;
  tc.connectivity = Connectivity::four;
  HysteresisConfig hc{0.7, 0.35, Connectivity::four, false};
  const auto r = process_video(io::load_video(video), PipelineMode::conncomp, tc, hc);
  io::save_result(dir.path() / "out", r, fs::absolute(video).string());
  EXPECT_EQ(io::load_result(dir.path() / "out"), r);

  const auto spec = io::run_spec_from_manifest(dir.path() / "out" / "manifest.json");
  EXPECT_EQ(spec.mode, PipelineMode::conncomp);
  EXPECT_EQ(spec.hysteresis, hc);
  const auto again = process_video(io::load_video(spec.video_path), spec.mode, spec.tracker, spec.hysteresis);
  EXPECT_EQ(again, r);
}

TEST(IngestTest, UnreadableFilesReportTheirPath) {
  TempDir dir;
  std::ofstream(dir.path() / "junk.png") << "not a png";
  const auto msg = error_of([&] { io::read_png(dir.path() / "junk.png"); });
  EXPECT_NE(msg.find("junk.png"), std::string::npos) << msg;
  EXPECT_THROW(io::read_png(dir.path() / "absent.png"), FormatError);
}

}  // namespace
}  // namespace trackseg
