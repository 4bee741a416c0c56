#pragma once

// On-disk layout of a video:
//
//   <root>/annotation.png            8-bit, pixel value = object id, 0 background
//   <root>/maps/<id>/<NNNNN>.png     8- or 16-bit gray, probability = v / (2^depth - 1)
//   <root>/maps/0/<NNNNN>.png        optional map shared by objects without their own
//   <root>/detections.json           per-frame detector output
//   <root>/gt/<NNNNN>.png            optional ground truth, indexed like annotation
//
// A run directory holds <NNNNN>.png indexed masks plus manifest.json.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "trackseg/error.hpp"
#include "trackseg/evalkit.hpp"
#include "trackseg/pipeline.hpp"
#include "trackseg/png_io.hpp"

namespace trackseg::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

using WarningSink = std::function<void(const std::string&)>;

inline std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu.png", index);
  return buf;
}

inline GrayMap read_map(const fs::path& path) {
  const auto raw = read_png(path);
  const float scale = raw.bit_depth == 16 ? 65535.0f : 255.0f;
  GrayMap map(raw.width, raw.height);
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = static_cast<float>(raw.values[i]) / scale;
  return map;
}

inline IndexedMask read_indexed(const fs::path& path) {
  const auto raw = read_png(path);
  if (raw.bit_depth != 8) throw FormatError(path.string() + ": indexed masks must be 8-bit");
  IndexedMask mask(raw.width, raw.height);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = static_cast<std::uint8_t>(raw.values[i]);
  return mask;
}

inline void write_indexed(const fs::path& path, const IndexedMask& mask) {
  write_png_gray8(path, mask.width(), mask.height(), mask.pixels());
}

// Maps are stored at 8 bits, value rounded to the nearest k / 255.
inline void write_map(const fs::path& path, const GrayMap& map) {
  std::vector<std::uint8_t> px(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(map[i], 0.0f, 1.0f) * 255.0f));
  }
  write_png_gray8(path, map.width(), map.height(), px);
}

// Number of frames in a directory of <NNNNN>.png files; they must run
// contiguously from 00000.
inline std::size_t count_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError(dir.string() + ": not a directory");
  std::vector<std::size_t> indices;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.size() != 9 || entry.path().extension() != ".png") continue;
    const auto stem = name.substr(0, 5);
    if (!std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
    indices.push_back(std::stoul(stem));
  }
  std::sort(indices.begin(), indices.end());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] != i) {
      throw FormatError(dir.string() + ": missing frame " + std::to_string(i) + " (" +
                        frame_file_name(i) + ")");
    }
  }
  if (indices.empty()) throw FormatError(dir.string() + ": no frames");
  return indices.size();
}

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed JSON: " + e.what());
  }
}

inline void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw FormatError(path.string() + ": write failed");
}

// Parses a detections document. Boxes are clipped to the image; boxes that
// vanish under clipping are dropped. Both are reported through `warn`.
inline std::vector<std::vector<Detection>> parse_detections(const json& doc, std::size_t frame_count,
                                                            std::size_t width, std::size_t height,
                                                            const std::string& origin,
                                                            const WarningSink& warn = {}) {
  const auto fail = [&](const std::string& msg) { return FormatError(origin + ": " + msg); };
  if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_array()) {
    throw fail("expected an object with a \"frames\" array");
  }
  std::vector<std::optional<std::vector<Detection>>> frames(frame_count);
  for (const auto& f : doc["frames"]) {
    if (!f.is_object() || !f.contains("index") || !f["index"].is_number_integer()) {
      throw fail("frame entry without an integer \"index\"");
    }
    const auto idx = f["index"].get<std::int64_t>();
    const auto where = "frame " + std::to_string(idx);
    if (idx < 0 || static_cast<std::size_t>(idx) >= frame_count) {
      throw fail(where + " is outside 0.." + std::to_string(frame_count - 1));
    }
    auto& slot = frames[static_cast<std::size_t>(idx)];
    if (slot) throw fail(where + " listed more than once");
    slot.emplace();
    if (!f.contains("detections")) continue;
    if (!f["detections"].is_array()) throw fail(where + ": \"detections\" must be an array");
    for (const auto& d : f["detections"]) {
      if (!d.is_object() || !d.contains("class_id") || !d["class_id"].is_number_integer() ||
          !d.contains("score") || !d["score"].is_number() || !d.contains("box") ||
          !d["box"].is_array() || d["box"].size() != 4) {
        throw fail(where + ": malformed detection " + d.dump());
      }
      std::int64_t c[4];
      for (int k = 0; k < 4; ++k) {
        if (!d["box"][k].is_number_integer()) throw fail(where + ": box coordinates must be integers");
        c[k] = d["box"][k].get<std::int64_t>();
      }
      Detection det{d["class_id"].get<std::int32_t>(),
                    d.contains("class_name") && d["class_name"].is_string()
                        ? d["class_name"].get<std::string>()
                        : std::string(),
                    d["score"].get<double>(), BBox(0, 0, 1, 1)};
      if (!(det.score >= 0.0 && det.score <= 1.0)) throw fail(where + ": score outside [0, 1]");
      const auto clipped = clip_to_image(c[0], c[1], c[2], c[3], width, height);
      const bool changed = !clipped || clipped->x_min() != c[0] || clipped->y_min() != c[1] ||
                           clipped->x_max() != c[2] || clipped->y_max() != c[3];
      if (changed && warn) {
        std::ostringstream os;
        os << origin << ": " << where << ": box [" << c[0] << ',' << c[1] << ',' << c[2] << ','
           << c[3] << "] " << (clipped ? "clipped to the image" : "dropped (empty after clipping)");
        warn(os.str());
      }
      if (!clipped) continue;
      det.box = *clipped;
      slot->push_back(std::move(det));
    }
  }
  std::vector<std::vector<Detection>> out;
  for (std::size_t t = 0; t < frame_count; ++t) {
    if (!frames[t]) throw fail("frame " + std::to_string(t) + " missing");
    out.push_back(std::move(*frames[t]));
  }
  return out;
}

inline json detections_to_json(const std::string& video,
                               const std::vector<std::vector<Detection>>& detections) {
  json frames = json::array();
  for (std::size_t t = 0; t < detections.size(); ++t) {
    json dets = json::array();
    for (const auto& d : detections[t]) {
      dets.push_back({{"class_id", d.class_id},
                      {"class_name", d.class_name},
                      {"score", d.score},
                      {"box", {d.box.x_min(), d.box.y_min(), d.box.x_max(), d.box.y_max()}}});
    }
    frames.push_back({{"index", t}, {"detections", std::move(dets)}});
  }
  return {{"video", video}, {"frames", std::move(frames)}};
}

inline bool is_video_dir(const fs::path& dir) {
  return fs::is_regular_file(dir / "detections.json") && fs::is_regular_file(dir / "annotation.png");
}

inline VideoInput load_video(const fs::path& root, const WarningSink& warn = {}) {
  const auto fail = [&](const std::string& msg) { return FormatError(root.string() + ": " + msg); };
  if (!fs::is_directory(root)) throw fail("not a directory");

  VideoInput input;
  input.name = root.filename().string();
  if (input.name.empty()) input.name = root.parent_path().filename().string();
  input.annotation = read_indexed(root / "annotation.png");
  const auto ids = object_ids(input.annotation);
  if (ids.empty()) throw FormatError((root / "annotation.png").string() + ": no annotated objects");

  const auto maps_root = root / "maps";
  std::optional<std::size_t> frame_count;
  for (auto id : ids) {
    fs::path dir = maps_root / std::to_string(id);
    if (!fs::is_directory(dir)) dir = maps_root / "0";
    if (!fs::is_directory(dir)) {
      throw fail("no maps for object " + std::to_string(id) + " (expected maps/" +
                 std::to_string(id) + "/ or maps/0/)");
    }
    const auto n = count_frames(dir);
    if (frame_count && *frame_count != n) {
      throw fail(dir.string() + " has " + std::to_string(n) + " frames, expected " +
                 std::to_string(*frame_count));
    }
    frame_count = n;
    auto& frames = input.maps[id];
    for (std::size_t t = 0; t < n; ++t) {
      const auto path = dir / frame_file_name(t);
      auto map = read_map(path);
      if (!map.same_shape(input.annotation)) {
        throw FormatError(path.string() + ": frame " + std::to_string(t) +
                          " size differs from annotation.png");
      }
      frames.push_back(std::move(map));
    }
  }

  const auto det_path = root / "detections.json";
  const auto doc = read_json(det_path);
  if (doc.contains("video") && doc["video"].is_string() && !doc["video"].get<std::string>().empty()) {
    input.name = doc["video"].get<std::string>();
  }
  input.detections =
      parse_detections(doc, *frame_count, input.width(), input.height(), det_path.string(), warn);
  validate(input);
  return input;
}

inline void save_video(const fs::path& root, const VideoInput& input,
                       const std::vector<IndexedMask>* ground_truth = nullptr) {
  validate(input);
  fs::create_directories(root);
  write_indexed(root / "annotation.png", input.annotation);
  for (const auto& [id, frames] : input.maps) {
    const auto dir = root / "maps" / std::to_string(id);
    fs::create_directories(dir);
    for (std::size_t t = 0; t < frames.size(); ++t) write_map(dir / frame_file_name(t), frames[t]);
  }
  write_json(root / "detections.json", detections_to_json(input.name, input.detections));
  if (ground_truth) {
    fs::create_directories(root / "gt");
    for (std::size_t t = 0; t < ground_truth->size(); ++t) {
      write_indexed(root / "gt" / frame_file_name(t), (*ground_truth)[t]);
    }
  }
}

// --- run manifest -----------------------------------------------------------

inline json config_to_json(const TrackerConfig& c) {
  return {{"t_bin", c.t_bin},
          {"iou_first_frame_min", c.iou_first_frame_min},
          {"iou_temporal", c.iou_temporal},
          {"max_coast", c.max_coast ? json(*c.max_coast) : json(nullptr)},
          {"connectivity", static_cast<int>(c.connectivity)},
          {"temporal_gate", c.temporal_gate}};
}

inline json config_to_json(const HysteresisConfig& c) {
  return {{"t_high", c.t_high},
          {"t_low", c.t_low},
          {"connectivity", static_cast<int>(c.connectivity)},
          {"clip_low_to_box", c.clip_low_to_box}};
}

inline TrackerConfig tracker_config_from_json(const json& j) {
  TrackerConfig c;
  c.t_bin = j.at("t_bin").get<double>();
  c.iou_first_frame_min = j.at("iou_first_frame_min").get<double>();
  c.iou_temporal = j.at("iou_temporal").get<double>();
  if (!j.at("max_coast").is_null()) c.max_coast = j.at("max_coast").get<std::uint32_t>();
  c.connectivity = connectivity_from_int(j.at("connectivity").get<int>());
  c.temporal_gate = j.at("temporal_gate").get<bool>();
  return c;
}

inline HysteresisConfig hysteresis_config_from_json(const json& j) {
  HysteresisConfig c;
  c.t_high = j.at("t_high").get<double>();
  c.t_low = j.at("t_low").get<double>();
  c.connectivity = connectivity_from_int(j.at("connectivity").get<int>());
  c.clip_low_to_box = j.at("clip_low_to_box").get<bool>();
  return c;
}

inline constexpr std::string_view kManifestFormat = "trackseg-run/1";

inline json manifest_to_json(const VideoResult& r, const std::string& video_path = {}) {
  json class_sets = json::object();
  for (const auto& [id, classes] : r.class_sets) class_sets[std::to_string(id)] = classes;
  json frames = json::array();
  for (std::size_t t = 0; t < r.records.size(); ++t) {
    json objects = json::array();
    for (const auto& rec : r.records[t]) {
      objects.push_back(
          {{"id", rec.object_id},
           {"box", rec.box ? json{rec.box->x_min(), rec.box->y_min(), rec.box->x_max(), rec.box->y_max()}
                           : json(nullptr)},
           {"selection", to_string(rec.kind)},
           {"lost", rec.lost}});
    }
    frames.push_back({{"index", t}, {"objects", std::move(objects)}});
  }
  return {{"format", kManifestFormat},
          {"video", r.video},
          {"video_path", video_path},
          {"mode", to_string(r.mode)},
          {"tracker", config_to_json(r.tracker)},
          {"hysteresis", config_to_json(r.hysteresis)},
          {"class_sets", std::move(class_sets)},
          {"frames", std::move(frames)}};
}

// Writes masks and manifest.json into `dir`, which is created if needed.
inline void save_result(const fs::path& dir, const VideoResult& r, const std::string& video_path = {}) {
  fs::create_directories(dir);
  for (std::size_t t = 0; t < r.masks.size(); ++t) write_indexed(dir / frame_file_name(t), r.masks[t]);
  write_json(dir / "manifest.json", manifest_to_json(r, video_path));
}

inline VideoResult load_result(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const auto m = read_json(manifest_path);
  try {
    if (m.at("format").get<std::string>() != kManifestFormat) {
      throw FormatError(manifest_path.string() + ": unsupported manifest format");
    }
    VideoResult r;
    r.video = m.at("video").get<std::string>();
    r.mode = pipeline_mode_from_string(m.at("mode").get<std::string>());
    r.tracker = tracker_config_from_json(m.at("tracker"));
    r.hysteresis = hysteresis_config_from_json(m.at("hysteresis"));
    for (const auto& [key, classes] : m.at("class_sets").items()) {
      r.class_sets[static_cast<ObjectId>(std::stoi(key))] = classes.get<std::vector<std::int32_t>>();
    }
    for (const auto& f : m.at("frames")) {
      std::vector<ObjectFrameRecord> recs;
      for (const auto& o : f.at("objects")) {
        ObjectFrameRecord rec;
        rec.object_id = o.at("id").get<ObjectId>();
        if (!o.at("box").is_null()) {
          const auto b = o.at("box").get<std::vector<std::int64_t>>();
          if (b.size() != 4) throw FormatError(manifest_path.string() + ": box needs 4 coordinates");
          rec.box = BBox(b[0], b[1], b[2], b[3]);
        }
        rec.kind = selection_kind_from_string(o.at("selection").get<std::string>());
        rec.lost = o.at("lost").get<bool>();
        recs.push_back(rec);
      }
      r.records.push_back(std::move(recs));
    }
    const auto n = count_frames(dir);
    if (n != r.records.size()) {
      throw FormatError(dir.string() + ": " + std::to_string(n) + " mask frames but manifest lists " +
                        std::to_string(r.records.size()));
    }
    for (std::size_t t = 0; t < n; ++t) r.masks.push_back(read_indexed(dir / frame_file_name(t)));
    return r;
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
}

// Everything needed to redo a run.
struct RunSpec {
  fs::path video_path;
  PipelineMode mode = PipelineMode::full;
  TrackerConfig tracker;
  HysteresisConfig hysteresis;
};

inline RunSpec run_spec_from_manifest(const fs::path& manifest_path) {
  const auto m = read_json(manifest_path);
  try {
    RunSpec spec;
    spec.video_path = m.at("video_path").get<std::string>();
    if (spec.video_path.empty()) throw FormatError(manifest_path.string() + ": no video_path recorded");
    spec.mode = pipeline_mode_from_string(m.at("mode").get<std::string>());
    spec.tracker = tracker_config_from_json(m.at("tracker"));
    spec.hysteresis = hysteresis_config_from_json(m.at("hysteresis"));
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
}

// --- evaluation -------------------------------------------------------------

inline VideoMasks load_mask_dir(const fs::path& dir, std::string name) {
  VideoMasks v{std::move(name), {}};
  const auto n = count_frames(dir);
  for (std::size_t t = 0; t < n; ++t) v.frames.push_back(read_indexed(dir / frame_file_name(t)));
  return v;
}

inline json report_to_json(const EvalReport& report) {
  json videos = json::array();
  for (const auto& v : report.videos) {
    json objects = json::array();
    for (const auto& o : v.objects) {
      json frames = json::array();
      for (const auto& f : o.frames) frames.push_back({{"index", f.frame}, {"j", f.j}});
      objects.push_back({{"id", o.object_id}, {"j_mean", o.mean}, {"frames", std::move(frames)}});
    }
    videos.push_back({{"name", v.name}, {"j_mean", v.mean}, {"objects", std::move(objects)}});
  }
  return {{"j_mean", report.j_mean}, {"exclude_last", report.exclude_last}, {"videos", std::move(videos)}};
}

}  // namespace trackseg::io
