#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trackseg/error.hpp"
#include "trackseg/geometry.hpp"
#include "trackseg/hysteresis.hpp"
#include "trackseg/raster.hpp"
#include "trackseg/tracker.hpp"

namespace trackseg {

// Ablation modes, from plain thresholding of the appearance map up to the
// full tracker + hysteresis combination.
enum class PipelineMode { appearance, clip, clip_temporal, conncomp, full };

inline constexpr std::array<PipelineMode, 5> kAllModes = {
    PipelineMode::appearance, PipelineMode::clip, PipelineMode::clip_temporal,
    PipelineMode::conncomp, PipelineMode::full};

inline std::string_view to_string(PipelineMode m) noexcept {
  switch (m) {
    case PipelineMode::appearance: return "appearance";
    case PipelineMode::clip: return "clip";
    case PipelineMode::clip_temporal: return "clip_temporal";
    case PipelineMode::conncomp: return "conncomp";
    case PipelineMode::full: return "full";
  }
  return "appearance";
}

inline PipelineMode pipeline_mode_from_string(std::string_view s) {
  for (auto m : kAllModes) {
    if (to_string(m) == s) return m;
  }
  throw InvalidArgument("unknown pipeline mode '" + std::string(s) + "'");
}

inline bool uses_tracker(PipelineMode m) noexcept { return m != PipelineMode::appearance; }
inline bool uses_temporal_gate(PipelineMode m) noexcept {
  return m == PipelineMode::clip_temporal || m == PipelineMode::full;
}
inline bool uses_hysteresis(PipelineMode m) noexcept {
  return m == PipelineMode::conncomp || m == PipelineMode::full;
}

struct VideoInput {
  std::string name;
  IndexedMask annotation;                          // frame 0, pixel value = object id
  std::map<ObjectId, std::vector<GrayMap>> maps;   // per object, per frame
  std::vector<std::vector<Detection>> detections;  // per frame

  std::size_t frame_count() const noexcept { return detections.size(); }
  std::size_t width() const noexcept { return annotation.width(); }
  std::size_t height() const noexcept { return annotation.height(); }

  bool operator==(const VideoInput&) const = default;
};

inline std::vector<ObjectId> object_ids(const IndexedMask& annotation) {
  std::array<bool, 256> seen{};
  for (auto v : annotation) seen[v] = true;
  std::vector<ObjectId> ids;
  for (std::size_t id = 1; id < seen.size(); ++id) {
    if (seen[id]) ids.push_back(static_cast<ObjectId>(id));
  }
  return ids;
}

inline BinaryMask object_mask(const IndexedMask& indexed, ObjectId id) {
  BinaryMask out(indexed.width(), indexed.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = indexed[i] == id ? 1 : 0;
  return out;
}

inline void validate(const VideoInput& input) {
  const auto where = [&](const std::string& msg) {
    return InvalidArgument("video '" + input.name + "': " + msg);
  };
  if (input.annotation.empty()) throw where("missing frame-0 annotation");
  const auto ids = object_ids(input.annotation);
  if (ids.empty()) throw where("no annotated objects");
  if (input.frame_count() == 0) throw where("no frames");
  for (auto id : ids) {
    if (!input.maps.contains(id)) throw where("no appearance maps for object " + std::to_string(id));
  }
  for (const auto& [id, frames] : input.maps) {
    if (!std::binary_search(ids.begin(), ids.end(), id)) {
      throw where("appearance maps given for unannotated object " + std::to_string(id));
    }
    if (frames.size() != input.frame_count()) {
      throw where("object " + std::to_string(id) + " has " + std::to_string(frames.size()) +
                  " maps for " + std::to_string(input.frame_count()) + " frames");
    }
    for (std::size_t t = 0; t < frames.size(); ++t) {
      if (!frames[t].same_shape(input.annotation)) {
        throw where("map of object " + std::to_string(id) + " at frame " + std::to_string(t) +
                    " does not match the annotation size");
      }
      for (auto v : frames[t]) {
        if (!(v >= 0.0f && v <= 1.0f)) {
          throw where("map value outside [0, 1] at frame " + std::to_string(t));
        }
      }
    }
  }
  for (std::size_t t = 0; t < input.frame_count(); ++t) {
    for (const auto& d : input.detections[t]) {
      validate(d);
      if (!d.box.fits_in(input.width(), input.height())) {
        throw where("detection box outside the image at frame " + std::to_string(t));
      }
    }
  }
}

struct ObjectFrameRecord {
  ObjectId object_id = 0;
  std::optional<BBox> box;
  SelectionKind kind = SelectionKind::none;
  bool lost = false;

  bool operator==(const ObjectFrameRecord&) const = default;
};

struct VideoResult {
  std::string video;
  PipelineMode mode = PipelineMode::full;
  TrackerConfig tracker;
  HysteresisConfig hysteresis;
  std::map<ObjectId, std::vector<std::int32_t>> class_sets;  // remembered on frame 0
  std::vector<IndexedMask> masks;                            // per frame
  std::vector<std::vector<ObjectFrameRecord>> records;       // per frame, ascending object id

  bool operator==(const VideoResult&) const = default;
};

// Resolves pixels claimed by several objects: the object whose own map is
// brightest there wins, remaining ties go to the lower id.
inline IndexedMask merge_object_masks(const std::map<ObjectId, BinaryMask>& masks,
                                      const std::map<ObjectId, const GrayMap*>& maps,
                                      std::size_t width, std::size_t height) {
  IndexedMask out(width, height);
  std::vector<float> best(width * height, -1.0f);
  for (const auto& [id, mask] : masks) {
    const GrayMap& map = *maps.at(id);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (mask[i] && map[i] > best[i]) {
        best[i] = map[i];
        out[i] = id;
      }
    }
  }
  return out;
}

// Runs one video through the selected mode. Frames are processed strictly in
// order since each frame's box selection depends on the previous one.
inline VideoResult process_video(const VideoInput& input, PipelineMode mode,
                                 TrackerConfig tracker_cfg, const HysteresisConfig& hyst_cfg) {
  validate(input);
  validate(tracker_cfg);
  validate(hyst_cfg);
  tracker_cfg.temporal_gate = uses_temporal_gate(mode);

  VideoResult result;
  result.video = input.name;
  result.mode = mode;
  result.tracker = tracker_cfg;
  result.hysteresis = hyst_cfg;

  const auto ids = object_ids(input.annotation);
  std::map<ObjectId, TrackState> states;
  std::vector<ObjectFrameRecord> first;
  for (auto id : ids) {
    if (uses_tracker(mode)) {
      auto state = init_track(input.detections[0], object_mask(input.annotation, id), id, tracker_cfg);
      result.class_sets[id].assign(state.class_set.begin(), state.class_set.end());
      first.push_back({id, state.prev_box, SelectionKind::initialized, false});
      states.emplace(id, std::move(state));
    } else {
      first.push_back({id, std::nullopt, SelectionKind::none, false});
    }
  }
  result.masks.push_back(input.annotation);
  result.records.push_back(std::move(first));

  for (std::size_t t = 1; t < input.frame_count(); ++t) {
    std::map<ObjectId, BinaryMask> masks;
    std::map<ObjectId, const GrayMap*> maps;
    std::vector<ObjectFrameRecord> records;
    for (auto id : ids) {
      const GrayMap& map = input.maps.at(id)[t];
      maps[id] = &map;
      if (!uses_tracker(mode)) {
        masks.emplace(id, threshold(map, tracker_cfg.t_bin));
        records.push_back({id, std::nullopt, SelectionKind::none, false});
        continue;
      }
      auto sel = select_box(states.at(id), input.detections[t], map, tracker_cfg);
      states.at(id) = sel.state;
      const std::array<BBox, 1> boxes{sel.box};
      if (uses_hysteresis(mode)) {
        masks.emplace(id, hysteresis_filter(map, boxes, hyst_cfg));
      } else {
        masks.emplace(id, threshold(bbox_clip(map, boxes), tracker_cfg.t_bin));
      }
      records.push_back({id, sel.box, sel.kind, sel.lost});
    }
    result.masks.push_back(merge_object_masks(masks, maps, input.width(), input.height()));
    result.records.push_back(std::move(records));
  }
  return result;
}

}  // namespace trackseg
