#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trackseg/error.hpp"
#include "trackseg/geometry.hpp"
#include "trackseg/raster.hpp"

namespace trackseg {

using ObjectId = std::uint8_t;

// One proposal from the semantic detector.
struct Detection {
  std::int32_t class_id = 0;
  std::string class_name;
  double score = 0.0;
  BBox box{0, 0, 1, 1};

  bool operator==(const Detection&) const = default;
};

inline void validate(const Detection& d) {
  if (!(d.score >= 0.0 && d.score <= 1.0)) {
    throw InvalidArgument("detection score must lie in [0, 1], got " + std::to_string(d.score));
  }
}

struct TrackerConfig {
  double t_bin = 0.5;               // binarization of the appearance map
  double iou_first_frame_min = 0.3; // min GT overlap for a frame-0 detection
  double iou_temporal = 0.3;        // min IoU with the previous box
  std::optional<std::uint32_t> max_coast;  // nullopt: coast forever
  Connectivity connectivity = Connectivity::eight;
  bool temporal_gate = true;

  bool operator==(const TrackerConfig&) const = default;
};

inline void validate(const TrackerConfig& cfg) {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
    }
  };
  unit(cfg.t_bin, "t_bin");
  unit(cfg.iou_first_frame_min, "iou_first_frame_min");
  unit(cfg.iou_temporal, "iou_temporal");
}

// Per-object tracking memory. An empty class_set means the object was not
// matched by any detection on frame 0 and is followed through the appearance
// map alone.
struct TrackState {
  ObjectId object_id = 0;
  std::set<std::int32_t> class_set;
  BBox prev_box{0, 0, 1, 1};
  std::uint32_t coast_count = 0;

  bool uncategorized() const noexcept { return class_set.empty(); }
  bool operator==(const TrackState&) const = default;
};

enum class SelectionKind { none, initialized, detected, appearance_tracked, coasted };

inline std::string_view to_string(SelectionKind k) noexcept {
  switch (k) {
    case SelectionKind::none: return "none";
    case SelectionKind::initialized: return "initialized";
    case SelectionKind::detected: return "detected";
    case SelectionKind::appearance_tracked: return "appearance_tracked";
    case SelectionKind::coasted: return "coasted";
  }
  return "none";
}

inline SelectionKind selection_kind_from_string(std::string_view s) {
  for (auto k : {SelectionKind::none, SelectionKind::initialized, SelectionKind::detected,
                 SelectionKind::appearance_tracked, SelectionKind::coasted}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown selection kind '" + std::string(s) + "'");
}

struct Selection {
  TrackState state;
  BBox box;
  SelectionKind kind;
  bool lost = false;  // coasted for longer than max_coast
};

namespace detail {

// Index of the best detection among `candidates` by `score_of`, ties broken by
// higher detector score, then by earlier position.
template <typename ScoreFn>
std::optional<std::size_t> argmax_detection(std::span<const Detection> detections,
                                            std::span<const std::size_t> candidates,
                                            ScoreFn score_of) {
  std::optional<std::size_t> best;
  Ratio best_ratio;
  for (auto i : candidates) {
    const Ratio r = score_of(detections[i]);
    if (!best || r > best_ratio ||
        (r == best_ratio && detections[i].score > detections[*best].score)) {
      best = i;
      best_ratio = r;
    }
  }
  return best;
}

}  // namespace detail

// Frame-0 initialization: remember the class of the detection that best
// overlaps the annotation, or fall back to the annotation's own box.
inline TrackState init_track(std::span<const Detection> detections, const BinaryMask& gt_mask,
                             ObjectId object_id, const TrackerConfig& cfg) {
  validate(cfg);
  const auto gt_box = box_from_mask(gt_mask);
  if (!gt_box) {
    throw InvalidArgument("init_track: annotation of object " + std::to_string(object_id) +
                          " has no foreground pixels");
  }
  std::vector<std::size_t> all(detections.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto best = detail::argmax_detection(
      detections, all, [&](const Detection& d) { return mask_box_iou_ratio(gt_mask, d.box); });

  TrackState state{object_id, {}, *gt_box, 0};
  if (best && mask_box_iou(gt_mask, detections[*best].box) >= cfg.iou_first_frame_min) {
    state.class_set.insert(detections[*best].class_id);
    state.prev_box = detections[*best].box;
  }
  return state;
}

// Picks this frame's box for one object. Filters run class -> temporal ->
// appearance argmax; with nothing left the connected components of the
// binarized map touching the previous box take over, and failing that the
// previous box is carried forward.
inline Selection select_box(TrackState state, std::span<const Detection> detections,
                            const GrayMap& appearance, const TrackerConfig& cfg) {
  const BinaryMask fg = threshold(appearance, cfg.t_bin);

  if (!state.uncategorized()) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < detections.size(); ++i) {
      const auto& d = detections[i];
      if (!state.class_set.contains(d.class_id)) continue;
      if (cfg.temporal_gate && iou(d.box, state.prev_box) < cfg.iou_temporal) continue;
      candidates.push_back(i);
    }
    const auto winner = detail::argmax_detection(
        detections, candidates, [&](const Detection& d) { return mask_box_iou_ratio(fg, d.box); });
    if (winner) {
      state.prev_box = detections[*winner].box;
      state.coast_count = 0;
      return {state, state.prev_box, SelectionKind::detected, false};
    }
  }

  const auto labeling = label_components(fg, cfg.connectivity);
  const auto touching = components_intersecting_box(labeling, state.prev_box);
  if (!touching.empty()) {
    state.prev_box = *box_from_mask(mask_from_components(labeling, touching));
    state.coast_count = 0;
    return {state, state.prev_box, SelectionKind::appearance_tracked, false};
  }

  ++state.coast_count;
  const bool lost = cfg.max_coast && state.coast_count > *cfg.max_coast;
  return {state, state.prev_box, SelectionKind::coasted, lost};
}

}  // namespace trackseg
