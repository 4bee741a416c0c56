#pragma once

#include <span>
#include <vector>

#include "trackseg/error.hpp"
#include "trackseg/geometry.hpp"
#include "trackseg/raster.hpp"

namespace trackseg {

struct HysteresisConfig {
  double t_high = 0.8;
  double t_low = 0.4;
  Connectivity connectivity = Connectivity::eight;
  // Zero the weak mask outside the selected boxes before labeling it.
  bool clip_low_to_box = true;

  bool operator==(const HysteresisConfig&) const = default;
};

inline void validate(const HysteresisConfig& cfg) {
  if (!(cfg.t_low >= 0.0 && cfg.t_low <= cfg.t_high && cfg.t_high <= 1.0)) {
    throw InvalidArgument("hysteresis thresholds must satisfy 0 <= t_low <= t_high <= 1");
  }
}

// Two-pass strong/weak connected-component filter.
//
// Strong pass: components of map >= t_high that touch any box survive whole.
// Weak pass: components of map >= t_low (optionally restricted to the boxes)
// survive when they share a pixel with the strong result. The output is the
// union of both passes, so every output component is anchored by a strong
// pixel inside a box.
inline BinaryMask hysteresis_filter(const GrayMap& map, std::span<const BBox> boxes,
                                    const HysteresisConfig& cfg) {
  validate(cfg);
  if (boxes.empty()) throw InvalidArgument("hysteresis_filter: no boxes given");
  for (const auto& b : boxes) require_box_in_image(b, map.width(), map.height(), "hysteresis_filter");

  const auto strong_labels = label_components(threshold(map, cfg.t_high), cfg.connectivity);
  std::vector<std::int32_t> strong_ids;
  for (const auto& b : boxes) {
    const auto ids = components_intersecting_box(strong_labels, b);
    strong_ids.insert(strong_ids.end(), ids.begin(), ids.end());
  }
  const BinaryMask strong = mask_from_components(strong_labels, strong_ids);

  BinaryMask weak = threshold(map, cfg.t_low);
  if (cfg.clip_low_to_box) {
    const auto region = box_union_mask(map.width(), map.height(), boxes);
    for (std::size_t i = 0; i < weak.size(); ++i) weak[i] &= region[i];
  }
  const auto weak_labels = label_components(weak, cfg.connectivity);
  const auto kept = mask_from_components(weak_labels, components_intersecting_mask(weak_labels, strong));
  return mask_union(strong, kept);
}

// Zeroes the map outside the union of boxes.
inline GrayMap bbox_clip(const GrayMap& map, std::span<const BBox> boxes) {
  const auto region = box_union_mask(map.width(), map.height(), boxes);
  GrayMap out = map;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!region[i]) out[i] = 0.0f;
  }
  return out;
}

}  // namespace trackseg
