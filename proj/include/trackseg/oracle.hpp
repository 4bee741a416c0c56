#pragma once

// Reference pipeline built from the most naive means available: pixel sets,
// recursive flood fill and exhaustive argmax. It deliberately calls none of
// the geometry / raster / tracker / hysteresis routines so that it can serve
// as an independent check of process_video. Intended for small inputs only.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "trackseg/pipeline.hpp"

namespace trackseg::oracle {

// (y, x) so that std::set iterates in raster order.
using Pixel = std::pair<std::int64_t, std::int64_t>;
using PixelSet = std::set<Pixel>;

inline PixelSet pixels_at_least(const GrayMap& map, double t) {
  PixelSet out;
  for (std::size_t y = 0; y < map.height(); ++y) {
    for (std::size_t x = 0; x < map.width(); ++x) {
      if (static_cast<double>(map(x, y)) >= t) out.insert({static_cast<std::int64_t>(y), static_cast<std::int64_t>(x)});
    }
  }
  return out;
}

inline PixelSet pixels_with_value(const IndexedMask& mask, std::uint8_t value) {
  PixelSet out;
  for (std::size_t y = 0; y < mask.height(); ++y) {
    for (std::size_t x = 0; x < mask.width(); ++x) {
      if (mask(x, y) == value) out.insert({static_cast<std::int64_t>(y), static_cast<std::int64_t>(x)});
    }
  }
  return out;
}

inline PixelSet box_pixels(const BBox& b) {
  PixelSet out;
  for (auto y = b.y_min(); y < b.y_max(); ++y) {
    for (auto x = b.x_min(); x < b.x_max(); ++x) out.insert({y, x});
  }
  return out;
}

inline std::uint64_t count_common(const PixelSet& a, const PixelSet& b) {
  std::uint64_t n = 0;
  for (const auto& p : a) n += b.count(p);
  return n;
}

inline bool touches(const PixelSet& a, const PixelSet& b) { return count_common(a, b) > 0; }

inline PixelSet set_union(const PixelSet& a, const PixelSet& b) {
  PixelSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

struct Overlap {
  std::uint64_t inter = 0;
  std::uint64_t uni = 1;

  double value() const { return static_cast<double>(inter) / static_cast<double>(uni); }
  // a > b as fractions
  bool beats(const Overlap& o) const {
    return static_cast<unsigned __int128>(inter) * o.uni > static_cast<unsigned __int128>(o.inter) * uni;
  }
  bool ties(const Overlap& o) const {
    return static_cast<unsigned __int128>(inter) * o.uni == static_cast<unsigned __int128>(o.inter) * uni;
  }
};

inline Overlap set_iou(const PixelSet& a, const PixelSet& b) {
  const auto inter = count_common(a, b);
  return {inter, a.size() + b.size() - inter};
}

inline void flood(const PixelSet& fg, const Pixel& p, int connectivity, PixelSet& seen,
                  PixelSet& component) {
  if (!fg.count(p) || seen.count(p)) return;
  seen.insert(p);
  component.insert(p);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      if (connectivity == 4 && dx != 0 && dy != 0) continue;
      flood(fg, {p.first + dy, p.second + dx}, connectivity, seen, component);
    }
  }
}

// Components in raster order of their first pixel.
inline std::vector<PixelSet> components(const PixelSet& fg, int connectivity) {
  std::vector<PixelSet> out;
  PixelSet seen;
  for (const auto& p : fg) {
    if (seen.count(p)) continue;
    PixelSet comp;
    flood(fg, p, connectivity, seen, comp);
    out.push_back(std::move(comp));
  }
  return out;
}

inline BBox tight_box(const PixelSet& s) {
  std::int64_t x0 = INT64_MAX, y0 = INT64_MAX, x1 = -1, y1 = -1;
  for (const auto& [y, x] : s) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  return BBox(x0, y0, x1 + 1, y1 + 1);
}

// Best detection index among `candidates`, exhaustively, by overlap with
// `reference`; ties -> higher score -> earlier index.
inline std::optional<std::size_t> best_match(const std::vector<Detection>& dets,
                                             const std::vector<std::size_t>& candidates,
                                             const PixelSet& reference) {
  std::optional<std::size_t> best;
  Overlap best_overlap;
  for (auto i : candidates) {
    const auto o = set_iou(reference, box_pixels(dets[i].box));
    bool take = !best;
    if (!take) {
      take = o.beats(best_overlap) || (o.ties(best_overlap) && dets[i].score > dets[*best].score);
    }
    if (take) {
      best = i;
      best_overlap = o;
    }
  }
  return best;
}

struct NaiveTrack {
  std::set<std::int32_t> classes;
  BBox box{0, 0, 1, 1};
  std::uint32_t coast = 0;
};

inline VideoResult oracle_pipeline(const VideoInput& input, PipelineMode mode,
                                   TrackerConfig tcfg, const HysteresisConfig& hcfg) {
  validate(input);
  validate(tcfg);
  validate(hcfg);
  const bool tracked = mode != PipelineMode::appearance;
  const bool gated = mode == PipelineMode::clip_temporal || mode == PipelineMode::full;
  const bool hyst = mode == PipelineMode::conncomp || mode == PipelineMode::full;
  tcfg.temporal_gate = gated;
  const int tconn = tcfg.connectivity == Connectivity::four ? 4 : 8;
  const int hconn = hcfg.connectivity == Connectivity::four ? 4 : 8;

  VideoResult result;
  result.video = input.name;
  result.mode = mode;
  result.tracker = tcfg;
  result.hysteresis = hcfg;

  std::vector<ObjectId> ids;
  for (int v = 1; v < 256; ++v) {
    if (!pixels_with_value(input.annotation, static_cast<std::uint8_t>(v)).empty()) {
      ids.push_back(static_cast<ObjectId>(v));
    }
  }

  std::map<ObjectId, NaiveTrack> tracks;
  std::vector<ObjectFrameRecord> first;
  for (auto id : ids) {
    if (!tracked) {
      first.push_back({id, std::nullopt, SelectionKind::none, false});
      continue;
    }
    const PixelSet gt = pixels_with_value(input.annotation, id);
    const auto& dets = input.detections[0];
    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < dets.size(); ++i) all.push_back(i);
    NaiveTrack tr;
    tr.box = tight_box(gt);
    const auto best = best_match(dets, all, gt);
    if (best && set_iou(gt, box_pixels(dets[*best].box)).value() >= tcfg.iou_first_frame_min) {
      tr.classes.insert(dets[*best].class_id);
      tr.box = dets[*best].box;
    }
    result.class_sets[id] = std::vector<std::int32_t>(tr.classes.begin(), tr.classes.end());
    first.push_back({id, tr.box, SelectionKind::initialized, false});
    tracks[id] = tr;
  }
  result.masks.push_back(input.annotation);
  result.records.push_back(first);

  for (std::size_t t = 1; t < input.frame_count(); ++t) {
    std::map<ObjectId, PixelSet> claimed;
    std::vector<ObjectFrameRecord> records;
    for (auto id : ids) {
      const GrayMap& map = input.maps.at(id)[t];
      const PixelSet fg = pixels_at_least(map, tcfg.t_bin);
      if (!tracked) {
        claimed[id] = fg;
        records.push_back({id, std::nullopt, SelectionKind::none, false});
        continue;
      }

      NaiveTrack& tr = tracks[id];
      const auto& dets = input.detections[t];
      ObjectFrameRecord rec{id, std::nullopt, SelectionKind::coasted, false};
      bool done = false;
      if (!tr.classes.empty()) {
        std::vector<std::size_t> cands;
        const PixelSet prev = box_pixels(tr.box);
        for (std::size_t i = 0; i < dets.size(); ++i) {
          if (!tr.classes.count(dets[i].class_id)) continue;
          if (gated && set_iou(box_pixels(dets[i].box), prev).value() < tcfg.iou_temporal) continue;
          cands.push_back(i);
        }
        if (const auto win = best_match(dets, cands, fg)) {
          tr.box = dets[*win].box;
          tr.coast = 0;
          rec.kind = SelectionKind::detected;
          done = true;
        }
      }
      if (!done) {
        const PixelSet prev = box_pixels(tr.box);
        PixelSet kept;
        for (const auto& comp : components(fg, tconn)) {
          if (touches(comp, prev)) kept = set_union(kept, comp);
        }
        if (!kept.empty()) {
          tr.box = tight_box(kept);
          tr.coast = 0;
          rec.kind = SelectionKind::appearance_tracked;
        } else {
          ++tr.coast;
          rec.lost = tcfg.max_coast.has_value() && tr.coast > *tcfg.max_coast;
        }
      }
      rec.box = tr.box;
      records.push_back(rec);

      const PixelSet inside = box_pixels(tr.box);
      PixelSet mask;
      if (hyst) {
        PixelSet strong;
        for (const auto& comp : components(pixels_at_least(map, hcfg.t_high), hconn)) {
          if (touches(comp, inside)) strong = set_union(strong, comp);
        }
        PixelSet weak_fg;
        for (const auto& p : pixels_at_least(map, hcfg.t_low)) {
          if (!hcfg.clip_low_to_box || inside.count(p)) weak_fg.insert(p);
        }
        mask = strong;
        for (const auto& comp : components(weak_fg, hconn)) {
          if (touches(comp, strong)) mask = set_union(mask, comp);
        }
      } else {
        // threshold of the map with everything outside the box set to zero
        for (std::size_t y = 0; y < map.height(); ++y) {
          for (std::size_t x = 0; x < map.width(); ++x) {
            const Pixel p{static_cast<std::int64_t>(y), static_cast<std::int64_t>(x)};
            const double v = inside.count(p) ? static_cast<double>(map(x, y)) : 0.0;
            if (v >= tcfg.t_bin) mask.insert(p);
          }
        }
      }
      claimed[id] = mask;
    }

    IndexedMask out(input.width(), input.height());
    for (std::size_t y = 0; y < out.height(); ++y) {
      for (std::size_t x = 0; x < out.width(); ++x) {
        const Pixel p{static_cast<std::int64_t>(y), static_cast<std::int64_t>(x)};
        std::optional<ObjectId> owner;
        float best = 0.0f;
        for (auto id : ids) {
          if (!claimed[id].count(p)) continue;
          const float v = input.maps.at(id)[t](x, y);
          if (!owner || v > best) {
            owner = id;
            best = v;
          }
        }
        if (owner) out(x, y) = *owner;
      }
    }
    result.masks.push_back(std::move(out));
    result.records.push_back(std::move(records));
  }
  return result;
}

}  // namespace trackseg::oracle
