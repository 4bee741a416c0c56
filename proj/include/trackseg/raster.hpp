#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "trackseg/error.hpp"
#include "trackseg/geometry.hpp"
#include "trackseg/grid.hpp"

namespace trackseg {

enum class Connectivity : int { four = 4, eight = 8 };

inline Connectivity connectivity_from_int(int n) {
  if (n == 4) return Connectivity::four;
  if (n == 8) return Connectivity::eight;
  throw InvalidArgument("connectivity must be 4 or 8, got " + std::to_string(n));
}

inline BinaryMask threshold(const GrayMap& map, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("threshold must lie in [0, 1]");
  BinaryMask out(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) {
    out[i] = static_cast<double>(map[i]) >= t ? 1 : 0;
  }
  return out;
}

struct ComponentInfo {
  std::uint64_t pixel_count = 0;
  BBox box{0, 0, 1, 1};

  bool operator==(const ComponentInfo&) const = default;
};

// Connected components of a binary mask. Labels run 1..count() in the raster
// order of each component's first pixel; 0 is background.
struct ComponentLabeling {
  Grid<std::int32_t> labels;
  std::vector<ComponentInfo> components;  // components[label - 1]

  std::size_t count() const noexcept { return components.size(); }
};

namespace detail {

class DisjointSet {
 public:
  std::int32_t make() {
    parent_.push_back(static_cast<std::int32_t>(parent_.size()));
    return parent_.back();
  }

  std::int32_t find(std::int32_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<std::int32_t> parent_;
};

}  // namespace detail

// Two-pass union-find labeling.
inline ComponentLabeling label_components(const BinaryMask& mask,
                                          Connectivity connectivity = Connectivity::eight) {
  const auto w = mask.width();
  const auto h = mask.height();
  Grid<std::int32_t> provisional(w, h, -1);
  detail::DisjointSet sets;

  const bool diagonal = connectivity == Connectivity::eight;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      std::int32_t label = -1;
      auto join = [&](std::size_t nx, std::size_t ny) {
        const auto n = provisional(nx, ny);
        if (n < 0) return;
        if (label < 0) {
          label = n;
        } else {
          sets.unite(label, n);
        }
      };
      if (x > 0) join(x - 1, y);
      if (y > 0) {
        join(x, y - 1);
        if (diagonal && x > 0) join(x - 1, y - 1);
        if (diagonal && x + 1 < w) join(x + 1, y - 1);
      }
      provisional(x, y) = label < 0 ? sets.make() : label;
    }
  }

  ComponentLabeling out{Grid<std::int32_t>(w, h, 0), {}};
  std::vector<std::int32_t> final_label;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto p = provisional(x, y);
      if (p < 0) continue;
      const auto root = static_cast<std::size_t>(sets.find(p));
      if (root >= final_label.size()) final_label.resize(root + 1, 0);
      auto& label = final_label[root];
      const auto xi = static_cast<std::int64_t>(x);
      const auto yi = static_cast<std::int64_t>(y);
      if (label == 0) {
        out.components.push_back({0, BBox(xi, yi, xi + 1, yi + 1)});
        label = static_cast<std::int32_t>(out.components.size());
      }
      out.labels(x, y) = label;
      auto& info = out.components[static_cast<std::size_t>(label - 1)];
      ++info.pixel_count;
      info.box = BBox(std::min(info.box.x_min(), xi), std::min(info.box.y_min(), yi),
                      std::max(info.box.x_max(), xi + 1), std::max(info.box.y_max(), yi + 1));
    }
  }
  return out;
}

// Sorted ids of components with at least one pixel inside `box`.
inline std::vector<std::int32_t> components_intersecting_box(const ComponentLabeling& labeling,
                                                             const BBox& box) {
  require_box_in_image(box, labeling.labels.width(), labeling.labels.height(),
                       "components_intersecting_box");
  std::vector<std::uint8_t> hit(labeling.count() + 1, 0);
  for (auto y = box.y_min(); y < box.y_max(); ++y) {
    for (auto x = box.x_min(); x < box.x_max(); ++x) {
      hit[static_cast<std::size_t>(
          labeling.labels(static_cast<std::size_t>(x), static_cast<std::size_t>(y)))] = 1;
    }
  }
  std::vector<std::int32_t> ids;
  for (std::size_t l = 1; l < hit.size(); ++l) {
    if (hit[l]) ids.push_back(static_cast<std::int32_t>(l));
  }
  return ids;
}

// Sorted ids of components sharing at least one pixel with `reference`.
inline std::vector<std::int32_t> components_intersecting_mask(
    const ComponentLabeling& labeling, const BinaryMask& reference) {
  require_same_shape(labeling.labels, reference, "components_intersecting_mask");
  std::vector<std::uint8_t> hit(labeling.count() + 1, 0);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (reference[i]) hit[static_cast<std::size_t>(labeling.labels[i])] = 1;
  }
  std::vector<std::int32_t> ids;
  for (std::size_t l = 1; l < hit.size(); ++l) {
    if (hit[l]) ids.push_back(static_cast<std::int32_t>(l));
  }
  return ids;
}

inline std::vector<std::int32_t> all_component_ids(const ComponentLabeling& labeling) {
  std::vector<std::int32_t> ids(labeling.count());
  std::iota(ids.begin(), ids.end(), 1);
  return ids;
}

inline BinaryMask mask_from_components(const ComponentLabeling& labeling,
                                       std::span<const std::int32_t> ids) {
  std::vector<std::uint8_t> keep(labeling.count() + 1, 0);
  for (auto id : ids) {
    if (id < 1 || static_cast<std::size_t>(id) > labeling.count()) {
      throw InvalidArgument("mask_from_components: unknown component id " + std::to_string(id));
    }
    keep[static_cast<std::size_t>(id)] = 1;
  }
  BinaryMask out(labeling.labels.width(), labeling.labels.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = keep[static_cast<std::size_t>(labeling.labels[i])];
  return out;
}

inline BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask_union");
  BinaryMask out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (a[i] | b[i]) ? 1 : 0;
  return out;
}

// Foreground of the union of the given boxes.
inline BinaryMask box_union_mask(std::size_t width, std::size_t height,
                                 std::span<const BBox> boxes) {
  BinaryMask out(width, height);
  for (const auto& box : boxes) {
    require_box_in_image(box, width, height, "box_union_mask");
    for (auto y = box.y_min(); y < box.y_max(); ++y) {
      for (auto x = box.x_min(); x < box.x_max(); ++x) {
        out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = 1;
      }
    }
  }
  return out;
}

}  // namespace trackseg
