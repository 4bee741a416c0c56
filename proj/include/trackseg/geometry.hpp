#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "trackseg/error.hpp"
#include "trackseg/grid.hpp"

namespace trackseg {

// Exact non-negative rational num / den. Overlap measures are computed as
// integer pixel counts and only turned into a double at the very end, so two
// ratios compare equal exactly when the underlying fractions are equal.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const noexcept {
    return static_cast<double>(num) / static_cast<double>(den);
  }

  friend bool operator==(const Ratio& a, const Ratio& b) noexcept {
    return static_cast<unsigned __int128>(a.num) * b.den ==
           static_cast<unsigned __int128>(b.num) * a.den;
  }

  friend std::strong_ordering operator<=>(const Ratio& a, const Ratio& b) noexcept {
    return static_cast<unsigned __int128>(a.num) * b.den <=>
           static_cast<unsigned __int128>(b.num) * a.den;
  }
};

// Half-open pixel rectangle [x_min, x_max) x [y_min, y_max). A BBox is never
// empty; "no box" is spelled std::optional<BBox>.
class BBox {
 public:
  BBox(std::int64_t x_min, std::int64_t y_min, std::int64_t x_max, std::int64_t y_max)
      : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {
    if (x_min < 0 || y_min < 0 || x_min >= x_max || y_min >= y_max) {
      throw InvalidArgument("invalid box (" + std::to_string(x_min) + "," +
                            std::to_string(y_min) + "," + std::to_string(x_max) + "," +
                            std::to_string(y_max) + ")");
    }
  }

  // Returns nullopt instead of throwing when the coordinates do not describe
  // a valid box.
  static std::optional<BBox> try_make(std::int64_t x_min, std::int64_t y_min,
                                      std::int64_t x_max, std::int64_t y_max) noexcept {
    if (x_min < 0 || y_min < 0 || x_min >= x_max || y_min >= y_max) return std::nullopt;
    return BBox(x_min, y_min, x_max, y_max);
  }

  std::int64_t x_min() const noexcept { return x_min_; }
  std::int64_t y_min() const noexcept { return y_min_; }
  std::int64_t x_max() const noexcept { return x_max_; }
  std::int64_t y_max() const noexcept { return y_max_; }
  std::int64_t width() const noexcept { return x_max_ - x_min_; }
  std::int64_t height() const noexcept { return y_max_ - y_min_; }
  std::uint64_t area() const noexcept {
    return static_cast<std::uint64_t>(width()) * static_cast<std::uint64_t>(height());
  }

  bool contains(std::int64_t x, std::int64_t y) const noexcept {
    return x >= x_min_ && x < x_max_ && y >= y_min_ && y < y_max_;
  }

  bool fits_in(std::size_t image_width, std::size_t image_height) const noexcept {
    return x_max_ <= static_cast<std::int64_t>(image_width) &&
           y_max_ <= static_cast<std::int64_t>(image_height);
  }

  BBox translated(std::int64_t dx, std::int64_t dy) const {
    return BBox(x_min_ + dx, y_min_ + dy, x_max_ + dx, y_max_ + dy);
  }

  bool operator==(const BBox&) const = default;

  friend std::ostream& operator<<(std::ostream& os, const BBox& b) {
    return os << '(' << b.x_min_ << ',' << b.y_min_ << ',' << b.x_max_ << ',' << b.y_max_
              << ')';
  }

 private:
  std::int64_t x_min_, y_min_, x_max_, y_max_;
};

inline std::uint64_t intersection_area(const BBox& a, const BBox& b) noexcept {
  const auto w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const auto h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (w <= 0 || h <= 0) return 0;
  return static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
}

inline std::optional<BBox> intersect(const BBox& a, const BBox& b) noexcept {
  return BBox::try_make(std::max(a.x_min(), b.x_min()), std::max(a.y_min(), b.y_min()),
                        std::min(a.x_max(), b.x_max()), std::min(a.y_max(), b.y_max()));
}

// Clips a box to [0, width) x [0, height); nullopt if nothing is left.
inline std::optional<BBox> clip_to_image(std::int64_t x_min, std::int64_t y_min,
                                         std::int64_t x_max, std::int64_t y_max,
                                         std::size_t width, std::size_t height) noexcept {
  const auto w = static_cast<std::int64_t>(width);
  const auto h = static_cast<std::int64_t>(height);
  return BBox::try_make(std::clamp<std::int64_t>(x_min, 0, w), std::clamp<std::int64_t>(y_min, 0, h),
                        std::clamp<std::int64_t>(x_max, 0, w), std::clamp<std::int64_t>(y_max, 0, h));
}

inline Ratio iou_ratio(const BBox& a, const BBox& b) noexcept {
  const auto inter = intersection_area(a, b);
  return Ratio{inter, a.area() + b.area() - inter};
}

inline double iou(const BBox& a, const BBox& b) noexcept { return iou_ratio(a, b).value(); }

// Tight box around all foreground pixels, nullopt for an empty mask.
inline std::optional<BBox> box_from_mask(const BinaryMask& mask) {
  std::size_t x0 = mask.width(), y0 = mask.height(), x1 = 0, y1 = 0;
  bool any = false;
  for (std::size_t y = 0; y < mask.height(); ++y) {
    for (std::size_t x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      any = true;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (!any) return std::nullopt;
  return BBox(static_cast<std::int64_t>(x0), static_cast<std::int64_t>(y0),
              static_cast<std::int64_t>(x1) + 1, static_cast<std::int64_t>(y1) + 1);
}

inline void require_box_in_image(const BBox& box, std::size_t width, std::size_t height,
                                 const char* what) {
  if (!box.fits_in(width, height)) {
    std::ostringstream os;
    os << what << ": box " << box << " lies outside the " << width << "x" << height
       << " image";
    throw InvalidArgument(os.str());
  }
}

// Set-IoU between the foreground of `mask` and the filled rectangle `box`.
inline Ratio mask_box_iou_ratio(const BinaryMask& mask, const BBox& box) {
  require_box_in_image(box, mask.width(), mask.height(), "mask_box_iou");
  std::uint64_t inside = 0;
  for (auto y = box.y_min(); y < box.y_max(); ++y) {
    const auto* row = &mask(0, static_cast<std::size_t>(y));
    for (auto x = box.x_min(); x < box.x_max(); ++x) inside += row[x] != 0;
  }
  const auto total = static_cast<std::uint64_t>(count_foreground(mask));
  return Ratio{inside, total + box.area() - inside};
}

inline double mask_box_iou(const BinaryMask& mask, const BBox& box) {
  return mask_box_iou_ratio(mask, box).value();
}

}  // namespace trackseg
