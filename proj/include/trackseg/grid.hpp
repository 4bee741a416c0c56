#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trackseg/error.hpp"

namespace trackseg {

// Dense row-major 2-D raster. Pixel (x, y) lives at index y * width + x.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {
    if (width == 0 || height == 0) {
      throw InvalidArgument("grid dimensions must be positive, got " +
                            std::to_string(width) + "x" + std::to_string(height));
    }
  }

  Grid(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width == 0 || height == 0) {
      throw InvalidArgument("grid dimensions must be positive, got " +
                            std::to_string(width) + "x" + std::to_string(height));
    }
    if (data_.size() != width * height) {
      throw InvalidArgument("grid data size does not match dimensions");
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t x, std::size_t y) noexcept { return data_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const noexcept {
    return data_[y * width_ + x];
  }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

// Per-pixel foreground probability in [0, 1].
using GrayMap = Grid<float>;

// Per-pixel foreground flag, stored as 0 / 1.
using BinaryMask = Grid<std::uint8_t>;

// Per-pixel object id, 0 is background.
using IndexedMask = Grid<std::uint8_t>;

template <typename T, typename U>
void require_same_shape(const Grid<T>& a, const Grid<U>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                          " vs " + std::to_string(b.width()) + "x" +
                          std::to_string(b.height()) + ")");
  }
}

inline std::size_t count_foreground(const BinaryMask& mask) noexcept {
  std::size_t n = 0;
  for (auto v : mask) n += v != 0;
  return n;
}

}  // namespace trackseg
