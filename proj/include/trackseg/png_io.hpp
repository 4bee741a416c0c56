#pragma once

#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trackseg/error.hpp"

namespace trackseg::io {

// Single-channel image as stored on disk: 8-bit gray, 16-bit gray or 8-bit
// palette indices. Values are raw samples, no gamma or palette expansion.
struct RawImage {
  std::size_t width = 0;
  std::size_t height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> values;
};

namespace detail {

struct PngErrorSink {
  char message[256] = {};
};

inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  if (sink) std::snprintf(sink->message, sizeof sink->message, "%s", msg);
  png_longjmp(png, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace detail

inline RawImage read_png(const std::filesystem::path& path) {
  detail::FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw FormatError(path.string() + ": cannot open");

  detail::PngErrorSink sink;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, detail::png_error_fn,
                                           detail::png_warning_fn);
  if (!png) throw FormatError(path.string() + ": out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (!info) throw FormatError(path.string() + ": out of memory");

  // Everything with a destructor is constructed before setjmp.
  RawImage image;
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    throw FormatError(path.string() + ": " + sink.message);
  }

  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  if ((color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color == PNG_COLOR_TYPE_PALETTE && depth < 8) png_set_packing(png);
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA &&
      color != PNG_COLOR_TYPE_PALETTE) {
    std::snprintf(sink.message, sizeof sink.message, "%s", "expected a single-channel image");
    png_longjmp(png, 1);
  }
  png_read_update_info(png, info);

  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * height);
  rows.resize(height);
  for (std::size_t y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  image.width = width;
  image.height = height;
  image.bit_depth = depth == 16 ? 16 : 8;
  image.values.resize(static_cast<std::size_t>(width) * height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      std::uint16_t v;
      if (image.bit_depth == 16) {
        v = static_cast<std::uint16_t>((rows[y][2 * x] << 8) | rows[y][2 * x + 1]);
      } else {
        v = rows[y][x];
      }
      image.values[y * width + x] = v;
    }
  }
  return image;
}

namespace detail {

// bytes: row-major samples already in PNG byte order, `depth` bits each.
inline void write_png_gray(const std::filesystem::path& path, std::size_t width,
                           std::size_t height, int depth, const png_byte* bytes) {
  detail::FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw FormatError(path.string() + ": cannot open for writing");

  detail::PngErrorSink sink;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, detail::png_error_fn,
                                            detail::png_warning_fn);
  if (!png) throw FormatError(path.string() + ": out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  if (!info) throw FormatError(path.string() + ": out of memory");

  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    throw FormatError(path.string() + ": " + sink.message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = width * static_cast<std::size_t>(depth / 8);
  for (std::size_t y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(bytes + y * stride);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
}

}  // namespace detail

inline void write_png_gray8(const std::filesystem::path& path, std::size_t width,
                            std::size_t height, std::span<const std::uint8_t> pixels) {
  if (pixels.size() != width * height) throw InvalidArgument("write_png: size mismatch");
  detail::write_png_gray(path, width, height, 8, pixels.data());
}

inline void write_png_gray16(const std::filesystem::path& path, std::size_t width,
                             std::size_t height, std::span<const std::uint16_t> pixels) {
  if (pixels.size() != width * height) throw InvalidArgument("write_png: size mismatch");
  std::vector<png_byte> bytes(pixels.size() * 2);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    bytes[2 * i] = static_cast<png_byte>(pixels[i] >> 8);
    bytes[2 * i + 1] = static_cast<png_byte>(pixels[i] & 0xff);
  }
  detail::write_png_gray(path, width, height, 16, bytes.data());
}

}  // namespace trackseg::io
