#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace facegraph {

enum class PixelFormat { RGB8, HSVf, Gray8, Binary };

constexpr int channels(PixelFormat format) {
  return (format == PixelFormat::RGB8 || format == PixelFormat::HSVf) ? 3 : 1;
}

const char* format_name(PixelFormat format);

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Inclusive pixel bounding box.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool empty() const { return x1 < x0 || y1 < y0; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Row-major, channel-interleaved raster. 8-bit formats live in a byte
/// buffer; HSVf lives in a float buffer. Only one of the two is populated.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, PixelFormat format);

  int width() const { return width_; }
  int height() const { return height_; }
  PixelFormat format() const { return format_; }
  int channels() const { return facegraph::channels(format_); }
  bool empty() const { return width_ == 0 || height_ == 0; }
  std::size_t sample_count() const {
    return static_cast<std::size_t>(width_) * height_ * channels();
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<std::uint8_t> bytes() { return bytes_; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }
  std::span<float> floats() { return floats_; }
  std::span<const float> floats() const { return floats_; }

  std::uint8_t& at(int x, int y, int c = 0) { return bytes_[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return bytes_[index(x, y, c)]; }
  float& value(int x, int y, int c = 0) { return floats_[index(x, y, c)]; }
  float value(int x, int y, int c = 0) const { return floats_[index(x, y, c)]; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels() + c;
  }

  int width_ = 0;
  int height_ = 0;
  PixelFormat format_ = PixelFormat::Gray8;
  std::vector<std::uint8_t> bytes_;
  std::vector<float> floats_;
};

/// Binary raster (format Binary); samples are 0 or 1.
using BinaryMask = RasterImage;

}  // namespace facegraph
