#include "facegraph/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "facegraph/error.hpp"

namespace facegraph {

const char* format_name(PixelFormat format) {
  switch (format) {
    case PixelFormat::RGB8: return "RGB8";
    case PixelFormat::HSVf: return "HSVf";
    case PixelFormat::Gray8: return "Gray8";
    case PixelFormat::Binary: return "Binary";
  }
  return "?";
}

RasterImage::RasterImage(int width, int height, PixelFormat format)
    : width_(width), height_(height), format_(format) {
  if (width < 0 || height < 0) throw Error(ErrorCode::InvalidInput, "negative raster size");
  if (format == PixelFormat::HSVf) {
    floats_.assign(sample_count(), 0.0f);
  } else {
    bytes_.assign(sample_count(), 0);
  }
}

namespace {

void require_format(const RasterImage& img, std::initializer_list<PixelFormat> allowed,
                    const char* op) {
  for (auto f : allowed) {
    if (img.format() == f) return;
  }
  throw Error(ErrorCode::FormatMismatch,
              std::string(op) + " does not accept " + format_name(img.format()) + " input");
}

std::array<std::size_t, 256> gray_histogram(const RasterImage& gray) {
  std::array<std::size_t, 256> hist{};
  for (auto v : gray.bytes()) ++hist[v];
  return hist;
}

int nearest_rank(const std::array<std::size_t, 256>& hist, std::size_t total, double percentile) {
  const auto rank = static_cast<std::size_t>(std::floor(percentile / 100.0 * (total - 1)));
  std::size_t seen = 0;
  for (int level = 0; level < 256; ++level) {
    seen += hist[level];
    if (seen > rank) return level;
  }
  return 255;
}

}  // namespace

void validate_breakpoints(const std::vector<std::pair<double, double>>& breakpoints) {
  if (breakpoints.size() < 2) {
    throw Error(ErrorCode::InvalidConfig, "contrast map needs at least two breakpoints");
  }
  if (breakpoints.front().first != 0.0 || breakpoints.back().first != 255.0) {
    throw Error(ErrorCode::InvalidConfig, "contrast map must span input levels 0..255");
  }
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    const auto [in, out] = breakpoints[i];
    if (in < 0.0 || in > 255.0 || out < 0.0 || out > 255.0) {
      throw Error(ErrorCode::InvalidConfig, "breakpoint outside [0, 255]");
    }
    if (i > 0 && !(in > breakpoints[i - 1].first)) {
      throw Error(ErrorCode::InvalidConfig, "breakpoints must strictly increase in input level");
    }
  }
}

double piecewise_linear(const std::vector<std::pair<double, double>>& breakpoints, double level) {
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    const auto [x0, y0] = breakpoints[i - 1];
    const auto [x1, y1] = breakpoints[i];
    if (level <= x1) {
      return y0 + (level - x0) * (y1 - y0) / (x1 - x0);
    }
  }
  return breakpoints.back().second;
}

std::vector<std::pair<double, double>> percentile_breakpoints(const RasterImage& img,
                                                               double low_percentile,
                                                               double high_percentile) {
  const RasterImage gray = img.format() == PixelFormat::Gray8 ? img : to_grayscale(img);
  const auto hist = gray_histogram(gray);
  const std::size_t total = gray.sample_count();
  if (total == 0) return {{0.0, 0.0}, {255.0, 255.0}};
  const int lo = nearest_rank(hist, total, low_percentile);
  const int hi = nearest_rank(hist, total, high_percentile);
  if (hi <= lo) return {{0.0, 0.0}, {255.0, 255.0}};
  std::vector<std::pair<double, double>> knots{{0.0, 0.0}};
  if (lo > 0) knots.emplace_back(lo, 0.0);
  if (hi < 255) knots.emplace_back(hi, 255.0);
  knots.emplace_back(255.0, 255.0);
  return knots;
}

double luminance_variance(const RasterImage& img) {
  const RasterImage gray = img.format() == PixelFormat::Gray8 ? img : to_grayscale(img);
  const auto samples = gray.bytes();
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (auto v : samples) {
    sum += v;
    sum_sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(samples.size());
  const double mean = sum / n;
  return std::max(0.0, sum_sq / n - mean * mean);
}

RasterImage stretch_contrast(const RasterImage& img, const ContrastParams& params) {
  require_format(img, {PixelFormat::RGB8, PixelFormat::Gray8}, "stretch_contrast");
  const auto knots = params.breakpoints.empty()
                         ? percentile_breakpoints(img, params.low_percentile, params.high_percentile)
                         : params.breakpoints;
  validate_breakpoints(knots);

  std::array<std::uint8_t, 256> lut{};
  for (int level = 0; level < 256; ++level) {
    lut[level] = round_to_byte(piecewise_linear(knots, level));
  }
  RasterImage out = img;
  for (auto& v : out.bytes()) v = lut[v];
  return out;
}

RasterImage normalize_illumination(const RasterImage& img, const ContrastParams& params) {
  if (img.empty()) throw Error(ErrorCode::InvalidInput, "normalize_illumination: empty image");
  require_format(img, {PixelFormat::RGB8, PixelFormat::Gray8}, "normalize_illumination");
  if (luminance_variance(img) >= params.variance_cutoff) return img;
  return stretch_contrast(img, params);
}

RasterImage rgb_to_hsv(const RasterImage& img) {
  require_format(img, {PixelFormat::RGB8}, "rgb_to_hsv");
  RasterImage out(img.width(), img.height(), PixelFormat::HSVf);
  const auto src = img.bytes();
  auto dst = out.floats();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const double r = src[i] / 255.0;
    const double g = src[i + 1] / 255.0;
    const double b = src[i + 2] / 255.0;
    const double hi = std::max({r, g, b});
    const double lo = std::min({r, g, b});
    const double delta = hi - lo;
    double h = 0.0;
    if (delta > 0.0) {
      if (hi == r) {
        h = (g - b) / delta;
      } else if (hi == g) {
        h = 2.0 + (b - r) / delta;
      } else {
        h = 4.0 + (r - g) / delta;
      }
      h /= 6.0;
      if (h < 0.0) h += 1.0;
      if (h >= 1.0) h -= 1.0;
    }
    auto hue = static_cast<float>(h);
    if (hue >= 1.0f) hue = 0.0f;
    dst[i] = hue;
    dst[i + 1] = static_cast<float>(hi > 0.0 ? delta / hi : 0.0);
    dst[i + 2] = static_cast<float>(hi);
  }
  return out;
}

RasterImage hsv_to_rgb(const RasterImage& img) {
  require_format(img, {PixelFormat::HSVf}, "hsv_to_rgb");
  RasterImage out(img.width(), img.height(), PixelFormat::RGB8);
  const auto src = img.floats();
  auto dst = out.bytes();
  for (std::size_t i = 0; i < src.size(); i += 3) {
    const double h6 = static_cast<double>(src[i]) * 6.0;
    const double s = src[i + 1];
    const double v = src[i + 2];
    const int sector = static_cast<int>(std::floor(h6)) % 6;
    const double f = h6 - std::floor(h6);
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    double r = v, g = v, b = v;
    switch (sector) {
      case 0: r = v; g = t; b = p; break;
      case 1: r = q; g = v; b = p; break;
      case 2: r = p; g = v; b = t; break;
      case 3: r = p; g = q; b = v; break;
      case 4: r = t; g = p; b = v; break;
      default: r = v; g = p; b = q; break;
    }
    dst[i] = round_to_byte(r * 255.0);
    dst[i + 1] = round_to_byte(g * 255.0);
    dst[i + 2] = round_to_byte(b * 255.0);
  }
  return out;
}

RasterImage to_grayscale(const RasterImage& img) {
  switch (img.format()) {
    case PixelFormat::Gray8:
      return img;
    case PixelFormat::HSVf:
      return to_grayscale(hsv_to_rgb(img));
    case PixelFormat::Binary:
      throw Error(ErrorCode::FormatMismatch, "to_grayscale does not accept Binary input");
    case PixelFormat::RGB8:
      break;
  }
  RasterImage out(img.width(), img.height(), PixelFormat::Gray8);
  const auto src = img.bytes();
  auto dst = out.bytes();
  for (std::size_t i = 0, j = 0; i < src.size(); i += 3, ++j) {
    dst[j] = round_to_byte(0.299 * src[i] + 0.587 * src[i + 1] + 0.114 * src[i + 2]);
  }
  return out;
}

RasterImage resample_bilinear(const RasterImage& img, int width, int height) {
  require_format(img, {PixelFormat::RGB8, PixelFormat::Gray8}, "resample_bilinear");
  if (img.empty() || width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidInput, "resample_bilinear: empty source or target");
  }
  if (width == img.width() && height == img.height()) return img;

  RasterImage out(width, height, img.format());
  const int nc = img.channels();
  const double sx_scale = static_cast<double>(img.width()) / width;
  const double sy_scale = static_cast<double>(img.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double sy = std::clamp((y + 0.5) * sy_scale - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fy = sy - y0;
    for (int x = 0; x < width; ++x) {
      const double sx = std::clamp((x + 0.5) * sx_scale - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double fx = sx - x0;
      for (int c = 0; c < nc; ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
        const double bottom = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
        out.at(x, y, c) = round_to_byte(top * (1.0 - fy) + bottom * fy);
      }
    }
  }
  return out;
}

RasterImage crop(const RasterImage& img, const BBox& box) {
  const BBox clipped{std::max(box.x0, 0), std::max(box.y0, 0), std::min(box.x1, img.width() - 1),
                     std::min(box.y1, img.height() - 1)};
  if (clipped.empty()) throw Error(ErrorCode::InvalidInput, "crop box does not intersect image");
  RasterImage out(clipped.width(), clipped.height(), img.format());
  const int nc = img.channels();
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      for (int c = 0; c < nc; ++c) {
        if (img.format() == PixelFormat::HSVf) {
          out.value(x, y, c) = img.value(clipped.x0 + x, clipped.y0 + y, c);
        } else {
          out.at(x, y, c) = img.at(clipped.x0 + x, clipped.y0 + y, c);
        }
      }
    }
  }
  return out;
}

RasterImage stretch_to_full_range(const RasterImage& gray) {
  require_format(gray, {PixelFormat::Gray8}, "stretch_to_full_range");
  const auto [lo, hi] = std::minmax_element(gray.bytes().begin(), gray.bytes().end());
  if (lo == gray.bytes().end() || *lo == *hi) return gray;
  const double lo_v = *lo;
  const double range = static_cast<double>(*hi) - lo_v;
  RasterImage out = gray;
  // multiply before dividing so exact half levels stay exact
  for (auto& v : out.bytes()) v = round_to_byte((v - lo_v) * 255.0 / range);
  return out;
}

GrayPlane to_plane(const RasterImage& gray) {
  require_format(gray, {PixelFormat::Gray8, PixelFormat::Binary}, "to_plane");
  GrayPlane plane(gray.height(), gray.width());
  for (int y = 0; y < gray.height(); ++y) {
    for (int x = 0; x < gray.width(); ++x) plane(y, x) = gray.at(x, y);
  }
  return plane;
}

RasterImage from_plane(const GrayPlane& plane) {
  RasterImage out(static_cast<int>(plane.cols()), static_cast<int>(plane.rows()),
                  PixelFormat::Gray8);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.at(x, y) = round_to_byte(plane(y, x));
  }
  return out;
}

RasterImage mask_to_gray(const BinaryMask& mask) {
  require_format(mask, {PixelFormat::Binary}, "mask_to_gray");
  RasterImage out(mask.width(), mask.height(), PixelFormat::Gray8);
  std::transform(mask.bytes().begin(), mask.bytes().end(), out.bytes().begin(),
                 [](std::uint8_t v) -> std::uint8_t { return v ? 255 : 0; });
  return out;
}

}  // namespace facegraph
