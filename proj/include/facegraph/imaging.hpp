#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "facegraph/image.hpp"

namespace facegraph {

/// Dense gray plane used by the numeric stages (rows = y, cols = x).
using GrayPlane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Half-away-from-zero rounding, clamped to the byte range.
inline std::uint8_t round_to_byte(double v) {
  const double r = std::round(v);
  return static_cast<std::uint8_t>(r < 0.0 ? 0.0 : (r > 255.0 ? 255.0 : r));
}

struct ContrastParams {
  /// (input level, output level) knots. Empty means "derive a full-range
  /// stretch between the low and high luminance percentiles of the image".
  std::vector<std::pair<double, double>> breakpoints;
  /// Gray-level² luminance variance below which the image gets stretched.
  double variance_cutoff = 400.0;
  double low_percentile = 2.0;
  double high_percentile = 98.0;
};

/// Throws InvalidConfig unless knots start at input 0, end at input 255,
/// strictly increase in input, and stay inside [0, 255].
void validate_breakpoints(const std::vector<std::pair<double, double>>& breakpoints);

/// Evaluates the piecewise-linear map at one level (no rounding).
double piecewise_linear(const std::vector<std::pair<double, double>>& breakpoints, double level);

/// Knots {(0,0),(p_lo,0),(p_hi,255),(255,255)} from luminance percentiles;
/// collapses to the identity when the image has no spread.
std::vector<std::pair<double, double>> percentile_breakpoints(const RasterImage& img,
                                                               double low_percentile,
                                                               double high_percentile);

/// Population variance of the Gray8 projection.
double luminance_variance(const RasterImage& img);

RasterImage stretch_contrast(const RasterImage& img, const ContrastParams& params);
RasterImage normalize_illumination(const RasterImage& img, const ContrastParams& params);

RasterImage rgb_to_hsv(const RasterImage& img);
RasterImage hsv_to_rgb(const RasterImage& img);
RasterImage to_grayscale(const RasterImage& img);

/// Bilinear resampling with pixel-center alignment; edge samples clamp.
RasterImage resample_bilinear(const RasterImage& img, int width, int height);

/// Copies the part of `box` that lies inside the image.
RasterImage crop(const RasterImage& img, const BBox& box);

/// Linear stretch of a Gray8 image so its min maps to 0 and max to 255.
/// Constant images are returned unchanged.
RasterImage stretch_to_full_range(const RasterImage& gray);

GrayPlane to_plane(const RasterImage& gray);
RasterImage from_plane(const GrayPlane& plane);

/// Converts a Binary mask to a Gray8 image with 0/255 samples.
RasterImage mask_to_gray(const BinaryMask& mask);

}  // namespace facegraph
