#pragma once

#include <optional>
#include <span>
#include <vector>

#include "facegraph/image.hpp"

namespace facegraph {

/// Hue/saturation skin-chroma model. Channel values are normalized to [0, 1).
struct SkinModel {
  int bin_count = 64;
  std::vector<double> hue_hist;
  std::vector<double> sat_hist;
  double hue_mean = 0.0;
  double sat_mean = 0.0;
  double hue_dev = 0.0;
  double sat_dev = 0.0;
};

struct SkinModelParams {
  int bin_count = 64;
  /// deviation = fraction × peak value, per channel
  double deviation_fraction = 0.5;
};

/// Averages per-image H and S histograms over (optionally masked) pixels.
/// `masks` is either empty or aligned 1:1 with `training`.
SkinModel build_skin_model(std::span<const RasterImage> training, std::span<const BinaryMask> masks,
                           const SkinModelParams& params = {});

/// Circular distance between two normalized hues.
double hue_distance(double a, double b);

/// 1 where |H − hue_mean| ≤ band·hue_dev (circular) and |S − sat_mean| ≤ band·sat_dev.
BinaryMask classify_skin(const RasterImage& hsv, const SkinModel& model, double band = 2.0);

/// All-ones square structuring window with odd side ≥ 3.
struct StructuringWindow {
  int side = 3;
};

BinaryMask erode(const BinaryMask& mask, StructuringWindow window);
BinaryMask dilate(const BinaryMask& mask, StructuringWindow window);
BinaryMask open(const BinaryMask& mask, StructuringWindow window);

/// Sets every background pixel that is not 4-connected to the border.
BinaryMask fill_holes(const BinaryMask& mask);

struct CleanupParams {
  int small_window = 3;
  int large_window = 17;
};

/// open(small) → fill_holes → open(large).
BinaryMask cleanup(const BinaryMask& mask, const CleanupParams& params = {});

struct Region {
  int label = 0;
  std::vector<Point> pixels;
  BBox bbox;
  int area = 0;
  int euler = 1;
  int holes = 0;
};

/// 8-connected foreground labeling, largest region first.
std::vector<Region> connected_components(const BinaryMask& mask);

struct MaskTopology {
  int components = 0;  // 8-connected foreground
  int holes = 0;       // 4-connected background not touching the border
};

/// Flood-fill component and hole counts.
MaskTopology topology(const BinaryMask& mask);

/// Components minus holes, computed from 2×2 bit-quad counts on the
/// zero-padded mask (8-connected foreground).
int euler_number(const BinaryMask& mask);

struct AdaptiveThresholdParams {
  double ratio_critical = 4.0;
  double mean_fraction = 0.6;
};

/// Otsu threshold over byte samples: the smallest t maximizing between-class
/// variance, with classes {v < t} and {v ≥ t}.
int otsu_threshold(std::span<const std::uint8_t> values);

/// Re-binarizes one region of a gray image: mean/stddev > ratio_critical
/// gives threshold mean_fraction × mean, otherwise Otsu over region pixels.
BinaryMask adaptive_region_threshold(const RasterImage& gray, const Region& region,
                                     const AdaptiveThresholdParams& params = {});

/// Keeps regions whose re-binarization has Euler number < 0 (two or more
/// holes, i.e. the eyes). Returned regions carry the re-binarized euler/holes.
std::vector<Region> filter_face_regions(const std::vector<Region>& regions, const RasterImage& gray,
                                        const AdaptiveThresholdParams& params = {});

}  // namespace facegraph
