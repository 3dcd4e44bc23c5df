#include "facegraph/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "facegraph/error.hpp"
#include "facegraph/imaging.hpp"

namespace facegraph {
namespace {

void require_binary(const BinaryMask& mask, const char* op) {
  if (mask.format() != PixelFormat::Binary) {
    throw Error(ErrorCode::FormatMismatch, std::string(op) + " expects a Binary mask");
  }
}

int bin_of(double v, int bins) {
  return std::clamp(static_cast<int>(std::floor(v * bins)), 0, bins - 1);
}

int peak_bin(const std::vector<double>& hist) {
  // first maximum wins ties
  return static_cast<int>(std::max_element(hist.begin(), hist.end()) - hist.begin());
}

void validate_window(const BinaryMask& mask, StructuringWindow window) {
  if (window.side < 3 || window.side % 2 == 0) {
    throw Error(ErrorCode::InvalidConfig, "structuring window side must be odd and >= 3");
  }
  if (window.side > std::min(mask.width(), mask.height())) {
    throw Error(ErrorCode::InvalidConfig, "structuring window larger than mask");
  }
}

enum class MorphOp { Erode, Dilate };

// One separable pass of a square window along rows (vertical = false) or
// columns. Out-of-bounds samples count as background.
BinaryMask morph_pass(const BinaryMask& in, int radius, MorphOp op, bool vertical) {
  BinaryMask out(in.width(), in.height(), PixelFormat::Binary);
  const int lines = vertical ? in.width() : in.height();
  const int len = vertical ? in.height() : in.width();
  std::vector<int> prefix(len + 1);
  for (int line = 0; line < lines; ++line) {
    auto sample = [&](int i) { return vertical ? in.at(line, i) : in.at(i, line); };
    for (int i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + sample(i);
    for (int i = 0; i < len; ++i) {
      const int lo = i - radius;
      const int hi = i + radius;
      std::uint8_t v = 0;
      if (op == MorphOp::Erode) {
        v = (lo >= 0 && hi < len && prefix[hi + 1] - prefix[lo] == 2 * radius + 1) ? 1 : 0;
      } else {
        v = (prefix[std::min(hi, len - 1) + 1] - prefix[std::max(lo, 0)] > 0) ? 1 : 0;
      }
      (vertical ? out.at(line, i) : out.at(i, line)) = v;
    }
  }
  return out;
}

BinaryMask morph(const BinaryMask& mask, StructuringWindow window, MorphOp op) {
  require_binary(mask, op == MorphOp::Erode ? "erode" : "dilate");
  validate_window(mask, window);
  const int radius = window.side / 2;
  return morph_pass(morph_pass(mask, radius, op, false), radius, op, true);
}

// Labels 4-connected background reachable from the border with 1 in `reached`.
std::vector<std::uint8_t> border_background(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> reached(static_cast<std::size_t>(w) * h, 0);
  std::vector<Point> stack;
  auto seed = [&](int x, int y) {
    const auto idx = static_cast<std::size_t>(y) * w + x;
    if (mask.at(x, y) == 0 && !reached[idx]) {
      reached[idx] = 1;
      stack.push_back({x, y});
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    if (p.x > 0) seed(p.x - 1, p.y);
    if (p.x + 1 < w) seed(p.x + 1, p.y);
    if (p.y > 0) seed(p.x, p.y - 1);
    if (p.y + 1 < h) seed(p.x, p.y + 1);
  }
  return reached;
}

// Flood-fills from `start` over pixels equal to `value`, marking `labels`.
template <typename Visit>
void flood(const BinaryMask& mask, std::vector<int>& labels, Point start, std::uint8_t value,
           int label, bool eight, Visit&& visit) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<Point> stack{start};
  labels[static_cast<std::size_t>(start.y) * w + start.x] = label;
  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    visit(p);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0)) continue;
        const int nx = p.x + dx;
        const int ny = p.y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        auto& l = labels[static_cast<std::size_t>(ny) * w + nx];
        if (l == 0 && mask.at(nx, ny) == value) {
          l = label;
          stack.push_back({nx, ny});
        }
      }
    }
  }
}

}  // namespace

SkinModel build_skin_model(std::span<const RasterImage> training, std::span<const BinaryMask> masks,
                           const SkinModelParams& params) {
  if (training.empty()) throw Error(ErrorCode::InvalidInput, "skin model needs at least one training image");
  if (params.bin_count < 2) throw Error(ErrorCode::InvalidConfig, "skin model needs at least two bins");
  if (!masks.empty() && masks.size() != training.size()) {
    throw Error(ErrorCode::AlignmentError, "mask count does not match training image count");
  }
  const int bins = params.bin_count;
  SkinModel model;
  model.bin_count = bins;
  model.hue_hist.assign(bins, 0.0);
  model.sat_hist.assign(bins, 0.0);

  int used = 0;
  for (std::size_t i = 0; i < training.size(); ++i) {
    const RasterImage& img = training[i];
    if (img.format() != PixelFormat::HSVf) {
      throw Error(ErrorCode::FormatMismatch, "skin model training images must be HSVf");
    }
    const BinaryMask* mask = masks.empty() ? nullptr : &masks[i];
    if (mask && (mask->width() != img.width() || mask->height() != img.height())) {
      throw Error(ErrorCode::AlignmentError, "mask size does not match training image " + std::to_string(i));
    }
    std::vector<double> hue(bins, 0.0);
    std::vector<double> sat(bins, 0.0);
    double count = 0.0;
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        if (mask && mask->at(x, y) == 0) continue;
        hue[bin_of(img.value(x, y, 0), bins)] += 1.0;
        sat[bin_of(img.value(x, y, 1), bins)] += 1.0;
        count += 1.0;
      }
    }
    if (count == 0.0) continue;
    for (int b = 0; b < bins; ++b) {
      model.hue_hist[b] += hue[b] / count;
      model.sat_hist[b] += sat[b] / count;
    }
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::InvalidInput, "no training pixels selected by the masks");

  const double hue_total = std::accumulate(model.hue_hist.begin(), model.hue_hist.end(), 0.0);
  const double sat_total = std::accumulate(model.sat_hist.begin(), model.sat_hist.end(), 0.0);
  for (auto& v : model.hue_hist) v /= hue_total;
  for (auto& v : model.sat_hist) v /= sat_total;

  model.hue_mean = (peak_bin(model.hue_hist) + 0.5) / bins;
  model.sat_mean = (peak_bin(model.sat_hist) + 0.5) / bins;
  model.hue_dev = params.deviation_fraction * model.hue_mean;
  model.sat_dev = params.deviation_fraction * model.sat_mean;
  if (!(model.hue_dev > 0.0) || !(model.sat_dev > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "deviation fraction must be positive");
  }
  return model;
}

double hue_distance(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

BinaryMask classify_skin(const RasterImage& hsv, const SkinModel& model, double band) {
  if (hsv.format() != PixelFormat::HSVf) {
    throw Error(ErrorCode::FormatMismatch, "classify_skin expects HSVf input");
  }
  if (!(model.hue_dev > 0.0) || !(model.sat_dev > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "skin model deviations must be positive");
  }
  BinaryMask mask(hsv.width(), hsv.height(), PixelFormat::Binary);
  const double hue_band = band * model.hue_dev;
  const double sat_band = band * model.sat_dev;
  for (int y = 0; y < hsv.height(); ++y) {
    for (int x = 0; x < hsv.width(); ++x) {
      const double h = hsv.value(x, y, 0);
      const double s = hsv.value(x, y, 1);
      const bool skin = hue_distance(h, model.hue_mean) <= hue_band &&
                        std::fabs(s - model.sat_mean) <= sat_band;
      mask.at(x, y) = skin ? 1 : 0;
    }
  }
  return mask;
}

BinaryMask erode(const BinaryMask& mask, StructuringWindow window) {
  return morph(mask, window, MorphOp::Erode);
}

BinaryMask dilate(const BinaryMask& mask, StructuringWindow window) {
  return morph(mask, window, MorphOp::Dilate);
}

BinaryMask open(const BinaryMask& mask, StructuringWindow window) {
  return dilate(erode(mask, window), window);
}

BinaryMask fill_holes(const BinaryMask& mask) {
  require_binary(mask, "fill_holes");
  const auto reached = border_background(mask);
  BinaryMask out = mask;
  auto samples = out.bytes();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] == 0 && !reached[i]) samples[i] = 1;
  }
  return out;
}

BinaryMask cleanup(const BinaryMask& mask, const CleanupParams& params) {
  require_binary(mask, "cleanup");
  if (std::min(mask.width(), mask.height()) < params.large_window) {
    throw Error(ErrorCode::InvalidConfig, "mask smaller than the large cleanup window");
  }
  const BinaryMask opened = open(mask, {params.small_window});
  return open(fill_holes(opened), {params.large_window});
}

MaskTopology topology(const BinaryMask& mask) {
  require_binary(mask, "topology");
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  MaskTopology topo;
  int next = 1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (labels[static_cast<std::size_t>(y) * w + x] != 0) continue;
      const std::uint8_t value = mask.at(x, y);
      bool touches_border = false;
      flood(mask, labels, {x, y}, value, next++, value == 1, [&](Point p) {
        if (p.x == 0 || p.y == 0 || p.x == w - 1 || p.y == h - 1) touches_border = true;
      });
      if (value == 1) {
        ++topo.components;
      } else if (!touches_border) {
        ++topo.holes;
      }
    }
  }
  return topo;
}

int euler_number(const BinaryMask& mask) {
  require_binary(mask, "euler_number");
  const int w = mask.width();
  const int h = mask.height();
  auto px = [&](int x, int y) -> int {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0 : mask.at(x, y);
  };
  long q1 = 0, q3 = 0, qd = 0;
  for (int y = -1; y < h; ++y) {
    for (int x = -1; x < w; ++x) {
      const int a = px(x, y), b = px(x + 1, y), c = px(x, y + 1), d = px(x + 1, y + 1);
      const int ones = a + b + c + d;
      if (ones == 1) {
        ++q1;
      } else if (ones == 3) {
        ++q3;
      } else if (ones == 2 && a == d) {
        ++qd;
      }
    }
  }
  return static_cast<int>((q1 - q3 - 2 * qd) / 4);
}

std::vector<Region> connected_components(const BinaryMask& mask) {
  require_binary(mask, "connected_components");
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  std::vector<Region> regions;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) == 0 || labels[static_cast<std::size_t>(y) * w + x] != 0) continue;
      Region region;
      region.label = static_cast<int>(regions.size()) + 1;
      region.bbox = {x, y, x, y};
      flood(mask, labels, {x, y}, 1, region.label, true, [&](Point p) {
        region.pixels.push_back(p);
        region.bbox.x0 = std::min(region.bbox.x0, p.x);
        region.bbox.y0 = std::min(region.bbox.y0, p.y);
        region.bbox.x1 = std::max(region.bbox.x1, p.x);
        region.bbox.y1 = std::max(region.bbox.y1, p.y);
      });
      std::sort(region.pixels.begin(), region.pixels.end(),
                [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      region.area = static_cast<int>(region.pixels.size());

      // Region alone, padded by one background pixel on every side.
      BinaryMask local(region.bbox.width() + 2, region.bbox.height() + 2, PixelFormat::Binary);
      for (const Point p : region.pixels) local.at(p.x - region.bbox.x0 + 1, p.y - region.bbox.y0 + 1) = 1;
      region.holes = topology(local).holes;
      region.euler = 1 - region.holes;
      regions.push_back(std::move(region));
    }
  }
  std::stable_sort(regions.begin(), regions.end(),
                   [](const Region& a, const Region& b) { return a.area > b.area; });
  return regions;
}

int otsu_threshold(std::span<const std::uint8_t> values) {
  std::array<double, 256> hist{};
  for (auto v : values) hist[v] += 1.0;
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  int best_t = 0;
  double best_var = -1.0;
  double below = 0.0;
  double sum_below = 0.0;
  // classes: {v < t} and {v >= t}
  for (int t = 0; t <= 256; ++t) {
    if (t > 0) {
      below += hist[t - 1];
      sum_below += (t - 1) * hist[t - 1];
    }
    const double above = total - below;
    if (below == 0.0 || above == 0.0) continue;
    const double mean_below = sum_below / below;
    const double mean_above = (sum_all - sum_below) / above;
    const double between = below * above * (mean_below - mean_above) * (mean_below - mean_above);
    if (between > best_var) {
      best_var = between;
      best_t = t;
    }
  }
  return best_t;
}

BinaryMask adaptive_region_threshold(const RasterImage& gray, const Region& region,
                                     const AdaptiveThresholdParams& params) {
  if (gray.format() != PixelFormat::Gray8) {
    throw Error(ErrorCode::FormatMismatch, "adaptive_region_threshold expects Gray8 input");
  }
  if (region.pixels.empty()) throw Error(ErrorCode::InvalidInput, "zero-area region");
  std::vector<std::uint8_t> values;
  values.reserve(region.pixels.size());
  for (const Point p : region.pixels) {
    if (!gray.contains(p.x, p.y)) throw Error(ErrorCode::OutOfBounds, "region pixel outside gray image");
    values.push_back(gray.at(p.x, p.y));
  }
  double sum = 0.0, sum_sq = 0.0;
  for (auto v : values) {
    sum += v;
    sum_sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(values.size());
  const double mean = sum / n;
  const double stddev = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
  const double ratio = stddev > 0.0 ? mean / stddev : std::numeric_limits<double>::infinity();
  const double threshold =
      ratio > params.ratio_critical ? params.mean_fraction * mean : otsu_threshold(values);

  BinaryMask out(gray.width(), gray.height(), PixelFormat::Binary);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Point p = region.pixels[i];
    out.at(p.x, p.y) = values[i] >= threshold ? 1 : 0;
  }
  return out;
}

std::vector<Region> filter_face_regions(const std::vector<Region>& regions, const RasterImage& gray,
                                        const AdaptiveThresholdParams& params) {
  std::vector<Region> kept;
  for (const Region& region : regions) {
    if (region.pixels.empty()) continue;
    const BinaryMask rebinarized = crop(adaptive_region_threshold(gray, region, params), region.bbox);
    const int e = euler_number(rebinarized);
    if (e >= 0) continue;
    Region face = region;
    face.euler = e;
    face.holes = topology(rebinarized).holes;
    kept.push_back(std::move(face));
  }
  return kept;
}

}  // namespace facegraph
