#include "facegraph/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "facegraph/error.hpp"

namespace facegraph {
namespace {

FaceTemplate finish_template(GrayPlane values) {
  FaceTemplate tmpl;
  tmpl.mean = values.mean();
  tmpl.values = values - tmpl.mean;
  const double stddev = std::sqrt(tmpl.values.square().mean());
  if (!(stddev > 1e-9)) throw Error(ErrorCode::DegenerateTemplate, "template has no contrast");
  return tmpl;
}

// Summed-area table with a leading zero row/column.
GrayPlane integral(const GrayPlane& plane) {
  GrayPlane sat = GrayPlane::Zero(plane.rows() + 1, plane.cols() + 1);
  for (Eigen::Index y = 0; y < plane.rows(); ++y) {
    double row = 0.0;
    for (Eigen::Index x = 0; x < plane.cols(); ++x) {
      row += plane(y, x);
      sat(y + 1, x + 1) = sat(y, x + 1) + row;
    }
  }
  return sat;
}

double box_sum(const GrayPlane& sat, Eigen::Index y, Eigen::Index x, Eigen::Index h, Eigen::Index w) {
  return sat(y + h, x + w) - sat(y, x + w) - sat(y + h, x) + sat(y, x);
}

}  // namespace

RasterImage FaceTemplate::to_image() const { return from_plane(values + mean); }

FaceTemplate build_average_template(std::span<const RasterImage> faces, int width, int height) {
  if (faces.empty()) throw Error(ErrorCode::InvalidInput, "average template needs at least one face");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidConfig, "template size must be positive");
  GrayPlane sum = GrayPlane::Zero(height, width);
  for (const RasterImage& face : faces) {
    const RasterImage gray = face.format() == PixelFormat::Gray8 ? face : to_grayscale(face);
    sum += to_plane(resample_bilinear(gray, width, height));
  }
  return finish_template(sum / static_cast<double>(faces.size()));
}

FaceTemplate template_from_image(const RasterImage& gray) {
  if (gray.format() != PixelFormat::Gray8) {
    throw Error(ErrorCode::FormatMismatch, "template image must be Gray8");
  }
  return finish_template(to_plane(gray));
}

GrayPlane ncc_map(const GrayPlane& image, const FaceTemplate& tmpl) {
  const Eigen::Index th = tmpl.height();
  const Eigen::Index tw = tmpl.width();
  if (th > image.rows() || tw > image.cols()) {
    throw Error(ErrorCode::InvalidConfig, "template larger than image");
  }
  const double n = static_cast<double>(th * tw);
  const double tmpl_norm = std::sqrt(tmpl.values.square().sum());
  const GrayPlane sat = integral(image);
  const GrayPlane sat_sq = integral(image.square());

  GrayPlane scores(image.rows() - th + 1, image.cols() - tw + 1);
  for (Eigen::Index v = 0; v < scores.rows(); ++v) {
    for (Eigen::Index u = 0; u < scores.cols(); ++u) {
      const double s = box_sum(sat, v, u, th, tw);
      const double ss = box_sum(sat_sq, v, u, th, tw);
      const double centered = ss - s * s / n;
      if (centered <= 1e-9 * n) {
        scores(v, u) = 0.0;
        continue;
      }
      // the template is zero-mean, so the window mean drops out of the numerator
      const double num = (tmpl.values * image.block(v, u, th, tw)).sum();
      scores(v, u) = std::clamp(num / (tmpl_norm * std::sqrt(centered)), -1.0, 1.0);
    }
  }
  return scores;
}

std::vector<FaceCandidate> match_template(const RasterImage& gray, const FaceTemplate& tmpl,
                                          double ncc_threshold, int max_peaks) {
  if (gray.format() != PixelFormat::Gray8) {
    throw Error(ErrorCode::FormatMismatch, "match_template expects Gray8 input");
  }
  GrayPlane scores = ncc_map(to_plane(gray), tmpl);
  const int half_w = tmpl.width() / 2;
  const int half_h = tmpl.height() / 2;
  constexpr double kSuppressed = -std::numeric_limits<double>::infinity();

  std::vector<FaceCandidate> candidates;
  while (static_cast<int>(candidates.size()) < max_peaks) {
    Eigen::Index v = 0, u = 0;
    const double peak = scores.maxCoeff(&v, &u);
    if (peak == kSuppressed || peak < ncc_threshold) break;

    FaceCandidate c;
    c.bbox = {static_cast<int>(u), static_cast<int>(v), static_cast<int>(u) + tmpl.width() - 1,
              static_cast<int>(v) + tmpl.height() - 1};
    c.center = {static_cast<int>(u) + half_w, static_cast<int>(v) + half_h};
    c.score = peak;
    candidates.push_back(std::move(c));

    const Eigen::Index y0 = std::max<Eigen::Index>(0, v - half_h);
    const Eigen::Index y1 = std::min<Eigen::Index>(scores.rows() - 1, v + half_h);
    const Eigen::Index x0 = std::max<Eigen::Index>(0, u - half_w);
    const Eigen::Index x1 = std::min<Eigen::Index>(scores.cols() - 1, u + half_w);
    scores.block(y0, x0, y1 - y0 + 1, x1 - x0 + 1).setConstant(kSuppressed);
  }
  return candidates;
}

RasterImage normalize_face(const RasterImage& gray, int width, int height) {
  const RasterImage g = gray.format() == PixelFormat::Gray8 ? gray : to_grayscale(gray);
  return stretch_to_full_range(resample_bilinear(g, width, height));
}

std::vector<FaceCandidate> extract_candidates(const RasterImage& src,
                                              std::vector<FaceCandidate> candidates,
                                              int face_width, int face_height) {
  const RasterImage gray = src.format() == PixelFormat::Gray8 ? src : to_grayscale(src);
  for (FaceCandidate& c : candidates) {
    const BBox inside{std::max(c.bbox.x0, 0), std::max(c.bbox.y0, 0),
                      std::min(c.bbox.x1, gray.width() - 1), std::min(c.bbox.y1, gray.height() - 1)};
    if (inside.empty()) throw Error(ErrorCode::OutOfBounds, "candidate box lies outside the image");
    if (!(inside == c.bbox)) {
      c.clipped = true;
      c.bbox = inside;
    }
    c.face = normalize_face(crop(gray, c.bbox), face_width, face_height);
  }
  return candidates;
}

}  // namespace facegraph
