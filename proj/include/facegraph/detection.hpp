#pragma once

#include <span>
#include <vector>

#include "facegraph/image.hpp"
#include "facegraph/imaging.hpp"

namespace facegraph {

/// Zero-mean average face used for correlation.
struct FaceTemplate {
  GrayPlane values;  // zero-mean samples, rows = height
  double mean = 0.0;

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
  /// Restores the stored gray levels (values + mean) as a Gray8 image.
  RasterImage to_image() const;
};

struct FaceCandidate {
  BBox bbox;
  Point center;
  double score = 0.0;
  RasterImage face;      // Gray8, normalized size once extracted
  bool clipped = false;  // bbox extended past the source and was clipped
};

/// Resamples each crop to width×height, averages pixel-wise and removes the
/// mean. Throws InvalidInput on an empty list, DegenerateTemplate when the
/// average is constant.
FaceTemplate build_average_template(std::span<const RasterImage> faces, int width = 64,
                                    int height = 64);

/// Builds a template from stored gray levels (e.g. a template PNG).
FaceTemplate template_from_image(const RasterImage& gray);

/// Zero-mean normalized cross-correlation at every offset where the template
/// fits. Entry (v, u) is the score for top-left corner (u, v); windows with
/// no variance score 0.
GrayPlane ncc_map(const GrayPlane& image, const FaceTemplate& tmpl);

/// Repeatedly takes the global NCC maximum, records it, and suppresses a
/// template-sized neighborhood centered on it, until the peak falls below
/// `ncc_threshold` or `max_peaks` candidates exist.
std::vector<FaceCandidate> match_template(const RasterImage& gray, const FaceTemplate& tmpl,
                                          double ncc_threshold = 0.5, int max_peaks = 16);

/// Resample to width×height followed by a full-range contrast stretch.
RasterImage normalize_face(const RasterImage& gray, int width = 128, int height = 128);

/// Crops every candidate bbox from the grayscale source and stores the
/// normalized face. Boxes extending past the image are clipped and flagged.
std::vector<FaceCandidate> extract_candidates(const RasterImage& src,
                                              std::vector<FaceCandidate> candidates,
                                              int face_width = 128, int face_height = 128);

}  // namespace facegraph
