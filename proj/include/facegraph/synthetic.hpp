#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

#include "facegraph/graph.hpp"
#include "facegraph/image.hpp"

namespace facegraph::synthetic {

/// Person-specific geometry, colors and skin texture of a drawn face.
struct FaceStyle {
  std::uint32_t seed = 1;
  std::array<int, 3> skin{225, 175, 145};
  std::array<int, 3> iris{40, 30, 20};
  double eye_spacing = 40.0;
  double eye_y = 54.0;
  double eye_rx = 9.0;
  double eye_ry = 5.0;
  double iris_r = 4.0;
  double brow_gap = 5.0;
  double brow_thickness = 3.0;
  double nose_y = 84.0;
  double nose_width = 10.0;
  double mouth_y = 102.0;
  double mouth_w = 32.0;
  double mouth_h = 8.0;
  double texture_amplitude = 0.12;
};

/// Per-image variation of one person's face.
struct Variation {
  int dx = 0;
  int dy = 0;
  double gain = 1.0;
  double noise = 0.0;  // uniform ± gray levels per channel
  std::uint32_t noise_seed = 0;
};

struct RenderedFace {
  RasterImage rgb;
  std::array<Eigen::Vector2d, kNodeCount> fiducials;
};

inline constexpr std::array<int, 3> kBackground{30, 60, 190};

/// Deterministic style for person `index` (0-based).
FaceStyle make_style(int index);

/// Draws a size×size tile: blue background, skin ellipse whose width is
/// size/1.25, eyes with irises, brows, nostrils and lips.
RenderedFace render_face(const FaceStyle& style, const Variation& variation = {}, int size = 128);

/// Blue canvas with tiles pasted at the given top-left corners.
RasterImage compose_scene(int width, int height, const std::vector<std::pair<RasterImage, Point>>& tiles);

/// Uniform RGB image.
RasterImage solid(int width, int height, std::array<int, 3> rgb);

}  // namespace facegraph::synthetic
