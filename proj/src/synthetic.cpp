#include "facegraph/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "facegraph/imaging.hpp"

namespace facegraph::synthetic {
namespace {

// mt19937 output is fixed by the standard; distributions are not.
double uniform(std::mt19937& rng) { return (rng() >> 8) * (1.0 / 16777216.0); }

bool in_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
  const double u = (x - cx) / rx;
  const double v = (y - cy) / ry;
  return u * u + v * v <= 1.0;
}

struct Wave {
  double kx, ky, phase, amp;
};

}  // namespace

FaceStyle make_style(int index) {
  std::mt19937 rng(1000u + static_cast<std::uint32_t>(index) * 7919u);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * uniform(rng); };
  static constexpr std::array<std::array<int, 3>, 6> kSkins{{
      {225, 175, 145}, {205, 160, 120}, {235, 195, 165}, {190, 140, 110}, {215, 170, 125}, {228, 180, 158}}};
  FaceStyle s;
  s.seed = 77u + static_cast<std::uint32_t>(index) * 104729u;
  s.skin = kSkins[static_cast<std::size_t>(index) % kSkins.size()];
  const int iris_level = static_cast<int>(between(20, 60));
  s.iris = {iris_level + 10, iris_level, iris_level - 10 < 0 ? 0 : iris_level - 10};
  s.eye_spacing = between(34, 46);
  s.eye_y = between(50, 57);
  s.eye_rx = between(7, 10.5);
  s.eye_ry = between(4, 6);
  s.iris_r = between(3, 4.5);
  s.brow_gap = between(3, 7);
  s.brow_thickness = between(2, 4.5);
  s.nose_y = between(79, 87);
  s.nose_width = between(8, 14);
  s.mouth_y = between(98, 106);
  s.mouth_w = between(24, 40);
  s.mouth_h = between(6, 10);
  return s;
}

RasterImage solid(int width, int height, std::array<int, 3> rgb) {
  RasterImage img(width, height, PixelFormat::RGB8);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(rgb[c]);
    }
  }
  return img;
}

RenderedFace render_face(const FaceStyle& s, const Variation& var, int size) {
  const double scale = size / 128.0;
  const double cx = 64.0 * scale + var.dx;
  const double cy = 66.0 * scale + var.dy;
  const double face_rx = 51.2 * scale;
  const double face_ry = 60.0 * scale;

  std::mt19937 tex_rng(s.seed);
  std::vector<Wave> waves;
  for (int i = 0; i < 14; ++i) {
    const double k = (0.12 + 0.45 * uniform(tex_rng)) / scale;
    const double theta = std::numbers::pi * uniform(tex_rng);
    waves.push_back({k * std::cos(theta), k * std::sin(theta), 2.0 * std::numbers::pi * uniform(tex_rng),
                     0.5 + 0.5 * uniform(tex_rng)});
  }
  double amp_total = 0.0;
  for (const auto& w : waves) amp_total += w.amp;

  const double eye_l = cx - 0.5 * s.eye_spacing * scale;
  const double eye_r = cx + 0.5 * s.eye_spacing * scale;
  const double eye_y = cy + (s.eye_y - 66.0) * scale;
  const double nose_y = cy + (s.nose_y - 66.0) * scale;
  const double mouth_y = cy + (s.mouth_y - 66.0) * scale;

  RenderedFace out;
  out.rgb = solid(size, size, kBackground);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (!in_ellipse(x, y, cx, cy, face_rx, face_ry)) continue;
      // texture is attached to the face, so it moves with the translation
      const double lx = x - cx;
      const double ly = y - cy;
      double t = 0.0;
      for (const auto& w : waves) t += w.amp * std::sin(w.kx * lx + w.ky * ly + w.phase);
      const double shade = 1.0 + s.texture_amplitude * t / amp_total;
      std::array<double, 3> c{s.skin[0] * shade, s.skin[1] * shade, s.skin[2] * shade};

      for (const double ex : {eye_l, eye_r}) {
        const double brow_y = eye_y - (s.eye_ry + s.brow_gap + 0.5 * s.brow_thickness) * scale;
        if (in_ellipse(x, y, ex, brow_y, 1.15 * s.eye_rx * scale, 0.5 * s.brow_thickness * scale)) {
          c = {70, 45, 35};
        }
        if (in_ellipse(x, y, ex, eye_y, s.eye_rx * scale, s.eye_ry * scale)) c = {235, 235, 230};
        if (in_ellipse(x, y, ex, eye_y, s.iris_r * scale, s.iris_r * scale)) {
          c = {static_cast<double>(s.iris[0]), static_cast<double>(s.iris[1]), static_cast<double>(s.iris[2])};
        }
        if (in_ellipse(x, y, ex, eye_y, 0.45 * s.iris_r * scale, 0.45 * s.iris_r * scale)) c = {8, 8, 8};
      }
      // nose ridge shading and nostrils
      if (std::fabs(x - cx) <= 1.5 * scale && y > eye_y + 8 * scale && y < nose_y - 2 * scale) {
        for (auto& v : c) v *= 0.82;
      }
      for (const double sign : {-1.0, 1.0}) {
        if (in_ellipse(x, y, cx + sign * 0.5 * s.nose_width * scale, nose_y + 2.5 * scale, 2.2 * scale, 1.6 * scale)) {
          c = {80, 45, 40};
        }
      }
      if (in_ellipse(x, y, cx, mouth_y, 0.5 * s.mouth_w * scale, 0.5 * s.mouth_h * scale)) {
        c = std::fabs(y - mouth_y) <= 0.6 * scale ? std::array<double, 3>{90, 30, 30}
                                                  : std::array<double, 3>{160, 62, 62};
      }
      for (int ch = 0; ch < 3; ++ch) out.rgb.at(x, y, ch) = round_to_byte(c[ch]);
    }
  }

  std::mt19937 noise_rng(var.noise_seed * 2654435761u + 17u);
  for (auto& v : out.rgb.bytes()) {
    double level = v * var.gain;
    if (var.noise > 0.0) level += var.noise * (2.0 * uniform(noise_rng) - 1.0);
    v = round_to_byte(level);
  }

  out.fiducials[static_cast<int>(Fiducial::LeftIris)] = {eye_l, eye_y};
  out.fiducials[static_cast<int>(Fiducial::RightIris)] = {eye_r, eye_y};
  out.fiducials[static_cast<int>(Fiducial::NoseTip)] = {cx, nose_y};
  out.fiducials[static_cast<int>(Fiducial::UpperLipTip)] = {cx, mouth_y - 0.5 * s.mouth_h * scale};
  out.fiducials[static_cast<int>(Fiducial::ChinTip)] = {cx, cy + face_ry - 3.0 * scale};
  return out;
}

RasterImage compose_scene(int width, int height, const std::vector<std::pair<RasterImage, Point>>& tiles) {
  RasterImage scene = solid(width, height, kBackground);
  for (const auto& [tile, at] : tiles) {
    for (int y = 0; y < tile.height(); ++y) {
      for (int x = 0; x < tile.width(); ++x) {
        if (!scene.contains(at.x + x, at.y + y)) continue;
        for (int c = 0; c < 3; ++c) scene.at(at.x + x, at.y + y, c) = tile.at(x, y, c);
      }
    }
  }
  return scene;
}

}  // namespace facegraph::synthetic
