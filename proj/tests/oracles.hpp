#pragma once

// Brute-force reference implementations. Deliberately naive and independent
// of the library code paths they check.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "facegraph/gabor.hpp"
#include "facegraph/image.hpp"
#include "facegraph/imaging.hpp"

namespace oracle {

using facegraph::BinaryMask;
using facegraph::GrayPlane;
using facegraph::PixelFormat;
using facegraph::RasterImage;

inline BinaryMask random_mask(std::mt19937& rng, int w, int h, double density) {
  BinaryMask m(w, h, PixelFormat::Binary);
  std::bernoulli_distribution on(density);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.at(x, y) = on(rng) ? 1 : 0;
  return m;
}

inline bool pix(const BinaryMask& m, int x, int y) { return m.contains(x, y) && m.at(x, y) != 0; }

// Labels cells equal to `value` with an explicit stack; returns component count.
// With `skip_border` set, components touching the border are not counted.
inline int count_components(const BinaryMask& m, bool value, bool eight, bool skip_border) {
  const int w = m.width(), h = m.height();
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  int count = 0;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (seen[y0 * w + x0] || (m.at(x0, y0) != 0) != value) continue;
      bool touches = false;
      std::vector<std::pair<int, int>> stack{{x0, y0}};
      seen[y0 * w + x0] = 1;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        if (x == 0 || y == 0 || x == w - 1 || y == h - 1) touches = true;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0)) continue;
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (seen[ny * w + nx] || (m.at(nx, ny) != 0) != value) continue;
            seen[ny * w + nx] = 1;
            stack.push_back({nx, ny});
          }
        }
      }
      if (!(skip_border && touches)) ++count;
    }
  }
  return count;
}

inline int euler(const BinaryMask& m) {
  return count_components(m, true, true, false) - count_components(m, false, false, true);
}

inline BinaryMask erode(const BinaryMask& m, int side) {
  const int r = side / 2;
  BinaryMask out(m.width(), m.height(), PixelFormat::Binary);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool all = true;
      for (int dy = -r; dy <= r && all; ++dy)
        for (int dx = -r; dx <= r && all; ++dx) all = pix(m, x + dx, y + dy);
      out.at(x, y) = all ? 1 : 0;
    }
  return out;
}

inline BinaryMask dilate(const BinaryMask& m, int side) {
  const int r = side / 2;
  BinaryMask out(m.width(), m.height(), PixelFormat::Binary);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool any = false;
      for (int dy = -r; dy <= r && !any; ++dy)
        for (int dx = -r; dx <= r && !any; ++dx) any = pix(m, x + dx, y + dy);
      out.at(x, y) = any ? 1 : 0;
    }
  return out;
}

// Smallest t maximizing between-class variance for classes v < t and v >= t.
inline int otsu(const std::vector<std::uint8_t>& values) {
  int best_t = 0;
  double best = -1.0;
  for (int t = 1; t <= 255; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (auto v : values) {
      if (v < t) { ++n0; s0 += v; } else { ++n1; s1 += v; }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double d = s0 / n0 - s1 / n1;
    const double between = n0 * n1 * d * d;
    if (between > best + 1e-9 * std::max(1.0, best)) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}

// Evaluates the Gabor wavelet formula directly rather than reading the bank's sampled kernels,
// with the DC correction computed over the same square support.
inline std::complex<double> gabor_value(double k, double phi, double sigma, int radius, int ox, int oy) {
  const double kx = k * std::cos(phi), ky = k * std::sin(phi);
  auto raw = [&](int x, int y) {
    const double env = (k * k / (sigma * sigma)) * std::exp(-k * k * (x * x + y * y) / (2 * sigma * sigma));
    return env * (std::complex<double>(std::cos(kx * x + ky * y), std::sin(kx * x + ky * y)) -
                  std::exp(-sigma * sigma / 2));
  };
  std::complex<double> dc = 0.0;
  for (int y = -radius; y <= radius; ++y)
    for (int x = -radius; x <= radius; ++x) dc += raw(x, y);
  dc /= double((2 * radius + 1) * (2 * radius + 1));
  return raw(ox, oy) - dc;
}

// J_j(x) = Σ_o I(x − o) ψ_j(o) evaluated term by term.
inline std::vector<std::complex<double>> direct_jet(const GrayPlane& img, int px, int py,
                                                    const facegraph::GaborBank& bank) {
  std::vector<std::complex<double>> out;
  for (const auto& kern : bank.kernels()) {
    const double phi = std::atan2(kern.wave_vector.y(), kern.wave_vector.x());
    std::complex<double> acc = 0.0;
    for (int oy = -kern.radius; oy <= kern.radius; ++oy)
      for (int ox = -kern.radius; ox <= kern.radius; ++ox) {
        const double v = img(reflect101(py - oy, int(img.rows())), reflect101(px - ox, int(img.cols())));
        acc += v * gabor_value(kern.k, phi, bank.params().sigma, kern.radius, ox, oy);
      }
    out.push_back(acc);
  }
  return out;
}

// Broadband texture: a sum of randomly oriented sinusoids plus a little white noise.
inline GrayPlane texture(int w, int h, unsigned seed, int components = 24) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> angle(0, 2 * std::numbers::pi), freq(0.08, 1.2), amp(4, 14);
  GrayPlane p = GrayPlane::Constant(h, w, 128.0);
  for (int c = 0; c < components; ++c) {
    const double a = angle(rng), f = freq(rng), A = amp(rng), ph = angle(rng);
    const double fx = f * std::cos(a), fy = f * std::sin(a);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) p(y, x) += A * std::sin(fx * x + fy * y + ph);
  }
  std::normal_distribution<double> noise(0, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) p(y, x) = std::clamp(std::round(p(y, x) + noise(rng)), 0.0, 255.0);
  return p;
}

// I'(x, y) = I(x − sx, y − sy), edges replicated.
inline GrayPlane shift(const GrayPlane& img, int sx, int sy) {
  GrayPlane out(img.rows(), img.cols());
  for (int y = 0; y < img.rows(); ++y)
    for (int x = 0; x < img.cols(); ++x) {
      const int ux = std::clamp(x - sx, 0, int(img.cols()) - 1);
      const int uy = std::clamp(y - sy, 0, int(img.rows()) - 1);
      out(y, x) = img(uy, ux);
    }
  return out;
}

// Zero-mean NCC of the template against the window with top-left (u, v).
inline double ncc(const GrayPlane& img, const GrayPlane& tmpl, int u, int v) {
  const int th = int(tmpl.rows()), tw = int(tmpl.cols());
  double mi = 0, mt = 0;
  for (int y = 0; y < th; ++y)
    for (int x = 0; x < tw; ++x) { mi += img(v + y, u + x); mt += tmpl(y, x); }
  mi /= th * tw;
  mt /= th * tw;
  double num = 0, di = 0, dt = 0;
  for (int y = 0; y < th; ++y)
    for (int x = 0; x < tw; ++x) {
      const double a = img(v + y, u + x) - mi, b = tmpl(y, x) - mt;
      num += a * b; di += a * a; dt += b * b;
    }
  return (di <= 0 || dt <= 0) ? 0.0 : num / std::sqrt(di * dt);
}

}  // namespace oracle
