#include "facegraph/gabor.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "facegraph/error.hpp"

namespace facegraph {
namespace {

int mirror(int idx, int n) {
  if (n == 1) return 0;
  while (idx < 0 || idx >= n) {
    if (idx < 0) idx = -idx;
    if (idx >= n) idx = 2 * (n - 1) - idx;
  }
  return idx;
}

void check_pair(const Jet& a, const Jet& b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw Error(ErrorCode::BankMismatch, "jets come from different filter banks");
  }
}

void check_bank(const Jet& a, const GaborBank& bank) {
  if (a.size() != bank.size()) throw Error(ErrorCode::BankMismatch, "jet size does not match bank");
}

double magnitude_norm(const Jet& jet) { return std::sqrt(jet.magnitude.square().sum()); }

GaborKernel sample_kernel(double sigma, int nu, int mu, int n_orient, int radius) {
  GaborKernel kernel;
  kernel.band = nu;
  kernel.orient = mu;
  kernel.k = wave_number(nu);
  const double phi = mu * std::numbers::pi / n_orient;
  kernel.wave_vector = {kernel.k * std::cos(phi), kernel.k * std::sin(phi)};
  kernel.radius = radius;

  const int side = 2 * radius + 1;
  const double k2 = kernel.k * kernel.k;
  const double s2 = sigma * sigma;
  const double dc = std::exp(-s2 / 2.0);
  kernel.real.resize(side, side);
  kernel.imag.resize(side, side);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const double ox = col - radius;
      const double oy = row - radius;
      const double envelope = k2 / s2 * std::exp(-k2 * (ox * ox + oy * oy) / (2.0 * s2));
      const double arg = kernel.wave_vector.x() * ox + kernel.wave_vector.y() * oy;
      kernel.real(row, col) = envelope * (std::cos(arg) - dc);
      kernel.imag(row, col) = envelope * std::sin(arg);
    }
  }
  // truncation leaves a small residual DC; remove it
  kernel.real -= kernel.real.mean();
  kernel.imag -= kernel.imag.mean();
  return kernel;
}

}  // namespace

GaborBank::GaborBank(const BankParams& params) : params_(params) {
  if (!(params.sigma > 0.0) || params.n_freq < 1 || params.n_orient < 1) {
    throw Error(ErrorCode::InvalidConfig, "Gabor bank needs sigma > 0 and at least one frequency and orientation");
  }
  if (params.radius < 0) throw Error(ErrorCode::InvalidConfig, "negative kernel radius");
  std::vector<int> bands;
  if (params.restrict_frequency) {
    if (params.n_freq < 3) throw Error(ErrorCode::InvalidConfig, "restricted bank needs the nu = 2 band");
    bands.push_back(2);
  } else {
    for (int nu = 0; nu < params.n_freq; ++nu) bands.push_back(nu);
  }
  for (int nu : bands) {
    const double k = wave_number(nu);
    int radius = params.radius;
    if (radius == 0) {
      radius = static_cast<int>(std::ceil(3.0 * params.sigma / k - 1e-9));
    } else if (radius < static_cast<int>(std::ceil(2.0 * params.sigma / k - 1e-9))) {
      throw Error(ErrorCode::InvalidConfig,
                  "kernel radius " + std::to_string(radius) + " cannot hold the envelope of band " + std::to_string(nu));
    }
    for (int mu = 0; mu < params.n_orient; ++mu) {
      kernels_.push_back(sample_kernel(params.sigma, nu, mu, params.n_orient, radius));
      max_radius_ = std::max(max_radius_, radius);
    }
  }
  wave_vectors_.resize(2, size());
  for (int j = 0; j < size(); ++j) wave_vectors_.col(j) = kernels_[j].wave_vector;
}

GaborBank make_bank(const BankParams& params) { return GaborBank(params); }

Jet extract_jet(const GrayPlane& image, Point pos, const GaborBank& bank) {
  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());
  if (pos.x < 0 || pos.y < 0 || pos.x >= w || pos.y >= h) {
    throw Error(ErrorCode::OutOfBounds,
                "jet position (" + std::to_string(pos.x) + ", " + std::to_string(pos.y) + ") outside image");
  }
  // flipped(i, j) = I(y + R − i, x + R − j), so that Σ flipped·ψ = Σ_o I(x − o) ψ(o)
  const int big = bank.max_radius();
  const int side = 2 * big + 1;
  Eigen::ArrayXXd flipped(side, side);
  for (int i = 0; i < side; ++i) {
    const int sy = mirror(pos.y + big - i, h);
    for (int j = 0; j < side; ++j) flipped(i, j) = image(sy, mirror(pos.x + big - j, w));
  }

  Jet jet;
  jet.position = pos;
  jet.magnitude.resize(bank.size());
  jet.phase.resize(bank.size());
  for (int j = 0; j < bank.size(); ++j) {
    const GaborKernel& kernel = bank.kernel(j);
    const int off = big - kernel.radius;
    const int ks = 2 * kernel.radius + 1;
    const auto patch = flipped.block(off, off, ks, ks);
    const double re = (patch * kernel.real).sum();
    const double im = (patch * kernel.imag).sum();
    jet.magnitude[j] = std::hypot(re, im);
    double phase = std::atan2(im, re);
    if (phase <= -std::numbers::pi) phase = std::numbers::pi;
    jet.phase[j] = phase;
  }
  return jet;
}

Jet extract_jet(const RasterImage& gray, Point pos, const GaborBank& bank) {
  if (gray.format() != PixelFormat::Gray8) {
    throw Error(ErrorCode::FormatMismatch, "extract_jet expects Gray8 input");
  }
  return extract_jet(to_plane(gray), pos, bank);
}

Jet normalize_jet(const Jet& jet) {
  const double norm = magnitude_norm(jet);
  if (!(norm > 0.0)) throw Error(ErrorCode::DegenerateJet, "cannot normalize an all-zero jet");
  Jet out = jet;
  out.magnitude /= norm;
  return out;
}

namespace {

double similarity_core(const Jet& a, const Jet& b, const Eigen::ArrayXd& phase_shift) {
  check_pair(a, b);
  const double na = magnitude_norm(a);
  const double nb = magnitude_norm(b);
  if (na <= kDegenerateJetNorm || nb <= kDegenerateJetNorm) {
    throw Error(ErrorCode::DegenerateJet, "jet has no texture response");
  }
  const double num = (a.magnitude * b.magnitude * (a.phase - b.phase - phase_shift).cos()).sum();
  return std::clamp(num / (na * nb), -1.0, 1.0);
}

}  // namespace

double jet_similarity(const Jet& a, const Jet& b, const Eigen::Vector2d& d, const GaborBank& bank) {
  check_bank(a, bank);
  const Eigen::ArrayXd shift = (d.transpose() * bank.wave_vectors()).transpose().array();
  return similarity_core(a, b, shift);
}

double jet_similarity(const Jet& a, const Jet& b) {
  return similarity_core(a, b, Eigen::ArrayXd::Zero(a.size()));
}

namespace {

// One linearized solve over the kernels selected by `use`: returns Γ⁻¹Φ via the adjugate,
// or nothing when the selected system is singular.
std::optional<Eigen::Vector2d> solve_step(const Eigen::ArrayXd& weight, const Eigen::ArrayXd& dphi,
                                          const Eigen::ArrayXd& kx, const Eigen::ArrayXd& ky,
                                          const Eigen::ArrayXd& use, Eigen::Vector2d* phase_grad = nullptr,
                                          Eigen::Matrix2d* gram = nullptr) {
  const Eigen::ArrayXd w = weight * use;
  const Eigen::Vector2d phi((w * kx * dphi).sum(), (w * ky * dphi).sum());
  Eigen::Matrix2d g;
  g << (w * kx * kx).sum(), (w * kx * ky).sum(), (w * ky * kx).sum(), (w * ky * ky).sum();
  if (phase_grad) *phase_grad = phi;
  if (gram) *gram = g;
  const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  const double scale = w.sum();
  if (!(std::fabs(det) > 1e-12 * scale * scale)) return std::nullopt;
  Eigen::Matrix2d adjugate;
  adjugate << g(1, 1), -g(1, 0), -g(0, 1), g(0, 0);
  return Eigen::Vector2d(adjugate * phi / det);
}

}  // namespace

Displacement estimate_displacement(const Jet& a, const Jet& b, const GaborBank& bank) {
  check_pair(a, b);
  check_bank(a, bank);
  const Eigen::ArrayXd weight = a.magnitude * b.magnitude;
  const Eigen::ArrayXd raw = a.phase - b.phase;
  const Eigen::ArrayXd kx = bank.wave_vectors().row(0).transpose().array();
  const Eigen::ArrayXd ky = bank.wave_vectors().row(1).transpose().array();
  Eigen::ArrayXi band(bank.size());
  for (int j = 0; j < bank.size(); ++j) band(j) = bank.kernel(j).band;

  Displacement out;
  const Eigen::ArrayXd all = Eigen::ArrayXd::Ones(bank.size());
  if (!solve_step(weight, wrap_phases(raw), kx, ky, all, &out.phase_grad, &out.gram)) {
    throw Error(ErrorCode::SingularSystem, "displacement system is singular");
  }

  // Coarse to fine: each pass adds the next higher band and re-solves around the current
  // estimate, so the coarse bands resolve the phase ambiguity of the fine ones.
  for (int nu = band.maxCoeff(); nu >= band.minCoeff(); --nu) {
    const Eigen::ArrayXd use = (band >= nu).cast<double>();
    const Eigen::ArrayXd residual = wrap_phases(raw - kx * out.d.x() - ky * out.d.y());
    if (const auto step = solve_step(weight, residual, kx, ky, use)) out.d += *step;
  }

  const double length = out.d.norm();
  if (length > kMaxDisplacement) {
    out.d *= kMaxDisplacement / length;
    out.clamped = true;
  }
  return out;
}

double jet_similarity_compensated(const Jet& a, const Jet& b, const GaborBank& bank) {
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  try {
    d = estimate_displacement(a, b, bank).d;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularSystem) throw;
  }
  return jet_similarity(a, b, d, bank);
}

}  // namespace facegraph
