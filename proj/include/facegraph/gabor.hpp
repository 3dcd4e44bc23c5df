#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <vector>

#include "facegraph/image.hpp"
#include "facegraph/imaging.hpp"

namespace facegraph {

/// Largest displacement a single phase-based estimate is trusted for.
inline constexpr double kMaxDisplacement = 8.0;
/// Jets whose magnitude norm falls below this (gray-level units) carry no texture.
inline constexpr double kDegenerateJetNorm = 1e-6;

struct BankParams {
  double sigma = 2.0 * std::numbers::pi;
  int n_freq = 5;
  int n_orient = 8;
  /// Kernel half-size in pixels; 0 selects ceil(3σ/k_ν) per frequency band.
  int radius = 0;
  /// Keep only the ν = 2 band (|k| = π/4).
  bool restrict_frequency = false;

  friend bool operator==(const BankParams&, const BankParams&) = default;
};

/// k_ν = 2^(−(ν+2)/2)·π
inline double wave_number(int nu) { return std::pow(2.0, -(nu + 2) / 2.0) * std::numbers::pi; }

/// Wraps an angle into (−π, π].
template <typename Scalar>
Scalar wrap_phase(Scalar angle) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar r = std::fmod(angle + std::numbers::pi_v<Scalar>, two_pi);
  if (r <= Scalar(0)) r += two_pi;
  return r - std::numbers::pi_v<Scalar>;
}

template <typename Derived>
auto wrap_phases(const Eigen::ArrayBase<Derived>& angles) {
  return angles.unaryExpr([](typename Derived::Scalar a) { return wrap_phase<typename Derived::Scalar>(a); });
}

struct GaborKernel {
  int band = 0;     // ν
  int orient = 0;   // μ
  double k = 0.0;   // k_ν
  Eigen::Vector2d wave_vector;
  int radius = 0;
  // Sampled ψ(o) at offset o = (col − radius, row − radius).
  Eigen::ArrayXXd real;
  Eigen::ArrayXXd imag;
};

class GaborBank {
 public:
  explicit GaborBank(const BankParams& params = {});

  const BankParams& params() const { return params_; }
  const std::vector<GaborKernel>& kernels() const { return kernels_; }
  const GaborKernel& kernel(int j) const { return kernels_[j]; }
  int size() const { return static_cast<int>(kernels_.size()); }
  int max_radius() const { return max_radius_; }
  /// 2×size matrix of wave vectors k_j.
  const Eigen::Matrix2Xd& wave_vectors() const { return wave_vectors_; }

 private:
  BankParams params_;
  std::vector<GaborKernel> kernels_;
  Eigen::Matrix2Xd wave_vectors_;
  int max_radius_ = 0;
};

/// Kernels indexed j = μ + n_orient·ν (restricted banks keep only ν = 2).
/// Each kernel has its residual mean removed so the sampled support is DC-free.
GaborBank make_bank(const BankParams& params = {});

/// Complex filter responses at one position stored as magnitude and phase.
struct Jet {
  Eigen::ArrayXd magnitude;
  Eigen::ArrayXd phase;  // (−π, π]
  Point position;

  int size() const { return static_cast<int>(magnitude.size()); }
};

/// Filter responses at `pos`, with mirror padding outside the image.
Jet extract_jet(const GrayPlane& image, Point pos, const GaborBank& bank);
Jet extract_jet(const RasterImage& gray, Point pos, const GaborBank& bank);

Jet normalize_jet(const Jet& jet);

struct Displacement {
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  // Φ and Γ of the single-shot system over the whole bank at d = 0.
  Eigen::Vector2d phase_grad = Eigen::Vector2d::Zero();  // (Φx, Φy)
  Eigen::Matrix2d gram = Eigen::Matrix2d::Zero();        // Γ
  bool clamped = false;
};

/// Phase-sensitive similarity with displacement d:
/// Σ a a' cos(φ − φ' − d·k) / sqrt(Σa² Σa'²).
double jet_similarity(const Jet& a, const Jet& b, const Eigen::Vector2d& d, const GaborBank& bank);
/// Same with d = 0.
double jet_similarity(const Jet& a, const Jet& b);

/// Solves Γ d = Φ from magnitude-weighted wrapped phase differences.
/// Estimates longer than kMaxDisplacement are clamped and flagged.
/// Throws SingularSystem when Γ is (near) singular.
Displacement estimate_displacement(const Jet& a, const Jet& b, const GaborBank& bank);

/// jet_similarity at the estimated displacement; d = 0 if Γ is singular.
double jet_similarity_compensated(const Jet& a, const Jet& b, const GaborBank& bank);

}  // namespace facegraph
