#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "facegraph/error.hpp"
#include "facegraph/gabor.hpp"
#include "oracles.hpp"

using namespace facegraph;
using std::numbers::pi;

namespace {

const GaborBank& full_bank() {
  static const GaborBank bank;
  return bank;
}

const GaborBank& narrow_bank() {
  static const GaborBank bank([] {
    BankParams p;
    p.restrict_frequency = true;
    return p;
  }());
  return bank;
}

Jet make_jet(std::vector<double> magnitude, std::vector<double> phase) {
  Jet j;
  j.magnitude = Eigen::Map<Eigen::ArrayXd>(magnitude.data(), magnitude.size());
  j.phase = Eigen::Map<Eigen::ArrayXd>(phase.data(), phase.size());
  return j;
}

Jet random_jet(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> mag(0.1, 2.0), ph(-pi, pi);
  Jet j;
  j.magnitude.resize(n);
  j.phase.resize(n);
  for (int i = 0; i < n; ++i) {
    j.magnitude[i] = mag(rng);
    j.phase[i] = ph(rng);
  }
  return j;
}

}  // namespace

TEST(Phase, WrapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_phase(pi), pi);
  EXPECT_NEAR(wrap_phase(-pi), pi, 1e-15);
  EXPECT_NEAR(wrap_phase(3 * pi), pi, 1e-12);
  EXPECT_DOUBLE_EQ(wrap_phase(0.0), 0.0);
  EXPECT_NEAR(wrap_phase(2 * pi + 0.25), 0.25, 1e-12);
  EXPECT_NEAR(wrap_phase(-2 * pi - 0.25), -0.25, 1e-12);
}

TEST(Bank, LayoutAndRadii) {
  const GaborBank& bank = full_bank();
  ASSERT_EQ(bank.size(), 40);
  const int radii[5] = {12, 17, 24, 34, 48};
  for (int nu = 0; nu < 5; ++nu)
    for (int mu = 0; mu < 8; ++mu) {
      const GaborKernel& k = bank.kernel(mu + 8 * nu);
      EXPECT_EQ(k.band, nu);
      EXPECT_EQ(k.orient, mu);
      EXPECT_NEAR(k.k, std::pow(2.0, -(nu + 2) / 2.0) * pi, 1e-15);
      EXPECT_NEAR(k.wave_vector.x(), k.k * std::cos(mu * pi / 8), 1e-15);
      EXPECT_NEAR(k.wave_vector.y(), k.k * std::sin(mu * pi / 8), 1e-15);
      EXPECT_EQ(k.radius, radii[nu]);
      EXPECT_EQ(k.real.rows(), 2 * radii[nu] + 1);
    }
  EXPECT_EQ(bank.max_radius(), 48);
  EXPECT_EQ(bank.wave_vectors().cols(), 40);
}

TEST(Bank, RestrictedKeepsQuarterPiBand) {
  const GaborBank& bank = narrow_bank();
  ASSERT_EQ(bank.size(), 8);
  for (const auto& k : bank.kernels()) EXPECT_NEAR(k.k, pi / 4, 1e-15);
}

TEST(Bank, ExplicitRadiusMustHoldEnvelope) {
  BankParams p;
  p.radius = 20;
  EXPECT_THROW(GaborBank{p}, Error);
  p.radius = 32;
  EXPECT_NO_THROW(GaborBank{p});
  p.radius = -1;
  EXPECT_THROW(GaborBank{p}, Error);
}

TEST(Bank, KernelsMatchWaveletFormula) {
  const GaborBank& bank = full_bank();
  for (int j : {0, 13, 27, 39}) {
    const GaborKernel& k = bank.kernel(j);
    const double phi = k.orient * pi / 8;
    for (auto [ox, oy] : {std::pair{0, 0}, {3, -2}, {-5, 7}, {k.radius, -k.radius}}) {
      const auto expected = oracle::gabor_value(k.k, phi, bank.params().sigma, k.radius, ox, oy);
      EXPECT_NEAR(k.real(oy + k.radius, ox + k.radius), expected.real(), 1e-12);
      EXPECT_NEAR(k.imag(oy + k.radius, ox + k.radius), expected.imag(), 1e-12);
    }
  }
}

TEST(Bank, KernelsAreDcFree) {
  for (const auto& k : full_bank().kernels()) {
    const double l1 = k.real.abs().sum() + k.imag.abs().sum();
    EXPECT_LE(std::abs(k.real.sum()), 1e-6 * l1);
    EXPECT_LE(std::abs(k.imag.sum()), 1e-6 * l1);
  }
}

TEST(Jet, MatchesDirectConvolution) {
  const GrayPlane img = oracle::texture(70, 60, 5);
  for (Point pos : {Point{35, 30}, Point{2, 3}, Point{69, 59}}) {
    const Jet jet = extract_jet(img, pos, narrow_bank());
    const auto expected = oracle::direct_jet(img, pos.x, pos.y, narrow_bank());
    for (int j = 0; j < jet.size(); ++j) {
      EXPECT_NEAR(jet.magnitude[j], std::abs(expected[j]), 1e-9 * std::max(1.0, std::abs(expected[j])));
      EXPECT_NEAR(std::cos(jet.phase[j] - std::arg(expected[j])), 1.0, 1e-12);
    }
  }
  const Jet jet = extract_jet(img, {30, 25}, full_bank());
  const auto expected = oracle::direct_jet(img, 30, 25, full_bank());
  for (int j = 0; j < 40; ++j) EXPECT_NEAR(jet.magnitude[j], std::abs(expected[j]), 1e-8 * std::abs(expected[j]) + 1e-9);
}

TEST(Jet, PhasesInHalfOpenInterval) {
  const GrayPlane img = oracle::texture(64, 64, 6);
  const Jet jet = extract_jet(img, {32, 32}, full_bank());
  EXPECT_TRUE((jet.phase > -pi).all());
  EXPECT_TRUE((jet.phase <= pi).all());
  EXPECT_EQ(jet.position, (Point{32, 32}));
}

TEST(Jet, OutsideImageThrows) {
  const GrayPlane img = oracle::texture(20, 20, 7);
  EXPECT_THROW(extract_jet(img, {20, 3}, narrow_bank()), Error);
  EXPECT_THROW(extract_jet(img, {-1, 3}, narrow_bank()), Error);
}

TEST(Jet, BrightnessOffsetLeavesMagnitudes) {
  const GrayPlane img = oracle::texture(128, 128, 8);
  const GrayPlane brighter = img + 50.0;
  for (Point pos : {Point{64, 64}, Point{50, 70}}) {
    const Jet a = extract_jet(img, pos, full_bank()), b = extract_jet(brighter, pos, full_bank());
    EXPECT_LE(((a.magnitude - b.magnitude).abs() / a.magnitude).maxCoeff(), 1e-6);
  }
}

TEST(Normalize, UnitNormAndScaleInvariant) {
  std::mt19937 rng(9);
  const Jet j = random_jet(rng, 40);
  const Jet n = normalize_jet(j);
  EXPECT_NEAR(n.magnitude.square().sum(), 1.0, 1e-12);
  Jet scaled = j;
  scaled.magnitude *= 10.0;
  EXPECT_TRUE(normalize_jet(scaled).magnitude.isApprox(n.magnitude, 1e-14));
  Jet unit = make_jet(std::vector<double>(8, 0.0), std::vector<double>(8, 0.0));
  unit.magnitude[0] = 1.0;
  EXPECT_TRUE(normalize_jet(unit).magnitude.isApprox(unit.magnitude));
  unit.magnitude[0] = 0.0;
  try {
    normalize_jet(unit);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateJet);
  }
}

TEST(Normalize, GainInvariance) {
  const GrayPlane img = oracle::texture(128, 128, 10);
  const Jet a = normalize_jet(extract_jet(img, {64, 60}, full_bank()));
  const Jet b = normalize_jet(extract_jet(GrayPlane(img * 1.5), {64, 60}, full_bank()));
  EXPECT_LE((a.magnitude - b.magnitude).abs().maxCoeff(), 1e-6);
}

TEST(Similarity, BasicIdentities) {
  std::mt19937 rng(11);
  const Jet j = random_jet(rng, 40);
  EXPECT_NEAR(jet_similarity(j, j), 1.0, 1e-12);
  EXPECT_NEAR(jet_similarity(j, j, Eigen::Vector2d::Zero(), full_bank()), 1.0, 1e-12);
  Jet doubled = j;
  doubled.magnitude *= 2.0;
  EXPECT_NEAR(jet_similarity(j, doubled), 1.0, 1e-12);
  Jet flipped = j;
  flipped.phase = wrap_phases(flipped.phase + pi);
  EXPECT_NEAR(jet_similarity(j, flipped), -1.0, 1e-12);
}

TEST(Similarity, MatchesScalarFormulaAndIsSymmetric) {
  std::mt19937 rng(12);
  const GaborBank& bank = full_bank();
  for (int trial = 0; trial < 20; ++trial) {
    const Jet a = random_jet(rng, 40), b = random_jet(rng, 40);
    const Eigen::Vector2d d(0.3 * trial - 3, 1.7 - 0.2 * trial);
    double num = 0, na = 0, nb = 0;
    for (int j = 0; j < 40; ++j) {
      const auto& k = bank.kernel(j).wave_vector;
      num += a.magnitude[j] * b.magnitude[j] * std::cos(a.phase[j] - b.phase[j] - d.dot(k));
      na += a.magnitude[j] * a.magnitude[j];
      nb += b.magnitude[j] * b.magnitude[j];
    }
    const double s = jet_similarity(a, b, d, bank);
    EXPECT_NEAR(s, num / std::sqrt(na * nb), 1e-12);
    EXPECT_NEAR(s, jet_similarity(b, a, -d, bank), 1e-12);
    EXPECT_LE(std::abs(s), 1.0);
  }
}

TEST(Similarity, ZeroJetIsDegenerate) {
  std::mt19937 rng(13);
  const Jet a = random_jet(rng, 8);
  const Jet zero = make_jet(std::vector<double>(8, 0.0), std::vector<double>(8, 0.0));
  EXPECT_THROW(jet_similarity(a, zero), Error);
}

TEST(Displacement, IdenticalJetsGiveZero) {
  const GrayPlane img = oracle::texture(128, 128, 14);
  const Jet j = extract_jet(img, {64, 64}, full_bank());
  const Displacement d = estimate_displacement(j, j, full_bank());
  EXPECT_NEAR(d.d.norm(), 0.0, 1e-12);
  EXPECT_FALSE(d.clamped);
}

TEST(Displacement, RecoversTwoPixelHorizontalShift) {
  for (unsigned seed : {15u, 16u, 17u}) {
    const GrayPlane img = oracle::texture(128, 128, seed);
    const GrayPlane moved = oracle::shift(img, 2, 0);
    for (const GaborBank* bank : {&full_bank(), &narrow_bank()}) {
      const Jet a = extract_jet(img, {64, 64}, *bank), b = extract_jet(moved, {64, 64}, *bank);
      const Displacement d = estimate_displacement(a, b, *bank);
      EXPECT_NEAR(d.d.x(), 2.0, 0.5);
      EXPECT_NEAR(d.d.y(), 0.0, 0.5);
    }
  }
}

TEST(Displacement, SingleShotSystemOnRestrictedBank) {
  // One band: the estimate is Γ⁻¹Φ of the wrapped phase differences.
  std::mt19937 rng(18);
  const Jet a = random_jet(rng, 8), b = random_jet(rng, 8);
  const GaborBank& bank = narrow_bank();
  Eigen::Matrix2d gram = Eigen::Matrix2d::Zero();
  Eigen::Vector2d phi = Eigen::Vector2d::Zero();
  for (int j = 0; j < 8; ++j) {
    const double w = a.magnitude[j] * b.magnitude[j];
    const Eigen::Vector2d k = bank.kernel(j).wave_vector;
    gram += w * k * k.transpose();
    phi += w * k * wrap_phase(a.phase[j] - b.phase[j]);
  }
  const Displacement d = estimate_displacement(a, b, bank);
  EXPECT_TRUE(d.gram.isApprox(gram, 1e-12));
  EXPECT_TRUE(d.phase_grad.isApprox(phi, 1e-12));
  const Eigen::Vector2d expected = gram.inverse() * phi;
  if (expected.norm() <= kMaxDisplacement) {
    EXPECT_TRUE(d.d.isApprox(expected, 1e-10));
  } else {
    EXPECT_TRUE(d.clamped);
  }
}

TEST(Displacement, LargeEstimateIsClamped) {
  // two nearly parallel wave vectors with opposing phase differences solve to |d| far above 8
  std::vector<double> mag(40, 0.0), pa(40, 0.0), pb(40, 0.0);
  mag[32] = mag[33] = 1.0;
  pa[32] = 3.0;
  pa[33] = -3.0;
  const Jet a = make_jet(mag, pa), b = make_jet(mag, pb);
  const Displacement d = estimate_displacement(a, b, full_bank());
  EXPECT_TRUE(d.clamped);
  EXPECT_NEAR(d.d.norm(), kMaxDisplacement, 1e-12);
}

TEST(Displacement, RankOneSystemIsSingular) {
  std::vector<double> mag(8, 0.0), ph(8, 0.0);
  mag[2] = 1.0;
  ph[2] = 0.5;
  const Jet a = make_jet(mag, ph), b = make_jet(mag, std::vector<double>(8, 0.0));
  try {
    estimate_displacement(a, b, narrow_bank());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularSystem);
  }
  EXPECT_NEAR(jet_similarity_compensated(a, b, narrow_bank()), std::cos(0.5), 1e-12);
}

TEST(Compensated, NotWorseThanUncompensatedOnShiftPair) {
  const GrayPlane img = oracle::texture(128, 128, 19);
  const GrayPlane moved = oracle::shift(img, 2, 0);
  const Jet a = extract_jet(img, {64, 64}, full_bank()), b = extract_jet(moved, {64, 64}, full_bank());
  EXPECT_GE(jet_similarity_compensated(a, b, full_bank()), jet_similarity(a, b));
  EXPECT_NEAR(jet_similarity_compensated(a, a, full_bank()), 1.0, 1e-12);
}

TEST(Compensated, UnrelatedJetsScoreBelowSelf) {
  std::mt19937 rng(20);
  for (int trial = 0; trial < 100; ++trial) {
    const Jet a = random_jet(rng, 40), b = random_jet(rng, 40);
    EXPECT_LT(jet_similarity_compensated(a, b, full_bank()), jet_similarity_compensated(a, a, full_bank()));
  }
}

TEST(Compensated, BankMismatchRejected) {
  std::mt19937 rng(21);
  const Jet a = random_jet(rng, 8);
  EXPECT_THROW(jet_similarity_compensated(a, a, full_bank()), Error);
}
