// Log-MGF machinery against closed forms.
//
// For phi(x) = beta x under a standard Gaussian, Gamma(m) = m^2 beta^2 / 2
// exactly, so Gamma' = m beta^2, Gamma'' = beta^2, and the entropy of the
// tilt is m Gamma' - Gamma = m^2 beta^2 / 2.  For the cavity pair,
// Gamma(1) = beta^2/2 + log E[cosh(beta g)] = beta^2 by the Gaussian
// identity E[cosh(beta g)] = e^{beta^2/2}.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "remglass/tilt.hpp"

using namespace remglass;

namespace {

// E[tanh^2(g)] for g ~ N(0,1), high-precision quadrature (frozen).
constexpr double kETanhSq = 0.39429449039784117;

double sample_var(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / double(v.size() - 1);
}

}  // namespace

TEST(GammaProfile, PureRemClosedForm) {
  const auto p = gamma_profile(PhiModel::pure_rem(2.0), 0.5);
  EXPECT_NEAR(p.gamma, 0.5, 1e-12);
  EXPECT_NEAR(p.gamma1, 2.0, 1e-12);
  EXPECT_NEAR(p.gamma2, 4.0, 1e-11);
}

TEST(GammaProfile, ZeroTiltIsZeroForEveryVariant) {
  EXPECT_NEAR(gamma_profile(PhiModel::pure_rem(2.0), 0.0).gamma, 0.0, 1e-14);
  EXPECT_NEAR(gamma_profile(PhiModel::cavity(1.7), 0.0).gamma, 0.0, 1e-14);
  const auto custom = PhiModel::custom([](double x) { return std::cos(x) + 0.5 * x; });
  EXPECT_NEAR(gamma_profile(custom, 0.0).gamma, 0.0, 1e-14);
}

TEST(GammaProfile, CavityGammaAtOneIsBetaSquared) {
  for (double beta : {0.5, 1.0, 1.3, 2.5}) {
    const auto p = gamma_profile(PhiModel::cavity(beta), 1.0);
    EXPECT_NEAR(p.gamma, beta * beta, 1e-11) << "beta=" << beta;
  }
}

TEST(GammaProfile, DerivativesMatchCentralDifferences) {
  const double h = 1e-4;
  for (const PhiModel& model : {PhiModel::pure_rem(2.0), PhiModel::cavity(2.5)}) {
    for (double m : {0.2, 0.5, 0.9}) {
      const double up = gamma_profile(model, m + h).gamma;
      const double dn = gamma_profile(model, m - h).gamma;
      const auto p = gamma_profile(model, m);
      EXPECT_NEAR((up - dn) / (2 * h), p.gamma1, 1e-6);
      EXPECT_NEAR((up - 2 * p.gamma + dn) / (h * h), p.gamma2, 1e-4);
    }
  }
}

TEST(GammaProfile, ConvexAndEntropyMonotone) {
  // d/dm (m Gamma' - Gamma) = m Gamma'' > 0: the entropy condition's
  // left side must increase along any m grid.
  for (const PhiModel& model : {PhiModel::pure_rem(1.7), PhiModel::cavity(2.0)}) {
    double prev = -1.0;
    for (int i = 1; i <= 20; ++i) {
      const double m = 0.05 * i;
      const auto p = gamma_profile(model, m);
      EXPECT_GT(p.gamma2, 0.0);
      const double h = m * p.gamma1 - p.gamma;
      EXPECT_GT(h, prev);
      prev = h;
    }
  }
}

TEST(GammaProfile, QuadratureDoublingConverged) {
  const auto& lo = GaussHermite::cached();
  const auto& hi = GaussHermite::cached(2 * kDefaultQuadOrder);
  for (double beta : {1.0, 2.5, 4.0}) {
    for (double m : {0.1, 0.5, 1.0}) {
      const PhiModel model = PhiModel::cavity(beta);
      EXPECT_NEAR(gamma_profile(model, m, lo).gamma, gamma_profile(model, m, hi).gamma, 1e-12);
      const auto a = cavity_moments(beta, m, lo);
      const auto b = cavity_moments(beta, m, hi);
      EXPECT_NEAR(a.a / b.a, 1.0, 1e-12);
      EXPECT_NEAR(a.b, b.b, 1e-12 * std::max(1.0, std::fabs(b.b)));
      EXPECT_NEAR(a.c, b.c, 1e-12 * std::max(1.0, b.c));
    }
  }
}

TEST(QuadratureRule, WeightsAndSymmetry) {
  const auto& rule = GaussHermite::cached(200);
  double total = 0.0;
  for (double w : rule.weights()) {
    EXPECT_GT(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
  for (int k = 0; k < rule.order(); ++k)
    EXPECT_DOUBLE_EQ(rule.nodes()[k], -rule.nodes()[rule.order() - 1 - k]);
  EXPECT_THROW(GaussHermite(1), DomainError);
}

TEST(CavityMoments, TrivialReductions) {
  const auto zero_tilt = cavity_moments(1.0, 0.0);
  EXPECT_NEAR(zero_tilt.a, 1.0, 1e-13);
  EXPECT_NEAR(zero_tilt.c, kETanhSq, 1e-13);

  const auto zero_beta = cavity_moments(0.0, 0.7);
  EXPECT_DOUBLE_EQ(zero_beta.a, 1.0);
  EXPECT_NEAR(zero_beta.b, 0.0, 1e-15);
  EXPECT_NEAR(zero_beta.c, 0.0, 1e-15);

  // E[cosh(beta g)] = e^{beta^2/2}
  EXPECT_NEAR(cavity_moments(1.3, 1.0).a, std::exp(1.3 * 1.3 / 2), 1e-11);

  const auto cm = cavity_moments(2.0, 0.6);
  EXPECT_GE(cm.a, 1.0);
  EXPECT_GE(cm.b, 0.0);
  EXPECT_LT(cm.c, cm.a);
}

TEST(EntropyOfTilt, ClosedFormsAndPositivity) {
  EXPECT_NEAR(entropy_of_tilt(PhiModel::cavity(1.5), 0.0), 0.0, 1e-14);
  // PureRem: m Gamma' - Gamma = m^2 beta^2 / 2
  EXPECT_NEAR(entropy_of_tilt(PhiModel::pure_rem(2.0), 0.3), 0.18, 1e-12);
  const double m_log2 = std::sqrt(2.0 * std::numbers::ln2) / 2.0;
  EXPECT_NEAR(entropy_of_tilt(PhiModel::pure_rem(2.0), m_log2), std::numbers::ln2, 1e-12);
}

TEST(SampleTilted, PureRemMomentsMatchGamma) {
  RandomStream rng(41);
  const PhiModel model = PhiModel::pure_rem(2.0);
  const auto p = gamma_profile(model, 0.5);
  const std::size_t n = 100000;
  const auto v = sample_tilted(model, 0.5, n, rng);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(n);
  const double var = sample_var(v, mean);
  EXPECT_NEAR(mean, p.gamma1, 4.0 * std::sqrt(var / double(n)));
  // SE of the sample variance from the empirical fourth moment.
  double m4 = 0.0;
  for (double x : v) m4 += std::pow(x - mean, 4);
  m4 /= double(n);
  EXPECT_NEAR(var, p.gamma2, 4.0 * std::sqrt((m4 - var * var) / double(n)));
}

TEST(SampleTilted, CavityMomentsMatchGamma) {
  RandomStream rng(42);
  const PhiModel model = PhiModel::cavity(1.0);
  const auto p = gamma_profile(model, 0.5);
  const std::size_t n = 100000;
  const auto v = sample_tilted(model, 0.5, n, rng);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(n);
  const double var = sample_var(v, mean);
  EXPECT_NEAR(mean, p.gamma1, 4.0 * std::sqrt(var / double(n)));
  double m4 = 0.0;
  for (double x : v) m4 += std::pow(x - mean, 4);
  m4 /= double(n);
  EXPECT_NEAR(var, p.gamma2, 4.0 * std::sqrt((m4 - var * var) / double(n)));
}

TEST(SampleTilted, UntiltedMeanIsBaseMean) {
  RandomStream rng(43);
  const PhiModel model = PhiModel::cavity(1.2);
  const auto v = sample_tilted(model, 0.0, 50000, rng);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  const double var = sample_var(v, mean);
  EXPECT_NEAR(mean, gamma_profile(model, 0.0).gamma1, 4.0 * std::sqrt(var / double(v.size())));
}

TEST(SampleTilted, EnvelopeDominatesTarget) {
  // cosh(b x)^m <= 2 cosh(m b x): acceptance probabilities in (0, 1].
  const double beta = 1.0, m = 0.5;
  for (double x = -30.0; x <= 30.0; x += 0.25) {
    const double log_acc = m * log_cosh(beta * x) - log_cosh(m * beta * x) - std::numbers::ln2;
    EXPECT_LE(log_acc, 0.0) << "x=" << x;
  }
}

TEST(TiltErrors, InvalidInputs) {
  EXPECT_THROW(PhiModel::pure_rem(-0.5), DomainError);
  EXPECT_THROW(PhiModel::pure_rem(7.0), DomainError);
  RandomStream rng(7);
  EXPECT_THROW(sample_tilted(PhiModel::pure_rem(1.0), 1.5, 10, rng), DomainError);
  EXPECT_THROW(sample_tilted(PhiModel::custom([](double x) { return x; }), 0.5, 10, rng),
               WrongModelError);
  const auto bad = PhiModel::custom(
      [](double x) { return x > 0 ? std::numeric_limits<double>::infinity() : 0.0; });
  EXPECT_THROW(gamma_profile(bad, 0.5), NonFiniteError);
}
