#pragma once

// Log-moment generating function Gamma(m) = log E_mu[e^{m phi}] and the
// exponential-family machinery built on it: derivatives, cavity moment
// triple, relative entropy of the tilted measure G_m (dG_m/dmu ~ e^{m phi}),
// and exact samplers for phi under G_m.
//
// All expectations of exponentials are accumulated in the log domain, and
// Gamma', Gamma'' are the exact mean and variance of phi under the
// quadrature-discretized tilted measure, not finite differences.

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "remglass/errors.hpp"
#include "remglass/phi_model.hpp"
#include "remglass/quadrature.hpp"

namespace remglass {

struct GammaProfile {
  double m = 0.0;
  double gamma = 0.0;   // Gamma(m)
  double gamma1 = 0.0;  // Gamma'(m)
  double gamma2 = 0.0;  // Gamma''(m)
};

/// E[cosh(beta g)^m], E[cosh^m log cosh], E[tanh^2 cosh^m] for g ~ N(0,1).
struct CavityMoments {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
};

using RandomStream = std::mt19937_64;

namespace detail {

/// Gamma profile of a scalar function given its values at the quadrature
/// nodes: log-sum-exp for Gamma, tilted node probabilities for the
/// derivatives.
inline GammaProfile scalar_profile(std::span<const double> phi, double m,
                                   const GaussHermite& rule) {
  const auto logw = rule.log_weights();
  const int n = rule.order();
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) {
    if (!std::isfinite(phi[k])) throw NonFiniteError("gamma_profile: phi not finite at node");
    t[k] = logw[k] + m * phi[k];
  }
  const double gamma = log_sum_exp(t);
  if (!std::isfinite(gamma)) throw NonFiniteError("gamma_profile: log-domain overflow");
  double mean = 0.0;
  for (int k = 0; k < n; ++k) mean += std::exp(t[k] - gamma) * phi[k];
  double var = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d = phi[k] - mean;
    var += std::exp(t[k] - gamma) * d * d;
  }
  return {m, gamma, mean, var};
}

inline std::vector<double> node_values(const PhiModel& model, const GaussHermite& rule,
                                       bool logcosh_part) {
  std::vector<double> phi(rule.order());
  const auto x = rule.nodes();
  for (int k = 0; k < rule.order(); ++k)
    phi[k] = logcosh_part ? log_cosh(model.beta() * x[k]) : model.scalar_phi(x[k]);
  return phi;
}

}  // namespace detail

/// Gamma(m) with its first two derivatives.  For the Cavity pair the two
/// coordinates are independent, so the Gaussian coordinate enters exactly:
/// Gamma(m) = m^2 beta^2/2 + log E[cosh(beta g)^m].
inline GammaProfile gamma_profile(const PhiModel& model, double m,
                                  const GaussHermite& rule = GaussHermite::cached()) {
  if (!std::isfinite(m)) throw DomainError("gamma_profile: m must be finite");
  if (model.kind() == PhiModel::Kind::Cavity) {
    const double b = model.beta();
    GammaProfile p = detail::scalar_profile(detail::node_values(model, rule, true), m, rule);
    p.gamma += 0.5 * m * m * b * b;
    p.gamma1 += m * b * b;
    p.gamma2 += b * b;
    return p;
  }
  return detail::scalar_profile(detail::node_values(model, rule, false), m, rule);
}

inline CavityMoments cavity_moments(double beta, double m,
                                    const GaussHermite& rule = GaussHermite::cached()) {
  if (!(beta >= 0.0)) throw DomainError("cavity_moments: beta must be >= 0");
  const auto x = rule.nodes();
  const auto logw = rule.log_weights();
  const int n = rule.order();
  std::vector<double> t(n), lc(n);
  for (int k = 0; k < n; ++k) {
    lc[k] = log_cosh(beta * x[k]);
    t[k] = logw[k] + m * lc[k];
  }
  const double log_a = log_sum_exp(t);
  double b = 0.0, c = 0.0;
  for (int k = 0; k < n; ++k) {
    const double p = std::exp(t[k] - log_a);  // tilted node probability
    const double th = std::tanh(beta * x[k]);
    b += p * lc[k];
    c += p * th * th;
  }
  const double a = std::exp(log_a);
  if (!std::isfinite(a)) throw NonFiniteError("cavity_moments: overflow in E[cosh^m]");
  return {a, a * b, a * c};
}

/// Relative entropy H(G_m | mu) = m Gamma'(m) - Gamma(m) >= 0.
inline double entropy_of_tilt(const PhiModel& model, double m,
                              const GaussHermite& rule = GaussHermite::cached()) {
  const GammaProfile p = gamma_profile(model, m, rule);
  return m * p.gamma1 - p.gamma;
}

namespace detail {

inline constexpr double kRejectionFloor = 1e-3;
inline constexpr std::size_t kRejectionProbe = 10000;

/// One draw of the tilted log-cosh coordinate: target density proportional
/// to cosh(beta x)^m exp(-x^2/2).  Envelope: cosh(m beta x) exp(-x^2/2),
/// i.e. an equal mixture of N(+m beta, 1) and N(-m beta, 1); accept with
/// probability cosh(beta x)^m / (2 cosh(m beta x)), which is in (0,1]
/// because cosh(bx)^m <= e^{m b |x|} <= 2 cosh(m b x).
inline double draw_tilted_logcosh_coord(double beta, double m, RandomStream& rng,
                                        std::size_t* attempts, std::size_t* accepts) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    ++*attempts;
    const double sign = (rng() & 1u) ? 1.0 : -1.0;
    const double x = sign * m * beta + normal(rng);
    const double log_acc = m * log_cosh(beta * x) - log_cosh(m * beta * x) - std::numbers::ln2;
    if (std::log(unif(rng)) < log_acc) {
      ++*accepts;
      return x;
    }
    if (*attempts >= kRejectionProbe &&
        double(*accepts) < kRejectionFloor * double(*attempts))
      throw RejectionStallError("sample_tilted: rejection acceptance rate below floor");
  }
}

/// One draw of phi(X~) with X~ distributed as the tilted measure G_m.
inline double draw_tilted_phi(const PhiModel& model, double m, RandomStream& rng,
                              std::size_t* attempts, std::size_t* accepts) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double beta = model.beta();
  if (model.kind() == PhiModel::Kind::PureRem) {
    ++*attempts;
    ++*accepts;
    return beta * (m * beta + normal(rng));  // exact tilt: N(m beta, 1)
  }
  // Cavity: first coordinate tilts exactly to N(m beta, 1).
  const double x1 = m * beta + normal(rng);
  const double x2 = draw_tilted_logcosh_coord(beta, m, rng, attempts, accepts);
  return beta * x1 + log_cosh(beta * x2);
}

}  // namespace detail

/// n independent draws of phi under G_m.  Supported for PureRem (exact) and
/// Cavity (exact first coordinate, rejection for the log-cosh coordinate).
inline std::vector<double> sample_tilted(const PhiModel& model, double m, std::size_t n,
                                         RandomStream& rng) {
  if (!(m >= 0.0) || m > 1.0) throw DomainError("sample_tilted: need 0 <= m <= 1");
  if (model.kind() == PhiModel::Kind::Custom)
    throw WrongModelError("sample_tilted: no sampler for custom models");
  std::vector<double> out(n);
  std::size_t attempts = 0, accepts = 0;
  for (auto& v : out) v = detail::draw_tilted_phi(model, m, rng, &attempts, &accepts);
  return out;
}

}  // namespace remglass
