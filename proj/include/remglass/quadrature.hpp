#pragma once

// Gauss-Hermite quadrature in the probabilists' normalization: nodes and
// weights such that sum_k w_k f(x_k) ~ E[f(Z)], Z standard normal, with
// sum_k w_k = 1.
//
// Construction: Newton iteration on the half-weighted orthonormal
// recurrence
//     q_0 = e^{-x^2/4},  q_{j+1} = (x q_j - sqrt(j) q_{j-1}) / sqrt(j+1),
// whose values are uniformly bounded (they are Hermite functions up to
// normalization), with weights from the Christoffel function
//     w_k = e^{-x_k^2/2} / sum_{j<n} q_j(x_k)^2.
// Eigenvalue-based weights (squared first eigenvector components) are not
// used: their ~eps^2 absolute noise at extreme nodes gets amplified by
// exponentially growing integrands.  The Newton/Christoffel weights are
// relatively accurate down to the underflow threshold.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "remglass/errors.hpp"

namespace remglass {

// The cavity integrands cosh(beta x)^m and tanh^2(beta x) cosh(beta x)^m
// have complex singularities at distance pi/(2 beta) from the real axis,
// so the Gauss-Hermite error decays like exp(-(pi/beta) sqrt(2n)) rather
// than factorially; 1600 nodes keep the moment triple converged to 1e-12
// over beta <= 4, m in [0,1] (worst case: small m at beta = 4).  At the
// beta = 6 cap the triple is still good to ~1e-9.
inline constexpr int kDefaultQuadOrder = 1600;
inline constexpr int kMaxQuadOrder = 4000;

class GaussHermite {
 public:
  explicit GaussHermite(int order) : order_(order) {
    if (order < 2) throw DomainError("GaussHermite: order must be >= 2");
    if (order > kMaxQuadOrder) throw DomainError("GaussHermite: order beyond supported range");
    nodes_.assign(std::size_t(order), 0.0);
    weights_.assign(std::size_t(order), 0.0);

    // Initial guesses for the positive roots in decreasing order: the
    // Airy-edge expansion for the largest two, then one asymptotic local
    // spacing pi sqrt(2) / sqrt(2n + 1 - x^2/2) below the previous refined
    // root; each guess is polished by Newton on q_n.
    const int half = order / 2;
    const double anu = 2.0 * order + 1.0;
    double r1 = 0.0;  // previously refined root
    for (int i = 0; i < half; ++i) {
      double x;
      if (i == 0) {
        x = std::numbers::sqrt2 * (std::sqrt(anu) - 1.85575 * std::pow(anu, -1.0 / 6.0));
      } else if (i == 1) {
        x = r1 - 2.0 * 1.14 * std::pow(double(order), 0.426) / r1;
      } else {
        x = r1 - std::numbers::sqrt2 * std::numbers::pi /
                     std::sqrt(std::max(anu - 0.5 * r1 * r1, 1.0));
      }
      for (int it = 0; it < 100; ++it) {
        double dx = newton_ratio(order, x);
        // Trust region of half the local node spacing keeps Newton in the
        // basin of the intended root.
        const double cap = 0.45 * std::numbers::sqrt2 * std::numbers::pi /
                           std::sqrt(std::max(anu - 0.5 * x * x, 1.0));
        dx = std::clamp(dx, -cap, cap);
        x -= dx;
        if (std::fabs(dx) <= 1e-15 * (1.0 + std::fabs(x))) break;
      }
      if (!(x > 0.0 && (i == 0 || x < r1)) || !std::isfinite(x))
        throw NonFiniteError("GaussHermite: node iteration failed");
      nodes_[std::size_t(i)] = x;
      r1 = x;
    }
    // Mirror to the negative half; odd orders get the middle root at 0.
    for (int i = 0; i < half; ++i) {
      const double x = nodes_[std::size_t(i)];
      nodes_[std::size_t(order - 1 - i)] = x;
      nodes_[std::size_t(i)] = -x;
    }
    if (order % 2 == 1) nodes_[std::size_t(half)] = 0.0;
    std::sort(nodes_.begin(), nodes_.end());

    for (int k = 0; k < order; ++k) {
      const double x = nodes_[std::size_t(k)];
      weights_[std::size_t(k)] = std::exp(-0.5 * x * x) / christoffel_sum(order, x);
    }
    // Enforce exact +-symmetry.
    for (int k = 0, j = order - 1; k < j; ++k, --j) {
      const double x = 0.5 * (nodes_[std::size_t(j)] - nodes_[std::size_t(k)]);
      nodes_[std::size_t(k)] = -x;
      nodes_[std::size_t(j)] = x;
      const double w = 0.5 * (weights_[std::size_t(k)] + weights_[std::size_t(j)]);
      weights_[std::size_t(k)] = w;
      weights_[std::size_t(j)] = w;
    }
    double total = 0.0;
    for (const double w : weights_) total += w;
    if (!(std::fabs(total - 1.0) < 1e-13))
      throw NonFiniteError("GaussHermite: weight normalization failed");

    log_weights_.resize(std::size_t(order));
    for (int k = 0; k < order; ++k)
      log_weights_[std::size_t(k)] =
          weights_[std::size_t(k)] > 0.0 ? std::log(weights_[std::size_t(k)])
                                         : -std::numeric_limits<double>::infinity();
  }

  int order() const { return order_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> log_weights() const { return log_weights_; }

  /// Process-wide cache; rules are immutable once built.
  static const GaussHermite& cached(int order = kDefaultQuadOrder) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussHermite>> rules;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = rules[order];
    if (!slot) slot = std::make_unique<GaussHermite>(order);
    return *slot;
  }

 private:
  // The half-weighted values q_j(x) = p_j(x) e^{-x^2/4} (2pi)^{-1/4} are
  // uniformly bounded near and above the classical turning point, but the
  // seed e^{-x^2/4} underflows for |x| beyond ~53.  The recurrence
  // therefore runs on (mantissa, power-of-two exponent) pairs; Newton uses
  // only scale-free ratios and the Christoffel accumulation rebuilds true
  // magnitudes with ldexp (harmless underflow to zero for the negligible
  // early terms).
  struct Scaled {
    double cur = 0.0, prev = 0.0;
    long exp2 = 0;

    static Scaled seed(double x) {
      Scaled s;
      const double e0 = -0.25 * x * x / std::numbers::ln2;
      const double base = std::floor(e0);
      s.cur = std::pow(2.0 * std::numbers::pi, -0.25) * std::exp2(e0 - base);
      s.exp2 = long(base);
      return s;
    }

    void step(double x, int j) {
      const double next =
          (x * cur - std::sqrt(double(j)) * prev) / std::sqrt(double(j + 1));
      prev = cur;
      cur = next;
      const double mag = std::max(std::fabs(cur), std::fabs(prev));
      if (mag > 0x1p500) {
        cur *= 0x1p-500;
        prev *= 0x1p-500;
        exp2 += 500;
      } else if (mag > 0.0 && mag < 0x1p-500) {
        cur *= 0x1p500;
        prev *= 0x1p500;
        exp2 -= 500;
      }
    }
  };

  /// Newton step q_n / q_n' with q_n' = sqrt(n) q_{n-1} - (x/2) q_n;
  /// the common scale cancels in the ratio.
  static double newton_ratio(int n, double x) {
    Scaled s = Scaled::seed(x);
    for (int j = 0; j < n; ++j) s.step(x, j);
    const double deriv = std::sqrt(double(n)) * s.prev - 0.5 * x * s.cur;
    return s.cur / deriv;
  }

  /// sum_{j<n} p_j(x)^2 e^{-x^2/2} rescaled by sqrt(2pi): the reciprocal
  /// of the Gauss weight at a node.
  static double christoffel_sum(int n, double x) {
    Scaled s = Scaled::seed(x);
    double acc = std::ldexp(s.cur * s.cur, int(2 * s.exp2));
    for (int j = 0; j + 1 < n; ++j) {
      s.step(x, j);
      acc += std::ldexp(s.cur * s.cur, int(2 * s.exp2));
    }
    return acc * std::sqrt(2.0 * std::numbers::pi);
  }

  int order_;
  std::vector<double> nodes_, weights_, log_weights_;
};

/// Two-pass max-then-sum log-sum-exp over a fixed-order range.
inline double log_sum_exp(std::span<const double> values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (const double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) {
    if (hi == -std::numeric_limits<double>::infinity()) return hi;  // empty/all -inf
    throw NonFiniteError("log_sum_exp: non-finite input");
  }
  double acc = 0.0;
  for (const double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

/// log cosh(y) without overflow: |y| - log 2 + log1p(e^{-2|y|}).
inline double log_cosh(double y) {
  const double a = std::fabs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace remglass
