#pragma once

// The energy function / base measure pair under study.
//
//   PureRem:  phi(x) = beta * x,                        mu = N(0,1)
//   Cavity:   phi(x1,x2) = beta*x1 + log cosh(beta*x2), mu = N(0,I_2)
//   Custom:   user-supplied scalar phi,                 mu = N(0,1)
//
// The Cavity pair factorizes over its two coordinates, so every
// expectation reduces to one-dimensional Gauss-Hermite sums.

#include <functional>
#include <string>
#include <utility>

#include "remglass/errors.hpp"

namespace remglass {

/// Inverse temperatures beyond this are outside the validated accuracy
/// range of the default quadrature order.
inline constexpr double kMaxBeta = 6.0;

class PhiModel {
 public:
  enum class Kind { PureRem, Cavity, Custom };

  static PhiModel pure_rem(double beta) {
    check_beta(beta);
    return PhiModel(Kind::PureRem, beta, {});
  }

  static PhiModel cavity(double beta) {
    check_beta(beta);
    return PhiModel(Kind::Cavity, beta, {});
  }

  static PhiModel custom(std::function<double(double)> phi) {
    if (!phi) throw DomainError("PhiModel: custom phi must be callable");
    return PhiModel(Kind::Custom, 0.0, std::move(phi));
  }

  Kind kind() const { return kind_; }

  double beta() const {
    if (kind_ == Kind::Custom) throw DomainError("PhiModel: custom model has no beta");
    return beta_;
  }

  /// Scalar phi for the one-dimensional variants (PureRem, Custom).
  double scalar_phi(double x) const {
    if (kind_ == Kind::PureRem) return beta_ * x;
    if (kind_ == Kind::Custom) return custom_phi_(x);
    throw WrongModelError("PhiModel: cavity phi is bivariate");
  }

  std::string name() const {
    switch (kind_) {
      case Kind::PureRem: return "purerem";
      case Kind::Cavity: return "cavity";
      case Kind::Custom: return "custom";
    }
    return "?";
  }

 private:
  PhiModel(Kind kind, double beta, std::function<double(double)> phi)
      : kind_(kind), beta_(beta), custom_phi_(std::move(phi)) {}

  static void check_beta(double beta) {
    if (!(beta >= 0.0)) throw DomainError("PhiModel: beta must be >= 0");
    if (beta > kMaxBeta) throw DomainError("PhiModel: beta exceeds validated range");
  }

  Kind kind_;
  double beta_;
  std::function<double(double)> custom_phi_;
};

}  // namespace remglass
