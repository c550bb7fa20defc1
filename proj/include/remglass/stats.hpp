#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "remglass/errors.hpp"

namespace remglass {

struct MomentEstimate {
  double mean = 0.0;
  double std_err = 0.0;
};

inline MomentEstimate summarize(std::span<const double> v) {
  if (v.size() < 2) throw DomainError("summarize: need >= 2 values");
  const double n = double(v.size());
  double mean = 0.0;
  for (const double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // residual-based, dof = n - 2
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw DomainError("fit_line: need >= 3 paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.slope_se = std::sqrt(ss / double(n - 2) / sxx);
  return fit;
}

}  // namespace remglass
