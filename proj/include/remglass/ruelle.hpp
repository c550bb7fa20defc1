#pragma once

// Poisson point process PP(m) with intensity t^{-m-1} dt on (0, inf),
// truncated below at a cutoff, and its normalized version PD(m).
//
// Sampling above a cutoff eps is exact: the point count is
// Poisson(eps^{-m}/m) and each point is eps * U^{-1/m} by inverse
// transform.  The sums over the unsampled points below eps concentrate
// around their intensity-measure means
//     E[sum_{<eps} xi^p] = eps^{p-m}/(p-m),
// with variance eps^{2p-m}/(2p-m), vanishing relative to the mean as
// eps -> 0, so the Monte Carlo estimators here complete their sums with
// those means analytically instead of sampling O(eps^{-m}) microscopic
// points.  Without the completion the normalizer is short by an O(eps^{1-m})
// mass, which is far from negligible as m -> 1.  The normalized sample
// returned by normalize_pd stays a plain ratio over the sampled points;
// its truncation bias is documented there.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "remglass/errors.hpp"
#include "remglass/quadrature.hpp"
#include "remglass/tilt.hpp"

namespace remglass {

struct PointSample {
  enum class Kind { PP, PD };
  std::vector<double> points;  // sorted strictly decreasing
  Kind kind = Kind::PP;
  double cutoff = 0.0;
  double m = 0.0;
};

/// Expected point count above the cutoff: integral of t^{-m-1} on (eps, inf).
inline double expected_pp_count(double m, double cutoff) {
  return std::pow(cutoff, -m) / m;
}

/// Cutoff at 1e-6 of the Frechet scale m^{-1/m} of the largest point.
inline double default_pp_cutoff(double m) { return 1e-6 * std::pow(m, -1.0 / m); }

inline constexpr double kMaxExpectedPoints = 5e7;

template <class URBG>
PointSample sample_pp(double m, double cutoff, URBG& rng) {
  if (!(m > 0.0 && m < 1.0)) throw DomainError("sample_pp: need 0 < m < 1");
  if (!(cutoff > 0.0)) throw DomainError("sample_pp: need cutoff > 0");
  const double lambda = expected_pp_count(m, cutoff);
  if (lambda > kMaxExpectedPoints) throw CutoffTooSmallError("sample_pp: expected count over budget");
  std::poisson_distribution<long long> count(lambda);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PointSample out;
  out.kind = PointSample::Kind::PP;
  out.cutoff = cutoff;
  out.m = m;
  const long long k = count(rng);
  out.points.resize(std::size_t(k));
  for (auto& p : out.points) p = cutoff * std::pow(1.0 - unif(rng), -1.0 / m);
  std::sort(out.points.begin(), out.points.end(), std::greater<double>());
  return out;
}

/// Divide by the (truncated) total mass; scale-invariant by construction.
inline PointSample normalize_pd(const PointSample& pp) {
  if (pp.kind != PointSample::Kind::PP) throw DomainError("normalize_pd: input must be PP");
  if (pp.points.empty()) throw EmptySampleError("normalize_pd: empty point sample");
  double total = 0.0;
  for (const double p : pp.points) total += p;
  PointSample out = pp;
  out.kind = PointSample::Kind::PD;
  for (auto& p : out.points) p /= total;
  return out;
}

struct MomentEstimate {
  double mean = 0.0;
  double std_err = 0.0;
};

namespace detail {

inline MomentEstimate summarize(const std::vector<double>& v) {
  const double n = double(v.size());
  double mean = 0.0;
  for (const double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

/// Mean of sum_{xi < eps} xi^p over the truncated-away part of PP(m).
inline double subcutoff_moment(double m, double eps, double p) {
  return std::pow(eps, p - m) / (p - m);
}

}  // namespace detail

/// Monte Carlo E[sum eta_i^2] for PD(m); replicas of PP(m) above the
/// cutoff with the sub-cutoff mass added analytically to both sums.
template <class URBG>
MomentEstimate pd_sum_squares(double m, std::size_t replicas, double cutoff, URBG& rng) {
  if (!(m > 0.0 && m < 1.0)) throw DomainError("pd_sum_squares: need 0 < m < 1");
  if (replicas < 2) throw DomainError("pd_sum_squares: need >= 2 replicas");
  const double lambda = expected_pp_count(m, cutoff);
  if (lambda > kMaxExpectedPoints) throw CutoffTooSmallError("pd_sum_squares: cutoff over budget");
  const double c1 = detail::subcutoff_moment(m, cutoff, 1.0);
  const double c2 = detail::subcutoff_moment(m, cutoff, 2.0);
  std::poisson_distribution<long long> count(lambda);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> vals(replicas);
  for (auto& v : vals) {
    const long long k = count(rng);
    double s1 = 0.0, s2 = 0.0;
    for (long long j = 0; j < k; ++j) {
      const double p = cutoff * std::pow(1.0 - unif(rng), -1.0 / m);
      s1 += p;
      s2 += p * p;
    }
    const double z = s1 + c1;
    v = (s2 + c2) / (z * z);
  }
  return detail::summarize(vals);
}

/// A law of i.i.d. pairs (U, V) with V >= 1, together with closed-form
/// fractional moments.  The moment evaluators take the real exponent s.
struct PairLaw {
  std::function<std::pair<double, double>(RandomStream&)> draw;
  std::function<double(double)> moment_v;    // E[V^s]
  std::function<double(double)> moment_uv;   // E[U V^s]
  std::function<double(double)> moment_u2v;  // E[U^2 V^s]
};

/// U = V = 1 identically.
inline PairLaw pair_law_unit() {
  return {[](RandomStream&) { return std::pair<double, double>{1.0, 1.0}; },
          [](double) { return 1.0; },
          [](double) { return 1.0; },
          [](double) { return 1.0; }};
}

/// U = sinh(b g1) sinh(b g2), V = cosh(b g1) cosh(b g2), g_i iid N(0,1).
/// By independence and parity: E[U V^s] = 0, E[V^s] = E[cosh^s]^2, and
/// E[U^2 V^s] = E[sinh^2 cosh^s]^2 = E[tanh^2 cosh^{s+2}]^2.
inline PairLaw pair_law_cosh_sinh(double beta,
                                  const GaussHermite& rule = GaussHermite::cached()) {
  if (!(beta >= 0.0)) throw DomainError("pair_law_cosh_sinh: beta must be >= 0");
  const auto ecosh = [&rule, beta](double s) { return cavity_moments(beta, s, rule).a; };
  const auto etanh2cosh = [&rule, beta](double s) { return cavity_moments(beta, s, rule).c; };
  return {[beta](RandomStream& rng) {
            std::normal_distribution<double> normal(0.0, 1.0);
            const double e1 = std::exp(beta * normal(rng));
            const double e2 = std::exp(beta * normal(rng));
            const double u = 0.25 * (e1 - 1.0 / e1) * (e2 - 1.0 / e2);
            const double v = 0.25 * (e1 + 1.0 / e1) * (e2 + 1.0 / e2);
            return std::pair<double, double>{u, v};
          },
          [ecosh](double s) { const double a = ecosh(s); return a * a; },
          [](double) { return 0.0; },
          [etanh2cosh](double s) { const double c = etanh2cosh(s + 2.0); return c * c; }};
}

struct TalaRecord {
  double mc_estimate = 0.0;
  double std_err = 0.0;
  double closed_form = 0.0;
};

struct TalaReport {
  TalaRecord sum_ratio;       // E[sum vU / sum vV]
  TalaRecord cross_pair;      // E[sum_{a != b} v v' U U' / (sum vV)^2]
  TalaRecord diagonal_pair;   // E[sum v^2 U^2 / (sum vV)^2]
  double m = 0.0;
  double cutoff = 0.0;
  std::size_t replicas = 0;
};

/// Monte Carlo check of the three weighted-ratio identities for PP(m)
/// decorated with i.i.d. pairs:
///   E[sum vU / sum vV]                     = E[U V^{m-1}] / E[V^m]
///   E[sum_{a!=b} vv'UU' / (sum vV)^2]      = m (E[U V^{m-1}] / E[V^m])^2
///   E[sum v^2 U^2 / (sum vV)^2]            = (1-m) E[U^2 V^{m-2}] / E[V^m]
/// Sums use the analytic sub-cutoff completion (means of the truncated
/// part, which is independent of the decoration law).
inline TalaReport tala_verify(double m, const PairLaw& law, std::size_t replicas, double cutoff,
                              RandomStream& rng) {
  if (!(m > 0.0 && m < 1.0)) throw DomainError("tala_verify: need 0 < m < 1");
  if (replicas < 2) throw DomainError("tala_verify: need >= 2 replicas");
  const double lambda = expected_pp_count(m, cutoff);
  if (lambda > kMaxExpectedPoints) throw CutoffTooSmallError("tala_verify: cutoff over budget");
  const double c1 = detail::subcutoff_moment(m, cutoff, 1.0);
  const double c2 = detail::subcutoff_moment(m, cutoff, 2.0);
  const double ev = law.moment_v(1.0);
  const double eu = law.moment_uv(0.0);
  const double eu2 = law.moment_u2v(0.0);
  std::poisson_distribution<long long> count(lambda);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> r1(replicas), r2(replicas), r3(replicas);
  for (std::size_t rep = 0; rep < replicas; ++rep) {
    const long long k = count(rng);
    double su = c1 * eu, sv = c1 * ev, quu = c2 * eu2;
    for (long long j = 0; j < k; ++j) {
      const double v = cutoff * std::pow(1.0 - unif(rng), -1.0 / m);
      const auto [u, w] = law.draw(rng);
      su += v * u;
      sv += v * w;
      quu += v * v * u * u;
    }
    r1[rep] = su / sv;
    r2[rep] = (su * su - quu) / (sv * sv);
    r3[rep] = quu / (sv * sv);
  }
  TalaReport rep;
  rep.m = m;
  rep.cutoff = cutoff;
  rep.replicas = replicas;
  const double ratio = law.moment_uv(m - 1.0) / law.moment_v(m);
  const auto s1 = detail::summarize(r1);
  const auto s2 = detail::summarize(r2);
  const auto s3 = detail::summarize(r3);
  rep.sum_ratio = {s1.mean, s1.std_err, ratio};
  rep.cross_pair = {s2.mean, s2.std_err, m * ratio * ratio};
  rep.diagonal_pair = {s3.mean, s3.std_err, (1.0 - m) * law.moment_u2v(m - 2.0) / law.moment_v(m)};
  return rep;
}

struct PpCompareReport {
  double stat_sum_sq = 0.0;
  double stat_sum_cube = 0.0;
  double ref_mean_sq = 0.0;
  double ref_se_sq = 0.0;
  double ref_mean_cube = 0.0;
  double ref_se_cube = 0.0;
  double max_point_pvalue = 0.0;  // upper-tail rank of the largest weight
  std::size_t replicas = 0;
};

/// Compare an empirical normalized weight vector against Monte Carlo
/// reference statistics of PD(m): second and third moment sums plus the
/// rank of the largest weight among reference largest weights.
template <class URBG>
PpCompareReport pp_compare(std::span<const double> weights, double m, std::size_t replicas,
                           URBG& rng, double cutoff = 0.0) {
  if (!(m > 0.0 && m < 1.0)) throw DomainError("pp_compare: need 0 < m < 1");
  if (replicas < 2) throw DomainError("pp_compare: need >= 2 replicas");
  std::size_t nonzero = 0;
  double total = 0.0, ssq = 0.0, scube = 0.0, wmax = 0.0;
  for (const double w : weights) {
    if (w < 0.0) throw DomainError("pp_compare: negative weight");
    nonzero += (w > 0.0);
    total += w;
    ssq += w * w;
    scube += w * w * w;
    wmax = std::max(wmax, w);
  }
  if (nonzero < 2) throw DegenerateWeightsError("pp_compare: fewer than 2 nonzero weights");
  if (std::fabs(total - 1.0) > 1e-8) throw DomainError("pp_compare: weights must sum to 1");

  if (cutoff <= 0.0) cutoff = default_pp_cutoff(m);
  const double lambda = expected_pp_count(m, cutoff);
  if (lambda > kMaxExpectedPoints) throw CutoffTooSmallError("pp_compare: cutoff over budget");
  const double c1 = detail::subcutoff_moment(m, cutoff, 1.0);
  const double c2 = detail::subcutoff_moment(m, cutoff, 2.0);
  const double c3 = detail::subcutoff_moment(m, cutoff, 3.0);
  std::poisson_distribution<long long> count(lambda);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> ref_sq(replicas), ref_cube(replicas);
  std::size_t n_ge = 0;
  for (std::size_t rep = 0; rep < replicas; ++rep) {
    const long long k = count(rng);
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, top = 0.0;
    for (long long j = 0; j < k; ++j) {
      const double p = cutoff * std::pow(1.0 - unif(rng), -1.0 / m);
      s1 += p;
      s2 += p * p;
      s3 += p * p * p;
      top = std::max(top, p);
    }
    const double z = s1 + c1;
    ref_sq[rep] = (s2 + c2) / (z * z);
    ref_cube[rep] = (s3 + c3) / (z * z * z);
    n_ge += (top / z >= wmax);
  }
  PpCompareReport out;
  out.stat_sum_sq = ssq;
  out.stat_sum_cube = scube;
  const auto msq = detail::summarize(ref_sq);
  const auto mcube = detail::summarize(ref_cube);
  out.ref_mean_sq = msq.mean;
  out.ref_se_sq = msq.std_err;
  out.ref_mean_cube = mcube.mean;
  out.ref_se_cube = mcube.std_err;
  out.max_point_pvalue = double(n_ge + 1) / double(replicas + 1);
  out.replicas = replicas;
  return out;
}

}  // namespace remglass
