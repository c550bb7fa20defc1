#pragma once

// Finite-N simulation of the linear REM-type models: the 2^N pure-state
// energies H[alpha] = sum_i phi(X_{alpha,i}), their Gibbs weights, the
// centering a_N that turns exp[H - a_N] into a point process with an O(1)
// top, importance-sampled tail probabilities of a single pure state, and
// the scalar large-deviation counting diagnostic.
//
// Determinism contract: every Gaussian is counter-addressed by
// (seed, alpha, site, stream), generation may be partitioned over alpha
// blocks arbitrarily, and every reduction runs in a fixed order over the
// stored arrays, so all outputs are bit-identical at any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "remglass/errors.hpp"
#include "remglass/parisi.hpp"
#include "remglass/philox.hpp"
#include "remglass/phi_model.hpp"
#include "remglass/quadrature.hpp"
#include "remglass/stats.hpp"
#include "remglass/tilt.hpp"

namespace remglass {

inline constexpr int kMaxEnumN = 26;  // memory bound: 2^N accumulators

struct DisorderSample {
  PhiModel model;
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<double> energies;  // H[alpha], 2^n entries

  // Cavity-only per-alpha summaries.
  std::vector<double> s1;        // X_alpha / n
  std::vector<double> s2;        // (1/n) sum_i log cosh(beta g_{alpha,i})
  std::vector<double> tanh2;     // sum_i tanh^2(beta g_{alpha,i})
  std::vector<double> tanh4;     // sum_i tanh^4(beta g_{alpha,i})
};

namespace detail {

/// Visit the per-site standard normals of one pure state in site order.
/// Sites 2j and 2j+1 share Philox block j; single-site random access in
/// tanh_row uses the same mapping, so streamed and regenerated values agree
/// bit for bit.
template <class F>
inline void for_each_site_normal(std::uint64_t seed, std::uint64_t alpha, int n,
                                 std::uint32_t stream, F&& f) {
  for (int j = 0; 2 * j < n; ++j) {
    const auto z = rng::normal_pair(seed, alpha, std::uint32_t(j), stream);
    f(2 * j, z.first);
    if (2 * j + 1 < n) f(2 * j + 1, z.second);
  }
}

struct CavityAux {
  double s1 = 0.0, s2 = 0.0, tanh2 = 0.0, tanh4 = 0.0;
};

/// Energies of one pure state of the cavity model at several inverse
/// temperatures sharing the same disorder:
///   h[b] = beta_b X_alpha + sum_i log cosh(beta_b g_{alpha,i}).
/// Each h[b] is accumulated in site order independently of how many
/// temperatures ride along, so a one-temperature pass and the shared pass
/// of a temperature-chaos experiment produce identical bits.
inline void cavity_alpha_pass(std::uint64_t seed, std::uint64_t alpha, int n,
                              std::span<const double> betas, std::span<double> h,
                              CavityAux* aux) {
  const double x =
      std::sqrt(double(n)) * rng::normal_at(seed, alpha, 0, rng::kCavityFieldStream);
  for (std::size_t b = 0; b < betas.size(); ++b) h[b] = betas[b] * x;
  double lc0 = 0.0, t2 = 0.0, t4 = 0.0;
  for_each_site_normal(seed, alpha, n, rng::kSiteStream, [&](int, double g) {
    for (std::size_t b = 0; b < betas.size(); ++b) h[b] += log_cosh(betas[b] * g);
    if (aux) {
      lc0 += log_cosh(betas[0] * g);
      const double th = std::tanh(betas[0] * g);
      t2 += th * th;
      t4 += th * th * th * th;
    }
  });
  if (aux) *aux = {x / double(n), lc0 / double(n), t2, t4};
}

inline double scalar_alpha_energy(const PhiModel& model, std::uint64_t seed,
                                  std::uint64_t alpha, int n) {
  double h = 0.0;
  for_each_site_normal(seed, alpha, n, rng::kSiteStream,
                       [&](int, double g) { h += model.scalar_phi(g); });
  return h;
}

/// Run fn(alpha) over [0, count) in fixed-size blocks pulled by a worker
/// pool; blocks write disjoint output ranges, so scheduling cannot change
/// results.
template <class Fn>
inline void parallel_alpha_for(std::uint64_t count, int workers, Fn&& fn) {
  constexpr std::uint64_t kBlock = 4096;
  if (workers <= 1) {
    for (std::uint64_t a = 0; a < count; ++a) fn(a);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::uint64_t lo = next.fetch_add(kBlock);
      if (lo >= count) return;
      const std::uint64_t hi = std::min(lo + kBlock, count);
      for (std::uint64_t a = lo; a < hi; ++a) fn(a);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Generate one disorder realization.  Workers only affect wall clock.
inline DisorderSample sample_disorder(const PhiModel& model, int n, std::uint64_t seed,
                                      int workers = 1) {
  if (n < 1 || n > kMaxEnumN) throw SizeTooLargeError("sample_disorder: need 1 <= N <= 26");
  const std::uint64_t count = std::uint64_t(1) << n;
  DisorderSample d{model, n, seed, {}, {}, {}, {}, {}};
  d.energies.resize(count);
  if (model.kind() == PhiModel::Kind::Cavity) {
    d.s1.resize(count);
    d.s2.resize(count);
    d.tanh2.resize(count);
    d.tanh4.resize(count);
    const double beta = model.beta();
    detail::parallel_alpha_for(count, workers, [&](std::uint64_t a) {
      double h;
      detail::CavityAux aux;
      detail::cavity_alpha_pass(seed, a, n, {&beta, 1}, {&h, 1}, &aux);
      d.energies[a] = h;
      d.s1[a] = aux.s1;
      d.s2[a] = aux.s2;
      d.tanh2[a] = aux.tanh2;
      d.tanh4[a] = aux.tanh4;
    });
  } else {
    detail::parallel_alpha_for(count, workers, [&](std::uint64_t a) {
      d.energies[a] = detail::scalar_alpha_energy(model, seed, a, n);
    });
  }
  for (const double h : d.energies)
    if (!std::isfinite(h)) throw NonFiniteError("sample_disorder: non-finite energy");
  return d;
}

/// Regenerate the site normals of one pure state (bitwise identical to the
/// values consumed during generation).
inline void site_normals_row(const DisorderSample& d, std::uint64_t alpha,
                             std::span<double> out) {
  detail::for_each_site_normal(d.seed, alpha, d.n, rng::kSiteStream,
                               [&](int i, double g) { out[std::size_t(i)] = g; });
}

/// f_N = (1/N)(log sum_alpha e^{H[alpha]} - N log 2).
inline double finite_free_energy(const DisorderSample& d) {
  return (log_sum_exp(d.energies) - d.n * std::numbers::ln2) / double(d.n);
}

/// Centering a_N = N Gamma'(m*) + omega(N) with
/// omega(N) = -(1/m*) log sqrt(2 pi Gamma''(m*) N); by the
/// exponential-family identities Gamma'(m*) and Gamma''(m*) are the mean
/// and variance of phi under the tilted measure.
inline double centering(const PhiModel& model, int n,
                        const GaussHermite& rule = GaussHermite::cached()) {
  const RegimeSolution sol = solve_mstar(model, kRootResidualTol, rule);
  const GammaProfile p = gamma_profile(model, sol.m_star, rule);
  const double omega =
      -std::log(std::sqrt(2.0 * std::numbers::pi * p.gamma2 * double(n))) / sol.m_star;
  return double(n) * p.gamma1 + omega;
}

struct WeightProcess {
  std::vector<double> weights;         // normalized Gibbs weights, all 2^N
  std::vector<double> shifted_points;  // top-k of exp[H - a_N], sorted desc
  double a_n = std::numeric_limits<double>::quiet_NaN();
  std::size_t k = 0;
};

inline constexpr std::size_t kDefaultTopK = 1024;

/// Normalized Gibbs weights plus the top-k shifted points exp[H - a_N]
/// (shifted points only exist in the low-temperature regime, where a_N is
/// defined).
inline WeightProcess gibbs_weights(const DisorderSample& d, std::size_t k = kDefaultTopK,
                                   const GaussHermite& rule = GaussHermite::cached()) {
  WeightProcess wp;
  wp.k = k;
  const double lse = log_sum_exp(d.energies);
  wp.weights.resize(d.energies.size());
  for (std::size_t a = 0; a < d.energies.size(); ++a)
    wp.weights[a] = std::exp(d.energies[a] - lse);
  const std::size_t keep = std::min(k, d.energies.size());
  if (keep > 0 && classify_regime(d.model, rule) == Regime::LowTemp) {
    wp.a_n = centering(d.model, d.n, rule);
    std::vector<double> top(d.energies.begin(), d.energies.end());
    std::nth_element(top.begin(), top.begin() + std::ptrdiff_t(keep - 1), top.end(),
                     std::greater<double>());
    top.resize(keep);
    std::sort(top.begin(), top.end(), std::greater<double>());
    wp.shifted_points.resize(keep);
    for (std::size_t i = 0; i < keep; ++i) wp.shifted_points[i] = std::exp(top[i] - wp.a_n);
  }
  return wp;
}

struct TailEstimate {
  double t = 0.0;
  double estimate = 0.0;  // of 2^N P[H_N(1) - a_N >= t]
  double std_err = 0.0;
  double theory = 0.0;    // (1/m*) e^{-m* t}
  std::size_t n_samples = 0;
};

/// Importance-sampled tail of a single pure state.  Draw
/// S = sum_{i<N} phi(X~_i) with X~_i tilted to G_{m*}; on {S >= a_N + t}
/// the weight exp[-m*(S - N Gamma')] accumulates
///   2^N P[S >= a_N + t]  because  N log2 + N Gamma(m*) = N m* Gamma'(m*)
/// by the entropy condition.  Valid far beyond enumeration sizes: only one
/// pure state is simulated.
inline TailEstimate tail_probability(const PhiModel& model, int n, double t,
                                     std::size_t draws, RandomStream& rng,
                                     const GaussHermite& rule = GaussHermite::cached()) {
  if (draws < 1000) throw DomainError("tail_probability: need >= 1e3 draws");
  const RegimeSolution sol = solve_mstar(model, kRootResidualTol, rule);  // NotLowTemp if high
  const GammaProfile p = gamma_profile(model, sol.m_star, rule);
  const double omega =
      -std::log(std::sqrt(2.0 * std::numbers::pi * p.gamma2 * double(n))) / sol.m_star;
  const double threshold = t + omega;  // for y = S - N Gamma'
  double sum = 0.0, sumsq = 0.0;
  std::size_t attempts = 0, accepts = 0;
  for (std::size_t j = 0; j < draws; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += detail::draw_tilted_phi(model, sol.m_star, rng, &attempts, &accepts);
    const double y = s - double(n) * p.gamma1;
    const double w = (y >= threshold) ? std::exp(-sol.m_star * y) : 0.0;
    sum += w;
    sumsq += w * w;
  }
  TailEstimate est;
  est.t = t;
  est.n_samples = draws;
  est.estimate = sum / double(draws);
  est.std_err = std::sqrt((sumsq / double(draws) - est.estimate * est.estimate) /
                          double(draws - 1));
  est.theory = std::exp(-sol.m_star * t) / sol.m_star;
  return est;
}

/// Legendre transform I(y) = sup_m (m y - Gamma(m)), the large-deviation
/// rate of H_N/N; the supremum is attained where Gamma'(m) = y.
inline double legendre_rate(const PhiModel& model, double y,
                            const GaussHermite& rule = GaussHermite::cached()) {
  double lo = -1.0, hi = 1.0;
  int guard = 0;
  while (gamma_profile(model, lo, rule).gamma1 > y) {
    lo *= 2.0;
    if (++guard > 12) throw DomainError("legendre_rate: level below the reachable range");
  }
  guard = 0;
  while (gamma_profile(model, hi, rule).gamma1 < y) {
    hi *= 2.0;
    if (++guard > 12) throw DomainError("legendre_rate: level above the reachable range");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, std::fabs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (gamma_profile(model, mid, rule).gamma1 < y ? lo : hi) = mid;
  }
  const double m = 0.5 * (lo + hi);
  return m * y - gamma_profile(model, m, rule).gamma;
}

struct LevelCount {
  std::uint64_t count = 0;
  double predicted_exponent = 0.0;  // log 2 - I(midpoint)
  double empirical_exponent = 0.0;  // (1/N) log count, -inf if count == 0
};

/// Count pure states whose energy density H/N falls in [y_lo, y_hi); the
/// scalar contraction of the empirical-measure counting bounds.
inline LevelCount level_counting(const DisorderSample& d, double y_lo, double y_hi,
                                 const GaussHermite& rule = GaussHermite::cached()) {
  if (!(y_lo < y_hi)) throw DomainError("level_counting: need y_lo < y_hi");
  LevelCount lc;
  for (const double h : d.energies) {
    const double y = h / double(d.n);
    lc.count += (y >= y_lo && y < y_hi);
  }
  lc.predicted_exponent =
      std::numbers::ln2 - legendre_rate(d.model, 0.5 * (y_lo + y_hi), rule);
  lc.empirical_exponent = lc.count > 0
                              ? std::log(double(lc.count)) / double(d.n)
                              : -std::numeric_limits<double>::infinity();
  return lc;
}

// Binary archive of a disorder realization.  Header: u32 model tag
// (0 = purerem, 1 = cavity), f64 beta, u32 N, u64 seed; payload: 2^N
// energies as little-endian f64.
inline void save_disorder(const DisorderSample& d, const std::filesystem::path& path) {
  std::uint32_t tag = 0;
  switch (d.model.kind()) {
    case PhiModel::Kind::PureRem: tag = 0; break;
    case PhiModel::Kind::Cavity: tag = 1; break;
    case PhiModel::Kind::Custom:
      throw WrongModelError("save_disorder: custom energy functions are not serializable");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("save_disorder: cannot open " + path.string());
  const double beta = d.model.beta();
  const std::uint32_t n = std::uint32_t(d.n);
  out.write(reinterpret_cast<const char*>(&tag), sizeof tag);
  out.write(reinterpret_cast<const char*>(&beta), sizeof beta);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&d.seed), sizeof d.seed);
  out.write(reinterpret_cast<const char*>(d.energies.data()),
            std::streamsize(d.energies.size() * sizeof(double)));
  if (!out) throw Error("save_disorder: write failed");
}

inline DisorderSample load_disorder(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_disorder: cannot open " + path.string());
  std::uint32_t tag = 0, n = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  in.read(reinterpret_cast<char*>(&tag), sizeof tag);
  in.read(reinterpret_cast<char*>(&beta), sizeof beta);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&seed), sizeof seed);
  if (!in || tag > 1 || n < 1 || n > std::uint32_t(kMaxEnumN))
    throw Error("load_disorder: bad header");
  DisorderSample d{tag == 0 ? PhiModel::pure_rem(beta) : PhiModel::cavity(beta),
                   int(n), seed, {}, {}, {}, {}, {}};
  d.energies.resize(std::size_t(1) << n);
  in.read(reinterpret_cast<char*>(d.energies.data()),
          std::streamsize(d.energies.size() * sizeof(double)));
  if (!in) throw Error("load_disorder: truncated payload");
  if (tag == 1) {
    // Summaries are not archived; regenerate them from the counter-based
    // disorder (same kernel as generation).
    const std::uint64_t count = d.energies.size();
    d.s1.resize(count);
    d.s2.resize(count);
    d.tanh2.resize(count);
    d.tanh4.resize(count);
    for (std::uint64_t a = 0; a < count; ++a) {
      double h;
      detail::CavityAux aux;
      detail::cavity_alpha_pass(seed, a, int(n), {&beta, 1}, {&h, 1}, &aux);
      d.s1[a] = aux.s1;
      d.s2[a] = aux.s2;
      d.tanh2[a] = aux.tanh2;
      d.tanh4[a] = aux.tanh4;
    }
  }
  return d;
}

}  // namespace remglass
