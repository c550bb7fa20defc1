#pragma once

// REM+Cavity experiments over the marginal Gibbs measure on pure states.
//
// Spins never appear explicitly: conditionally on the disorder and on a
// pure state alpha, the spins are independent with <sigma_i> =
// tanh(beta g_{alpha,i}), so overlap moments of two replicas at pure
// states (alpha, alpha') reduce to site products
//   c_i = tanh(beta g_{alpha,i}) tanh(beta' g_{alpha',i})   (alpha != alpha',
//         or tanh^2 on the diagonal at equal temperatures), with
//   E[q]   = (1/N) sum c_i
//   E[q^2] = (1/N^2) [ (sum c_i)^2 + sum (1 - c_i^2) ].
// Diagonal contributions are summed exactly over all alpha; off-diagonal
// ones are estimated by sampling pairs from the product measure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "remglass/errors.hpp"
#include "remglass/parisi.hpp"
#include "remglass/philox.hpp"
#include "remglass/rem_sim.hpp"
#include "remglass/stats.hpp"

namespace remglass {

/// Marginal Gibbs measure over pure states of the cavity model; the spin
/// trace is already folded into the summed-out energies.
inline WeightProcess marginal_gibbs(const DisorderSample& d, std::size_t k = kDefaultTopK,
                                    const GaussHermite& rule = GaussHermite::cached()) {
  if (d.model.kind() != PhiModel::Kind::Cavity)
    throw WrongModelError("marginal_gibbs: requires a cavity sample");
  return gibbs_weights(d, k, rule);
}

namespace detail {

/// Inverse-CDF sampler over a cumulative weight table.
class WeightSampler {
 public:
  explicit WeightSampler(std::span<const double> weights) : cdf_(weights.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      cdf_[i] = acc;
    }
    total_ = acc;
  }

  template <class URBG>
  std::uint64_t draw(URBG& rng) const {
    std::uniform_real_distribution<double> unif(0.0, total_);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), unif(rng));
    return std::uint64_t(it == cdf_.end() ? cdf_.size() - 1 : std::size_t(it - cdf_.begin()));
  }

 private:
  std::vector<double> cdf_;
  double total_ = 0.0;
};

/// E[q^2 | alpha, alpha'] from the site products of two tanh rows.
inline double pair_q2(std::span<const double> ta, std::span<const double> tb) {
  const int n = int(ta.size());
  double csum = 0.0, c2sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = ta[i] * tb[i];
    csum += c;
    c2sum += c * c;
  }
  return (csum * csum + double(n) - c2sum) / (double(n) * double(n));
}

inline void tanh_row(const DisorderSample& d, double beta, std::uint64_t alpha,
                     std::span<double> out) {
  for_each_site_normal(d.seed, alpha, d.n, rng::kSiteStream,
                       [&](int i, double g) { out[std::size_t(i)] = std::tanh(beta * g); });
}

}  // namespace detail

struct OverlapReport {
  double coincidence = 0.0;      // sum_alpha w_alpha^2
  double same_sector_msd = 0.0;  // <delta_{a=a'} (q - q*)^2>, exact given disorder
  double cross_sector_sq = 0.0;  // <delta_{a!=a'} q^2>, pair-sampled
  double cross_std_err = 0.0;
  double q_star_used = 0.0;
  int n = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::size_t pairs = 0;
};

inline constexpr std::size_t kDefaultOverlapPairs = 10000;

namespace detail {

/// Sample pairs (a, b) with a != b from two weight samplers; gives up once
/// the rejection budget is exhausted (essentially total coincidence).
template <class DrawA, class DrawB, class Accept>
inline std::size_t sample_distinct_pairs(std::size_t pairs, DrawA&& draw_a, DrawB&& draw_b,
                                         Accept&& accept) {
  std::size_t got = 0;
  std::size_t budget = 64 * pairs + 1024;
  while (got < pairs && budget > 0) {
    --budget;
    const std::uint64_t a = draw_a();
    const std::uint64_t b = draw_b();
    if (a == b) continue;
    accept(a, b);
    ++got;
  }
  return got;
}

}  // namespace detail

/// Quenched overlap statistics of one disorder realization.  The diagonal
/// (same pure state) part is an exact sum; the off-diagonal part samples
/// `pairs` pairs from the replicated measure conditioned on distinct pure
/// states.
inline OverlapReport overlap_stats(const DisorderSample& d, std::size_t pairs,
                                   RandomStream& rng,
                                   const GaussHermite& rule = GaussHermite::cached()) {
  if (d.model.kind() != PhiModel::Kind::Cavity)
    throw WrongModelError("overlap_stats: requires a cavity sample");
  if (classify_regime(d.model, rule) != Regime::LowTemp)
    throw NotLowTempError("overlap_stats: requires beta > beta_cr");
  const double beta = d.model.beta();
  const double qs = q_star(beta, kRootResidualTol, rule);
  const WeightProcess wp = gibbs_weights(d, 0, rule);

  OverlapReport rep;
  rep.q_star_used = qs;
  rep.n = d.n;
  rep.beta = beta;
  rep.seed = d.seed;
  rep.pairs = pairs;

  const double n = double(d.n);
  double coin = 0.0, msd = 0.0;
  for (std::size_t a = 0; a < wp.weights.size(); ++a) {
    const double w2 = wp.weights[a] * wp.weights[a];
    const double eq = d.tanh2[a] / n;
    const double eq2 = (d.tanh2[a] * d.tanh2[a] + n - d.tanh4[a]) / (n * n);
    coin += w2;
    msd += w2 * (eq2 - 2.0 * qs * eq + qs * qs);
  }
  rep.coincidence = coin;
  rep.same_sector_msd = msd;

  const double off_mass = 1.0 - coin;
  if (pairs < 2 || off_mass < 1e-12) return rep;  // a single state carries all the mass

  const detail::WeightSampler sampler(wp.weights);
  std::vector<double> ta(std::size_t(d.n)), tb(std::size_t(d.n));
  std::vector<double> q2;
  q2.reserve(pairs);
  detail::sample_distinct_pairs(
      pairs, [&] { return sampler.draw(rng); }, [&] { return sampler.draw(rng); },
      [&](std::uint64_t a, std::uint64_t b) {
        detail::tanh_row(d, beta, a, ta);
        detail::tanh_row(d, beta, b, tb);
        q2.push_back(detail::pair_q2(ta, tb));
      });
  if (q2.size() >= 2) {
    const auto mq = summarize(q2);
    rep.cross_sector_sq = off_mass * mq.mean;
    rep.cross_std_err = off_mass * mq.std_err;
  }
  return rep;
}

struct ChaosPoint {
  int n = 0;
  double mean_cross = 0.0;  // E sum_a w_beta(a) w_beta'(a) over seeds
  double se_cross = 0.0;
  double mean_cross_q2 = 0.0;  // E <delta_{a!=a'} q^2> across temperatures
  double se_cross_q2 = 0.0;
};

struct ChaosReport {
  double beta = 0.0;
  double beta_prime = 0.0;
  std::size_t seeds = 0;
  std::vector<ChaosPoint> ladder;
  double decay_fit = 0.0;     // OLS slope of log mean_cross vs N
  double decay_fit_se = 0.0;  // residual-based (dof = ladder size - 2)
};

/// Deterministic per-(size, index) experiment seed derivation shared by all
/// drivers, so experiments at equal base seeds see identical disorder.
inline std::uint64_t experiment_seed(std::uint64_t base, int n, std::uint64_t index) {
  return rng::splitmix64(base ^ (std::uint64_t(std::uint32_t(n)) << 48) ^ index);
}

/// Temperature chaos with shared disorder: for every seed ONE realization
/// of (X_alpha, g_{alpha,i}) feeds both temperatures (the counter-based
/// keying does not involve beta).  At beta' = beta the cross-coincidence
/// reproduces the coincidence of overlap_stats bit for bit.
inline ChaosReport chaos_experiment(std::span<const int> ladder, double beta,
                                    double beta_prime, std::size_t seeds,
                                    std::uint64_t base_seed,
                                    std::size_t pairs = kDefaultOverlapPairs,
                                    int workers = 1,
                                    const GaussHermite& rule = GaussHermite::cached()) {
  if (classify_regime(PhiModel::cavity(beta), rule) != Regime::LowTemp ||
      classify_regime(PhiModel::cavity(beta_prime), rule) != Regime::LowTemp)
    throw NotLowTempError("chaos_experiment: both temperatures must be low");
  if (ladder.size() < 3) throw DomainError("chaos_experiment: need a ladder of >= 3 sizes");
  if (seeds < 2) throw DomainError("chaos_experiment: need >= 2 seeds");

  const std::array<double, 2> betas{beta, beta_prime};
  ChaosReport rep;
  rep.beta = beta;
  rep.beta_prime = beta_prime;
  rep.seeds = seeds;

  std::vector<double> log_means;
  std::vector<double> xs;
  for (const int n : ladder) {
    if (n < 1 || n > kMaxEnumN) throw SizeTooLargeError("chaos_experiment: bad ladder size");
    const std::uint64_t count = std::uint64_t(1) << n;
    std::vector<double> h(count), hp(count);
    std::vector<double> cross(seeds), crossq2(seeds);
    for (std::size_t s = 0; s < seeds; ++s) {
      const std::uint64_t seed = experiment_seed(base_seed, n, s);
      detail::parallel_alpha_for(count, workers, [&](std::uint64_t a) {
        std::array<double, 2> out;
        detail::cavity_alpha_pass(seed, a, n, betas, out, nullptr);
        h[a] = out[0];
        hp[a] = out[1];
      });
      const double l = log_sum_exp(h), lp = log_sum_exp(hp);
      double c = 0.0;
      for (std::uint64_t a = 0; a < count; ++a)
        c += std::exp(h[a] - l) * std::exp(hp[a] - lp);
      cross[s] = c;

      // Off-diagonal overlap across the two temperatures.
      std::vector<double> w(count), wq(count);
      for (std::uint64_t a = 0; a < count; ++a) {
        w[a] = std::exp(h[a] - l);
        wq[a] = std::exp(hp[a] - lp);
      }
      const detail::WeightSampler sa(w), sb(wq);
      RandomStream pair_rng(rng::splitmix64(seed ^ 0xC5A5C5A5C5A5C5A5ull));
      std::vector<double> ta(std::size_t(n)), tb(std::size_t(n));
      double acc = 0.0;
      const std::size_t npairs = std::max<std::size_t>(2, pairs);
      const std::size_t got = detail::sample_distinct_pairs(
          npairs, [&] { return sa.draw(pair_rng); }, [&] { return sb.draw(pair_rng); },
          [&](std::uint64_t a, std::uint64_t b) {
            detail::for_each_site_normal(seed, a, n, rng::kSiteStream, [&](int i, double g) {
              ta[std::size_t(i)] = std::tanh(beta * g);
            });
            detail::for_each_site_normal(seed, b, n, rng::kSiteStream, [&](int i, double g) {
              tb[std::size_t(i)] = std::tanh(beta_prime * g);
            });
            acc += detail::pair_q2(ta, tb);
          });
      crossq2[s] = got > 0 ? (1.0 - c) * acc / double(got) : 0.0;
    }
    const auto mc = summarize(cross);
    const auto mq = summarize(crossq2);
    rep.ladder.push_back({n, mc.mean, mc.std_err, mq.mean, mq.std_err});
    xs.push_back(double(n));
    log_means.push_back(std::log(mc.mean));
  }
  const LineFit fit = fit_line(xs, log_means);
  rep.decay_fit = fit.slope;
  rep.decay_fit_se = fit.slope_se;
  return rep;
}

struct ConcentrationReport {
  double gibbs_mass_outside = 0.0;
  double epsilon = 0.0;
  double target_s1 = 0.0;  // m* beta, the tilted mean of the Gaussian coordinate
  double target_s2 = 0.0;  // B/A, the tilted mean of log cosh
  int n = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

/// Gibbs mass of pure states whose scalar empirical coordinates
/// (X_alpha/N, mean log cosh) sit farther than epsilon from the tilted
/// means the variational problem selects.
inline ConcentrationReport concentration(const DisorderSample& d, double epsilon,
                                         const GaussHermite& rule = GaussHermite::cached()) {
  if (d.model.kind() != PhiModel::Kind::Cavity)
    throw WrongModelError("concentration: requires a cavity sample");
  if (classify_regime(d.model, rule) != Regime::LowTemp)
    throw NotLowTempError("concentration: requires beta > beta_cr");
  if (!(epsilon > 0.0)) throw DomainError("concentration: need epsilon > 0");
  const double beta = d.model.beta();
  const RegimeSolution sol = solve_mstar(d.model, kRootResidualTol, rule);
  const CavityMoments cm = cavity_moments(beta, sol.m_star, rule);
  ConcentrationReport rep;
  rep.epsilon = epsilon;
  rep.target_s1 = sol.m_star * beta;
  rep.target_s2 = cm.b / cm.a;
  rep.n = d.n;
  rep.beta = beta;
  rep.seed = d.seed;
  const WeightProcess wp = gibbs_weights(d, 0, rule);
  double mass = 0.0;
  for (std::size_t a = 0; a < wp.weights.size(); ++a) {
    if (std::fabs(d.s1[a] - rep.target_s1) > epsilon ||
        std::fabs(d.s2[a] - rep.target_s2) > epsilon)
      mass += wp.weights[a];
  }
  rep.gibbs_mass_outside = mass;
  return rep;
}

}  // namespace remglass
