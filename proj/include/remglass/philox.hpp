#pragma once

// Counter-based random generation (Philox4x32-10).
//
// Every Gaussian consumed by the disorder models is addressed by
// (seed, alpha, site, stream), so any single value can be regenerated in
// isolation and results cannot depend on how the alpha range is split
// across workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace remglass::rng {

namespace detail {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

}  // namespace detail

/// One Philox4x32-10 block: 128 random bits from a 128-bit counter and a
/// 64-bit key.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(detail::kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(detail::kPhiloxM1) * ctr[2];
    ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
           std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
    key[0] += detail::kWeyl0;
    key[1] += detail::kWeyl1;
  }
  return ctr;
}

/// Uniform in the open interval (0,1) from 64 random bits; never 0 or 1,
/// so it is always a valid Box-Muller input.
inline double uniform_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
  return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Two independent standard normals from one keyed block (Box-Muller).
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t alpha,
                                             std::uint32_t index, std::uint32_t stream) {
  const auto out = philox4x32({std::uint32_t(alpha), std::uint32_t(alpha >> 32), index, stream},
                              {std::uint32_t(seed), std::uint32_t(seed >> 32)});
  const double u1 = uniform_open(out[0], out[1]);
  const double u2 = uniform_open(out[2], out[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

/// Single normal addressed by site index; sites 2j and 2j+1 share block j.
inline double normal_at(std::uint64_t seed, std::uint64_t alpha, std::uint32_t site,
                        std::uint32_t stream) {
  const auto z = normal_pair(seed, alpha, site >> 1, stream);
  return (site & 1u) ? z.second : z.first;
}

// Stream tags used by the disorder models.  The inverse temperature is
// deliberately not part of the key: two systems at different temperatures
// built from the same seed share their underlying Gaussians.
inline constexpr std::uint32_t kSiteStream = 0;         // X_{alpha,i} / g_{alpha,i}
inline constexpr std::uint32_t kCavityFieldStream = 1;  // X_alpha (variance-N field)

/// splitmix64; used to derive independent per-work-item seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace remglass::rng
