#pragma once

#include <stdexcept>
#include <string>

namespace remglass {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Log-domain accumulation overflowed or an energy function returned a
/// non-finite value.
struct NonFiniteError : Error {
  using Error::Error;
};

/// Parameter outside its documented range.
struct DomainError : Error {
  using Error::Error;
};

/// Operation requires the low-temperature regime.
struct NotLowTempError : Error {
  using Error::Error;
};

/// Root bracketing failed although the regime classification promised a
/// sign change; signals a quadrature failure.
struct NoBracketError : Error {
  using Error::Error;
};

/// Rejection sampler acceptance rate fell below the configured floor.
struct RejectionStallError : Error {
  using Error::Error;
};

/// System size exceeds the 2^N enumeration budget.
struct SizeTooLargeError : Error {
  using Error::Error;
};

/// Point-process truncation level implies more points than the memory budget.
struct CutoffTooSmallError : Error {
  using Error::Error;
};

/// Point sample is empty where a nonempty one is required.
struct EmptySampleError : Error {
  using Error::Error;
};

/// Weight vector has fewer than two nonzero entries.
struct DegenerateWeightsError : Error {
  using Error::Error;
};

/// Operation applied to the wrong model variant.
struct WrongModelError : Error {
  using Error::Error;
};

}  // namespace remglass
