#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wigner {

using cx = std::complex<double>;

/// Identifier of an orthonormal basis vector e_id of L^2(R_+).
using BasisIndex = std::uint32_t;

/// Ordered tuple of basis indices; the key type of every sparse tensor.
using Word = std::vector<BasisIndex>;

/// Entries with magnitude below this are dropped after arithmetic.
inline constexpr double kDefaultPrune = 1e-14;

/// Default truncation budget on chaos degree.
inline constexpr std::size_t kDefaultMaxDegree = 8;

// Error taxonomy. Every failure is reported through one of these.
struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Truncation settings shared by the algebraic modules.
struct Budget {
  std::size_t max_degree = kDefaultMaxDegree;
  double prune = kDefaultPrune;
};

inline std::string to_string(const Word& w) {
  std::string s = "(";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(w[i]);
  }
  return s + ")";
}

}  // namespace wigner
