#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace safecrl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Central numeric tolerances. All arithmetic is double precision.
namespace tol {
inline constexpr double kFiniteDiffRel = 1e-4;   // gradient checks vs central differences
inline constexpr double kLinearSlack = 1e-8;     // slack on linearized constraint arithmetic
inline constexpr double kTrustRegion = 1e-6;     // relative overshoot allowed on xᵀHx ≤ 2δ
inline constexpr double kExact = 1e-12;          // "bit-level" comparisons after round trips
}  // namespace tol

/// Raised on dimension mismatches and invalid configuration values.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a numerical routine encounters non-finite values.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent deterministic RNG stream derived from (seed, salt).
inline Rng make_stream(uint64_t seed, uint64_t salt) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(salt * 0x9e3779b97f4a7c15ull + 1)));
}

/// Shortest decimal string that round-trips the double exactly.
std::string format_double(double v);

}  // namespace safecrl
