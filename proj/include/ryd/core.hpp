// Basic scalar types and error classes shared by every ryd header.
#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ryd {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt3 = 1.7320508075688772935;

// Bad input: malformed specs, inconsistent paths, out-of-range indices.
// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown (non-convergence, step-size collapse).  Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

// 64-bit FNV-1a, used for config hashes and artifact checksums.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace ryd
