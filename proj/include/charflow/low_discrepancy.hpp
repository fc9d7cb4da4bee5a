#pragma once

#include <array>
#include <cstdint>

namespace charflow {

// Radical inverse of index in the given base; van der Corput for base 2.
inline double radical_inverse(std::uint64_t index, unsigned base) {
  const double inv_base = 1.0 / base;
  double inv = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * inv;
    index /= base;
    inv *= inv_base;
  }
  return result;
}

inline double van_der_corput(std::uint64_t index) { return radical_inverse(index, 2); }

// Point `index` of the 4-dimensional Halton sequence (bases 2,3,5,7).
inline std::array<double, 4> halton4(std::uint64_t index) {
  return {radical_inverse(index, 2), radical_inverse(index, 3), radical_inverse(index, 5),
          radical_inverse(index, 7)};
}

inline std::array<double, 2> halton2(std::uint64_t index) {
  return {radical_inverse(index, 2), radical_inverse(index, 3)};
}

}  // namespace charflow
