#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace multispin::detail {

/// Mixed-radix decoding of a row-major index (last digit fastest).
inline void decode_index(std::size_t index, std::span<const std::size_t> radices,
                         std::span<std::size_t> digits) {
  for (std::size_t p = radices.size(); p-- > 0;) {
    digits[p] = index % radices[p];
    index /= radices[p];
  }
}

/// Advances `digits` to the next row-major assignment; returns false on wrap.
inline bool advance(std::span<const std::size_t> radices, std::span<std::size_t> digits) {
  for (std::size_t p = radices.size(); p-- > 0;) {
    if (++digits[p] < radices[p]) return true;
    digits[p] = 0;
  }
  return false;
}

}  // namespace multispin::detail
