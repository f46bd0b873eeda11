#pragma once

#include <cstddef>

namespace codedbbo::butterfly {

// Circuit levels run from 0 (code inputs) to log2(N) (worker outputs). The
// kernel between level j and j+1 pairs node i with i ^ 2^j; the node with bit j
// clear is the upper node:
//   D[upper, j+1] = D[upper, j] + D[lower, j]
//   D[lower, j+1] = D[upper, j] - D[lower, j]
// Channel reliabilities and the decoder both walk this same circuit.

[[nodiscard]] constexpr std::size_t stride(std::size_t level) { return std::size_t{1} << level; }

[[nodiscard]] constexpr std::size_t partner(std::size_t node, std::size_t level) {
  return node ^ stride(level);
}

[[nodiscard]] constexpr bool is_upper(std::size_t node, std::size_t level) {
  return (node & stride(level)) == 0;
}

}  // namespace codedbbo::butterfly
