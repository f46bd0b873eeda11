#pragma once

#include <cstdint>
#include <random>

namespace codedbbo {

enum class Stream : std::uint32_t { diag_signs = 1, runtimes = 2 };

/// Independent per-iteration seed for one random stream of an experiment.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t iteration, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(iteration >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace codedbbo
