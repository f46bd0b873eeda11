#pragma once

#include <cstddef>
#include <vector>

namespace codedbbo {

inline constexpr double kDefaultDesignErasure = 0.5;

/// Frozen/information channel assignment for a length-N Hadamard-kernel code
/// carrying d perturbation coordinates.
struct CodeConfig {
  std::size_t n_total = 0;   // N, code length == number of workers
  std::size_t n_params = 0;  // d
  double design_erasure = kDefaultDesignErasure;
  std::vector<double> z_values;

  std::vector<std::size_t> frozen_set;     // ascending
  std::vector<std::size_t> info_channels;  // ascending; info_channels[j] carries coordinate j

  // channel -> coordinate, or npos for frozen channels
  std::vector<std::size_t> coordinate_of;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  [[nodiscard]] bool is_frozen(std::size_t channel) const { return coordinate_of[channel] == npos; }
  [[nodiscard]] double rate() const {
    return static_cast<double>(n_params) / static_cast<double>(n_total);
  }
  [[nodiscard]] std::size_t levels() const;
};

[[nodiscard]] bool is_power_of_two(std::size_t n);
[[nodiscard]] std::size_t log2_exact(std::size_t n);

/// Erasure parameter of every transformed channel under the BEC recursion
/// z -> (2z - z^2, z^2). The first split picks the most significant index bit,
/// so index 0 is always the least reliable channel.
[[nodiscard]] std::vector<double> bec_channel_reliabilities(std::size_t n_total, double design_erasure);

/// Indices of the `n_frozen` largest erasure parameters, ascending. Ties
/// freeze the lower index first.
[[nodiscard]] std::vector<std::size_t> select_frozen(const std::vector<double>& z_values, std::size_t n_frozen);

/// Freezes the N-d channels with the largest erasure parameter. Ties freeze the
/// lower index first.
[[nodiscard]] CodeConfig build_config(std::size_t n_params, std::size_t n_total,
                                      double design_erasure = kDefaultDesignErasure);

}  // namespace codedbbo
