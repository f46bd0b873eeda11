#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "codedbbo/code_construction.hpp"
#include "codedbbo/matrix.hpp"

namespace codedbbo {

/// The N encoded perturbation directions (rows of an N x d matrix) and the
/// Rademacher diagonal used to build them.
struct DirectionSet {
  CodeConfig config;
  Matrix directions;
  std::vector<double> diag_signs;
};

/// Worker outputs with per-worker availability; values[i] is meaningful only
/// when available[i] is set.
struct ErasedOutputs {
  std::vector<double> values;
  std::vector<bool> available;

  [[nodiscard]] std::size_t count_available() const;
  static ErasedOutputs all_available(std::vector<double> values);
};

/// Thrown by decode when the availability pattern leaves information channels
/// unresolved.
class NotDecodableError : public std::runtime_error {
 public:
  explicit NotDecodableError(std::vector<std::size_t> failed_channels);
  [[nodiscard]] const std::vector<std::size_t>& failed_channels() const { return failed_; }

 private:
  std::vector<std::size_t> failed_;
};

/// Applies the log2(N) butterfly levels to an N x d block of input vectors.
[[nodiscard]] Matrix encode(const CodeConfig& config, const Matrix& inputs);

/// Same transform on N scalars, in place.
void encode_values(std::span<double> values);

[[nodiscard]] DirectionSet make_direction_set(const CodeConfig& config,
                                              std::span<const double> diag_signs);

/// Runs the successive-cancellation schedule on indicators only.
[[nodiscard]] bool check_decodability(const CodeConfig& config, const std::vector<bool>& available);

/// Recovers the d information-channel values, in coordinate order, from the
/// available outputs. Throws NotDecodableError listing every information
/// channel that could not be resolved.
[[nodiscard]] Vector decode(const CodeConfig& config, const ErasedOutputs& outputs);

}  // namespace codedbbo
