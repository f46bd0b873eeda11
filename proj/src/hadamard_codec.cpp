#include "codedbbo/hadamard_codec.hpp"

#include <algorithm>
#include <string>

#include "codedbbo/butterfly.hpp"

namespace codedbbo {

std::size_t ErasedOutputs::count_available() const {
  return static_cast<std::size_t>(std::count(available.begin(), available.end(), true));
}

ErasedOutputs ErasedOutputs::all_available(std::vector<double> values) {
  ErasedOutputs out;
  out.available.assign(values.size(), true);
  out.values = std::move(values);
  return out;
}

namespace {

std::string describe_failure(const std::vector<std::size_t>& failed) {
  std::string msg = "outputs are not decodable; unresolved information channels:";
  for (auto c : failed) msg += " " + std::to_string(c);
  return msg;
}

}  // namespace

NotDecodableError::NotDecodableError(std::vector<std::size_t> failed_channels)
    : std::runtime_error(describe_failure(failed_channels)), failed_(std::move(failed_channels)) {}

Matrix encode(const CodeConfig& config, const Matrix& inputs) {
  if (inputs.rows() != config.n_total) {
    throw std::invalid_argument("encode: expected " + std::to_string(config.n_total) +
                                " input vectors, got " + std::to_string(inputs.rows()));
  }
  Matrix x = inputs;
  const std::size_t levels = config.levels();
  for (std::size_t level = 0; level < levels; ++level) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (!butterfly::is_upper(i, level)) continue;
      auto upper = x.row(i);
      auto lower = x.row(butterfly::partner(i, level));
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double a = upper[c];
        const double b = lower[c];
        upper[c] = a + b;
        lower[c] = a - b;
      }
    }
  }
  return x;
}

void encode_values(std::span<double> values) {
  const std::size_t levels = log2_exact(values.size());
  for (std::size_t level = 0; level < levels; ++level) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!butterfly::is_upper(i, level)) continue;
      const std::size_t k = butterfly::partner(i, level);
      const double a = values[i];
      const double b = values[k];
      values[i] = a + b;
      values[k] = a - b;
    }
  }
}

DirectionSet make_direction_set(const CodeConfig& config, std::span<const double> diag_signs) {
  if (diag_signs.size() != config.n_params) {
    throw std::invalid_argument("make_direction_set: expected " + std::to_string(config.n_params) +
                                " diagonal signs, got " + std::to_string(diag_signs.size()));
  }
  for (double s : diag_signs) {
    if (s != 1.0 && s != -1.0) throw std::invalid_argument("diagonal entries must be +1 or -1");
  }
  Matrix block(config.n_total, config.n_params);
  for (std::size_t j = 0; j < config.n_params; ++j) block(config.info_channels[j], j) = diag_signs[j];

  DirectionSet set;
  set.config = config;
  set.directions = encode(config, block);
  set.diag_signs.assign(diag_signs.begin(), diag_signs.end());
  return set;
}

namespace {

// Successive-cancellation walk over the coding circuit. Level 0 holds the
// code inputs, level `levels_` the worker outputs. With kValues=false only the
// availability indicators are tracked, which is exactly the decodability
// check; with kValues=true the same schedule also computes node values.
template <bool kValues>
class SuccessiveCancellation {
 public:
  SuccessiveCancellation(const CodeConfig& config, const std::vector<bool>& available,
                         std::span<const double> outputs)
      : n_(config.n_total),
        levels_(config.levels()),
        known_((levels_ + 1) * n_, 0) {
    if (available.size() != n_) {
      throw std::invalid_argument("expected " + std::to_string(n_) + " availability flags, got " +
                                  std::to_string(available.size()));
    }
    if constexpr (kValues) {
      if (outputs.size() != n_) {
        throw std::invalid_argument("expected " + std::to_string(n_) + " output values, got " +
                                    std::to_string(outputs.size()));
      }
      value_.assign((levels_ + 1) * n_, 0.0);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (available[i]) {
        known_[at(i, levels_)] = 1;
        if constexpr (kValues) value_[at(i, levels_)] = outputs[i];
      }
      // frozen inputs are zero and need no decoding
      if (config.is_frozen(i)) known_[at(i, 0)] = 1;
    }
  }

  /// Decodes inputs 0..N-1 in order. Returns the information channels that
  /// could not be resolved (empty on success).
  std::vector<std::size_t> run(bool stop_on_failure) {
    std::vector<std::size_t> failed;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!resolve(i, 0)) {
        failed.push_back(i);
        if (stop_on_failure) return failed;
      }
      if (i % 2 == 1) propagate_forward(i);
    }
    return failed;
  }

  [[nodiscard]] double input_value(std::size_t i) const { return value_[at(i, 0)]; }

 private:
  [[nodiscard]] std::size_t at(std::size_t node, std::size_t level) const {
    return level * n_ + node;
  }

  // decodeRecursive(i, j): true once D[node, level] is known.
  bool resolve(std::size_t node, std::size_t level) {
    if (level == levels_) return known_[at(node, level)] != 0;
    if (known_[at(node, level)]) return true;

    const std::size_t other = butterfly::partner(node, level);
    const bool have_same = resolve(node, level + 1);
    const bool have_other = resolve(other, level + 1);

    if (butterfly::is_upper(node, level)) {
      if (!(have_same && have_other)) return false;
      if constexpr (kValues) {
        // p = a + b, q = a - b
        value_[at(node, level)] = 0.5 * (value_[at(node, level + 1)] + value_[at(other, level + 1)]);
      }
    } else {
      // Needs the already-decoded upper sibling plus either parent.
      if (!(have_same || have_other) || !known_[at(other, level)]) return false;
      if constexpr (kValues) {
        const double a = value_[at(other, level)];
        value_[at(node, level)] = have_other ? value_[at(other, level + 1)] - a
                                             : a - value_[at(node, level + 1)];
      }
    }
    known_[at(node, level)] = 1;
    return true;
  }

  // Re-encodes every block of the circuit whose inputs 0..last are now all
  // known, so later lower nodes find their upper siblings.
  void propagate_forward(std::size_t last) {
    for (std::size_t level = 1; level <= levels_; ++level) {
      const std::size_t width = butterfly::stride(level);
      if ((last + 1) % width != 0) break;
      const std::size_t begin = last + 1 - width;
      const std::size_t child = level - 1;
      for (std::size_t l = begin; l <= last; ++l) {
        if (known_[at(l, level)]) continue;
        const std::size_t other = butterfly::partner(l, child);
        if (!known_[at(l, child)] || !known_[at(other, child)]) continue;
        if constexpr (kValues) {
          const bool upper = butterfly::is_upper(l, child);
          const double a = value_[at(upper ? l : other, child)];
          const double b = value_[at(upper ? other : l, child)];
          value_[at(l, level)] = upper ? a + b : a - b;
        }
        known_[at(l, level)] = 1;
      }
    }
  }

  std::size_t n_;
  std::size_t levels_;
  std::vector<char> known_;
  std::vector<double> value_;
};

}  // namespace

bool check_decodability(const CodeConfig& config, const std::vector<bool>& available) {
  SuccessiveCancellation<false> sc(config, available, {});
  return sc.run(/*stop_on_failure=*/true).empty();
}

Vector decode(const CodeConfig& config, const ErasedOutputs& outputs) {
  SuccessiveCancellation<true> sc(config, outputs.available, outputs.values);
  auto failed = sc.run(/*stop_on_failure=*/false);
  if (!failed.empty()) {
    throw NotDecodableError(std::move(failed));
  }
  Vector result(config.n_params);
  for (std::size_t j = 0; j < config.n_params; ++j) result[j] = sc.input_value(config.info_channels[j]);
  return result;
}

}  // namespace codedbbo
