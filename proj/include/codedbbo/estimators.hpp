#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "codedbbo/hadamard_codec.hpp"
#include "codedbbo/matrix.hpp"
#include "codedbbo/objectives.hpp"

namespace codedbbo {

inline constexpr double kDefaultDelta = 1e-3;

enum class EstimatorMethod { finite_differences, evolution_strategies, coded };

[[nodiscard]] std::string_view to_string(EstimatorMethod m);

struct GradientEstimate {
  Vector values;
  EstimatorMethod method = EstimatorMethod::finite_differences;
  std::size_t n_outputs_used = 0;
  bool decoded = false;
};

struct WorkerTask {
  Vector direction;
  double delta = kDefaultDelta;
};

/// (f(theta + delta v) - f(theta - delta v)) / (2 delta). Two evaluations.
[[nodiscard]] double symmetric_directional_derivative(const BlackBoxObjective& f,
                                                      std::span<const double> theta,
                                                      std::span<const double> v, double delta);

[[nodiscard]] double run_task(const BlackBoxObjective& f, std::span<const double> theta,
                              const WorkerTask& task);

/// Central differences along e_j for the listed (0-based) coordinates; all
/// other entries are zero.
[[nodiscard]] GradientEstimate finite_difference_gradient(const BlackBoxObjective& f,
                                                          std::span<const double> theta, double delta,
                                                          std::span<const std::size_t> coordinates);

/// Straggler finite differences: worker j estimated coordinate j; arrived
/// workers fill their coordinate, the rest stay zero.
[[nodiscard]] GradientEstimate finite_difference_from_outputs(const ErasedOutputs& outputs);

/// Antithetic ES average (1/|received|) sum_i g_i v_i over the received workers.
[[nodiscard]] GradientEstimate es_gradient(std::span<const double> outputs, const Matrix& directions,
                                           const std::vector<bool>& received);

/// Decodes the worker outputs and undoes the diagonal randomization.
[[nodiscard]] GradientEstimate coded_gradient(const DirectionSet& dirset, const ErasedOutputs& outputs);

}  // namespace codedbbo
