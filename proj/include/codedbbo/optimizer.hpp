#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "codedbbo/code_construction.hpp"
#include "codedbbo/estimators.hpp"
#include "codedbbo/objectives.hpp"
#include "codedbbo/straggler_sim.hpp"

namespace codedbbo {

enum class Method { fd, es, coded, hybrid };
enum class OptimizerKind { gd, adam };
enum class RuleKind { first_k, first_decodable, all };

[[nodiscard]] std::string_view to_string(Method m);
[[nodiscard]] std::string_view to_string(OptimizerKind k);
[[nodiscard]] std::string_view to_string(RuleKind r);
[[nodiscard]] std::optional<Method> parse_method(std::string_view s);
[[nodiscard]] std::optional<OptimizerKind> parse_optimizer(std::string_view s);
[[nodiscard]] std::optional<RuleKind> parse_rule(std::string_view s);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  Vector theta;
  double step_size = 0.5;
  OptimizerKind kind = OptimizerKind::gd;
  AdamParams adam;
  Vector m;  // first moment
  Vector v;  // second moment
  std::uint64_t t = 0;
  Method method = Method::coded;

  static OptimizerState start(Vector theta0, double step_size, OptimizerKind kind, AdamParams adam = {},
                              Method method = Method::coded);
};

/// theta <- theta - step * g
[[nodiscard]] OptimizerState gd_step(OptimizerState state, const GradientEstimate& g);

/// Bias-corrected ADAM update; increments t before using it.
[[nodiscard]] OptimizerState adam_step(OptimizerState state, const GradientEstimate& g);

[[nodiscard]] OptimizerState apply_step(OptimizerState state, const GradientEstimate& g);

struct IterationTrace {
  std::size_t iteration = 0;
  double cost = 0.0;
  double elapsed_time = 0.0;  // cumulative simulated seconds
  std::size_t n_outputs_used = 0;
  bool decoded = false;
  Method method = Method::coded;
  double delta = kDefaultDelta;
  std::uint64_t seed = 0;
};

struct ExperimentSettings {
  Method method = Method::coded;
  std::size_t n_params = 0;  // d
  std::size_t n_total = 0;   // N workers
  double design_erasure = kDefaultDesignErasure;
  double delta = kDefaultDelta;
  OptimizerKind optimizer = OptimizerKind::gd;
  double step_size = 0.5;
  AdamParams adam;
  RuleKind rule = RuleKind::first_decodable;
  std::size_t first_k = 0;
  RuntimeDistribution runtime = ShiftedExponential{};
  std::size_t iterations = 1;
  std::uint64_t seed = 0;
  /// Draw the diagonal signs once instead of every iteration.
  bool freeze_diag = false;
  /// Simulated seconds charged whenever the master decodes.
  double decode_cost = 0.0;
  Vector theta0;  // empty means the origin
};

/// Throws std::invalid_argument naming the offending setting.
void validate(const ExperimentSettings& s);

/// Called after every iteration with its trace row and the new iterate.
using IterateObserver = std::function<void(const IterationTrace&, std::span<const double> theta)>;

/// Runs the master loop and returns one trace row per iteration. Every worker
/// evaluates its antithetic pair, so each iteration costs 2N evaluations
/// (plus 2 for the hybrid comparison). Trace costs are not counted.
[[nodiscard]] std::vector<IterationTrace> run_experiment(const BlackBoxObjective& objective,
                                                         const ExperimentSettings& settings,
                                                         const IterateObserver& observer = {});

}  // namespace codedbbo
