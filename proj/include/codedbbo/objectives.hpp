#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "codedbbo/matrix.hpp"

namespace codedbbo {

/// Evaluation-only view of f: R^d -> R. Every call through evaluate() is
/// counted; peek() is for monitoring (trace costs) and does not count.
class BlackBoxObjective {
 public:
  using Function = std::function<double(std::span<const double>)>;
  using Gradient = std::function<Vector(std::span<const double>)>;

  BlackBoxObjective(std::string name, std::size_t dimension, Function f,
                    Gradient oracle_gradient = {});

  BlackBoxObjective(const BlackBoxObjective&) = delete;
  BlackBoxObjective& operator=(const BlackBoxObjective&) = delete;
  BlackBoxObjective(BlackBoxObjective&& other) noexcept;
  BlackBoxObjective& operator=(BlackBoxObjective&&) = delete;

  double evaluate(std::span<const double> theta) const;
  double peek(std::span<const double> theta) const;

  [[nodiscard]] std::uint64_t eval_count() const { return count_.load(std::memory_order_relaxed); }
  void reset_count() { count_.store(0, std::memory_order_relaxed); }

  [[nodiscard]] bool has_oracle_gradient() const { return static_cast<bool>(gradient_); }
  /// Analytic gradient for test objectives. Throws if none is attached.
  [[nodiscard]] Vector oracle_gradient(std::span<const double> theta) const;

  [[nodiscard]] std::size_t dimension() const { return dimension_; }
  [[nodiscard]] const std::string& name() const { return name_; }

 private:
  void check_dimension(std::span<const double> theta) const;

  std::string name_;
  std::size_t dimension_;
  Function f_;
  Gradient gradient_;
  mutable std::atomic<std::uint64_t> count_{0};
};

/// f(theta) = ||A theta - b||_1. The oracle gradient A^T sign(A theta - b) is
/// valid away from kinks.
[[nodiscard]] BlackBoxObjective l1_objective(Matrix a, Vector b);

/// f(theta) = 0.5 ||A theta - b||^2 with gradient A^T (A theta - b).
[[nodiscard]] BlackBoxObjective l2sq_objective(Matrix a, Vector b);

/// 0.5 ||A theta - b||^2 + quartic_weight * sum theta_j^4. Smooth but not
/// quadratic; used to measure the O(delta^2) error of the symmetric quotient.
[[nodiscard]] BlackBoxObjective quartic_objective(Matrix a, Vector b, double quartic_weight);

/// Fixed two-layer classifier: softmax(W2 tanh(W1 x + c1) + c2).
class SyntheticClassifier {
 public:
  SyntheticClassifier(Matrix w1, Vector c1, Matrix w2, Vector c2);

  /// Random weights from a seed: W1 ~ N(0, w1_scale^2 / d), W2 ~ N(0, w2_scale^2 / h).
  static SyntheticClassifier generate(std::size_t input_dim, std::size_t hidden, std::size_t classes,
                                      std::uint64_t seed, double w1_scale = 2.0,
                                      double w2_scale = 4.0);

  /// Model file layout: one line per row of W1, then c1, then W2 rows, then c2.
  /// The first line holds "input_dim,hidden,classes".
  static SyntheticClassifier load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  [[nodiscard]] Vector log_probabilities(std::span<const double> x) const;
  [[nodiscard]] Vector probabilities(std::span<const double> x) const;
  [[nodiscard]] std::size_t predict(std::span<const double> x) const;

  [[nodiscard]] std::size_t input_dim() const { return w1_.cols(); }
  [[nodiscard]] std::size_t hidden() const { return w1_.rows(); }
  [[nodiscard]] std::size_t classes() const { return w2_.rows(); }

 private:
  Matrix w1_;
  Vector c1_;
  Matrix w2_;
  Vector c2_;
};

struct AttackParams {
  double c = 0.1;
  double kappa = 0.0;
  /// Evaluate max_{i!=t} [F]_i - log [F]_t (probability minus log-probability)
  /// instead of the consistent all-log margin.
  bool literal_probability_margin = false;
};

/// ||theta - theta0||^2 + c * max{ max_{i!=t} log F_i - log F_t, -kappa }.
[[nodiscard]] BlackBoxObjective targeted_attack_objective(std::shared_ptr<const SyntheticClassifier> model,
                                                          Vector theta0, std::size_t target,
                                                          AttackParams params = {});

/// ||theta - theta0||^2 + c * max{ log F_t0 - max_{i!=t0} log F_i, -kappa }.
[[nodiscard]] BlackBoxObjective untargeted_attack_objective(
    std::shared_ptr<const SyntheticClassifier> model, Vector theta0, std::size_t true_class,
    AttackParams params = {});

}  // namespace codedbbo
