#include "codedbbo/estimators.hpp"

#include <stdexcept>
#include <string>

namespace codedbbo {

std::string_view to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::finite_differences: return "finite_differences";
    case EstimatorMethod::evolution_strategies: return "evolution_strategies";
    case EstimatorMethod::coded: return "coded";
  }
  return "unknown";
}

double symmetric_directional_derivative(const BlackBoxObjective& f, std::span<const double> theta,
                                        std::span<const double> v, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (v.size() != theta.size()) throw std::invalid_argument("direction and theta differ in dimension");
  Vector plus(theta.begin(), theta.end());
  Vector minus(theta.begin(), theta.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    plus[i] += delta * v[i];
    minus[i] -= delta * v[i];
  }
  return (f.evaluate(plus) - f.evaluate(minus)) / (2.0 * delta);
}

double run_task(const BlackBoxObjective& f, std::span<const double> theta, const WorkerTask& task) {
  return symmetric_directional_derivative(f, theta, task.direction, task.delta);
}

GradientEstimate finite_difference_gradient(const BlackBoxObjective& f, std::span<const double> theta,
                                            double delta, std::span<const std::size_t> coordinates) {
  if (coordinates.empty()) throw std::invalid_argument("finite differences need at least one coordinate");
  GradientEstimate est;
  est.method = EstimatorMethod::finite_differences;
  est.values.assign(theta.size(), 0.0);
  Vector unit(theta.size(), 0.0);
  for (std::size_t j : coordinates) {
    if (j >= theta.size()) throw std::invalid_argument("coordinate " + std::to_string(j) + " out of range");
    unit[j] = 1.0;
    est.values[j] = symmetric_directional_derivative(f, theta, unit, delta);
    unit[j] = 0.0;
  }
  est.n_outputs_used = coordinates.size();
  return est;
}

GradientEstimate finite_difference_from_outputs(const ErasedOutputs& outputs) {
  if (outputs.values.size() != outputs.available.size()) {
    throw std::invalid_argument("outputs and availability flags differ in length");
  }
  GradientEstimate est;
  est.method = EstimatorMethod::finite_differences;
  est.values.assign(outputs.values.size(), 0.0);
  for (std::size_t j = 0; j < outputs.values.size(); ++j) {
    if (outputs.available[j]) {
      est.values[j] = outputs.values[j];
      ++est.n_outputs_used;
    }
  }
  if (est.n_outputs_used == 0) throw std::invalid_argument("finite differences need at least one output");
  return est;
}

GradientEstimate es_gradient(std::span<const double> outputs, const Matrix& directions,
                             const std::vector<bool>& received) {
  if (outputs.size() != directions.rows() || received.size() != directions.rows()) {
    throw std::invalid_argument("es_gradient: outputs, directions and received flags differ in length");
  }
  GradientEstimate est;
  est.method = EstimatorMethod::evolution_strategies;
  est.values.assign(directions.cols(), 0.0);
  for (std::size_t i = 0; i < directions.rows(); ++i) {
    if (!received[i]) continue;
    const auto v = directions.row(i);
    for (std::size_t c = 0; c < v.size(); ++c) est.values[c] += outputs[i] * v[c];
    ++est.n_outputs_used;
  }
  if (est.n_outputs_used == 0) throw std::invalid_argument("es_gradient: no outputs received");
  const double scale = 1.0 / static_cast<double>(est.n_outputs_used);
  for (double& g : est.values) g *= scale;
  return est;
}

GradientEstimate coded_gradient(const DirectionSet& dirset, const ErasedOutputs& outputs) {
  GradientEstimate est;
  est.method = EstimatorMethod::coded;
  est.values = decode(dirset.config, outputs);
  for (std::size_t j = 0; j < est.values.size(); ++j) est.values[j] /= dirset.diag_signs[j];
  est.n_outputs_used = outputs.count_available();
  est.decoded = true;
  return est;
}

}  // namespace codedbbo
