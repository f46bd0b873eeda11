#include "codedbbo/optimizer.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "codedbbo/seeding.hpp"

namespace codedbbo {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::fd: return "fd";
    case Method::es: return "es";
    case Method::coded: return "coded";
    case Method::hybrid: return "hybrid";
  }
  return "unknown";
}

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::gd ? "gd" : "adam"; }

std::string_view to_string(RuleKind r) {
  switch (r) {
    case RuleKind::first_k: return "first_k";
    case RuleKind::first_decodable: return "first_decodable";
    case RuleKind::all: return "all";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::fd, Method::es, Method::coded, Method::hybrid})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

std::optional<OptimizerKind> parse_optimizer(std::string_view s) {
  for (OptimizerKind k : {OptimizerKind::gd, OptimizerKind::adam})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

std::optional<RuleKind> parse_rule(std::string_view s) {
  for (RuleKind r : {RuleKind::first_k, RuleKind::first_decodable, RuleKind::all})
    if (s == to_string(r)) return r;
  return std::nullopt;
}

OptimizerState OptimizerState::start(Vector theta0, double step_size, OptimizerKind kind, AdamParams adam,
                                     Method method) {
  OptimizerState s;
  s.m.assign(theta0.size(), 0.0);
  s.v.assign(theta0.size(), 0.0);
  s.theta = std::move(theta0);
  s.step_size = step_size;
  s.kind = kind;
  s.adam = adam;
  s.method = method;
  return s;
}

namespace {

void check_gradient(const OptimizerState& state, const GradientEstimate& g) {
  if (g.values.size() != state.theta.size()) {
    throw std::invalid_argument("gradient has dimension " + std::to_string(g.values.size()) +
                                ", theta has " + std::to_string(state.theta.size()));
  }
}

}  // namespace

OptimizerState gd_step(OptimizerState state, const GradientEstimate& g) {
  check_gradient(state, g);
  for (std::size_t j = 0; j < state.theta.size(); ++j) state.theta[j] -= state.step_size * g.values[j];
  return state;
}

OptimizerState adam_step(OptimizerState state, const GradientEstimate& g) {
  check_gradient(state, g);
  if (state.m.size() != state.theta.size()) state.m.assign(state.theta.size(), 0.0);
  if (state.v.size() != state.theta.size()) state.v.assign(state.theta.size(), 0.0);
  const auto& [b1, b2, eps] = state.adam;
  ++state.t;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t j = 0; j < state.theta.size(); ++j) {
    const double gj = g.values[j];
    state.m[j] = b1 * state.m[j] + (1.0 - b1) * gj;
    state.v[j] = b2 * state.v[j] + (1.0 - b2) * gj * gj;
    const double m_hat = state.m[j] / bias1;
    const double v_hat = state.v[j] / bias2;
    state.theta[j] -= state.step_size * m_hat / (std::sqrt(v_hat) + eps);
  }
  return state;
}

OptimizerState apply_step(OptimizerState state, const GradientEstimate& g) {
  return state.kind == OptimizerKind::gd ? gd_step(std::move(state), g) : adam_step(std::move(state), g);
}

void validate(const ExperimentSettings& s) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (s.n_params == 0) fail("d must be at least 1");
  if (s.iterations == 0) fail("iterations must be at least 1");
  if (!(s.delta > 0.0)) fail("delta must be positive");
  if (!(s.step_size > 0.0)) fail("step_size must be positive");
  if (!(s.decode_cost >= 0.0)) fail("decode_cost must be non-negative");
  if (!s.theta0.empty() && s.theta0.size() != s.n_params) fail("theta0 must have d entries");
  if (!is_power_of_two(s.n_total)) fail("N must be a power of two");
  if (s.n_params > s.n_total) fail("d must not exceed N");
  if (!(s.design_erasure > 0.0 && s.design_erasure < 1.0)) fail("design_erasure must lie in (0,1)");
  if (s.method == Method::fd && s.n_total != s.n_params) {
    fail("method fd assigns one worker per coordinate, so N must equal d");
  }
  if (s.rule == RuleKind::first_k && (s.first_k < 1 || s.first_k > s.n_total)) fail("k must satisfy 1 <= k <= N");
  if (s.rule == RuleKind::first_k && (s.method == Method::coded || s.method == Method::hybrid)) {
    fail("methods coded and hybrid need rule first_decodable or all");
  }
  if (s.adam.beta1 < 0.0 || s.adam.beta1 >= 1.0 || s.adam.beta2 < 0.0 || s.adam.beta2 >= 1.0) {
    fail("ADAM betas must lie in [0,1)");
  }
  if (!(s.adam.epsilon > 0.0)) fail("adam_epsilon must be positive");
  validate(s.runtime);
}

namespace {

Vector sample_signs(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Vector signs(d);
  for (auto& s : signs) s = (gen() >> 63) ? -1.0 : 1.0;
  return signs;
}

StoppingRule make_rule(const ExperimentSettings& s, const CodeConfig& config) {
  switch (s.rule) {
    case RuleKind::first_k: return FirstK{s.first_k};
    case RuleKind::first_decodable: return FirstDecodable{config};
    case RuleKind::all: return WaitAll{};
  }
  return WaitAll{};
}

}  // namespace

std::vector<IterationTrace> run_experiment(const BlackBoxObjective& objective, const ExperimentSettings& settings,
                                           const IterateObserver& observer) {
  validate(settings);
  if (objective.dimension() != settings.n_params) {
    throw std::invalid_argument("objective dimension " + std::to_string(objective.dimension()) +
                                " does not match d=" + std::to_string(settings.n_params));
  }
  const std::size_t d = settings.n_params;
  const std::size_t n = settings.n_total;
  const CodeConfig config = build_config(d, n, settings.design_erasure);
  const StoppingRule rule = make_rule(settings, config);

  OptimizerState state =
      OptimizerState::start(settings.theta0.empty() ? Vector(d, 0.0) : settings.theta0, settings.step_size,
                            settings.optimizer, settings.adam, settings.method);

  Matrix unit_directions;
  if (settings.method == Method::fd) {
    unit_directions = Matrix(n, d);
    for (std::size_t j = 0; j < d; ++j) unit_directions(j, j) = 1.0;
  }
  const Vector frozen_signs = sample_signs(d, derive_seed(settings.seed, 0, Stream::diag_signs));

  std::vector<IterationTrace> traces;
  traces.reserve(settings.iterations);
  double elapsed = 0.0;
  Vector outputs(n);

  for (std::size_t it = 0; it < settings.iterations; ++it) {
    DirectionSet dirset;
    const Matrix* directions = &unit_directions;
    if (settings.method != Method::fd) {
      const Vector signs =
          settings.freeze_diag ? frozen_signs : sample_signs(d, derive_seed(settings.seed, it, Stream::diag_signs));
      dirset = make_direction_set(config, signs);
      directions = &dirset.directions;
    }

    for (std::size_t i = 0; i < n; ++i) {
      outputs[i] = symmetric_directional_derivative(objective, state.theta, directions->row(i), settings.delta);
    }

    const ArrivalSchedule schedule =
        sample_runtimes(settings.runtime, n, derive_seed(settings.seed, it, Stream::runtimes));
    const IterationResult arrived = run_iteration(schedule, rule, outputs);

    IterationTrace row;
    row.iteration = it;
    row.method = settings.method;
    row.delta = settings.delta;
    row.seed = settings.seed;
    row.n_outputs_used = arrived.admitted;
    double iteration_time = arrived.stop_time;

    switch (settings.method) {
      case Method::fd: {
        const GradientEstimate g = finite_difference_from_outputs(arrived.outputs);
        state = apply_step(std::move(state), g);
        break;
      }
      case Method::es: {
        const GradientEstimate g = es_gradient(arrived.outputs.values, *directions, arrived.outputs.available);
        state = apply_step(std::move(state), g);
        break;
      }
      case Method::coded: {
        const GradientEstimate g = coded_gradient(dirset, arrived.outputs);
        state = apply_step(std::move(state), g);
        row.decoded = true;
        iteration_time += settings.decode_cost;
        break;
      }
      case Method::hybrid: {
        const GradientEstimate g_dec = coded_gradient(dirset, arrived.outputs);
        const GradientEstimate g_es =
            es_gradient(arrived.outputs.values, *directions, arrived.outputs.available);
        OptimizerState via_decode = apply_step(state, g_dec);
        OptimizerState via_es = apply_step(std::move(state), g_es);
        const double f_decode = objective.evaluate(via_decode.theta);
        const double f_es = objective.evaluate(via_es.theta);
        row.decoded = f_decode <= f_es;
        state = row.decoded ? std::move(via_decode) : std::move(via_es);
        iteration_time += settings.decode_cost;
        break;
      }
    }

    elapsed += iteration_time;
    row.elapsed_time = elapsed;
    row.cost = objective.peek(state.theta);
    if (observer) observer(row, state.theta);
    traces.push_back(row);
  }
  return traces;
}

}  // namespace codedbbo
