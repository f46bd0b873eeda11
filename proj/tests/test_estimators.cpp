#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "codedbbo/estimators.hpp"
#include "oracles.hpp"

using namespace codedbbo;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

Eigen::VectorXd to_eigen(const Vector& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

// A^T (A theta - b) + 4 w theta^3, computed with Eigen as an independent oracle.
Eigen::VectorXd analytic_gradient(const Matrix& a, const Vector& b, const Vector& theta, double w = 0.0) {
  const auto ae = to_eigen(a);
  const auto te = to_eigen(theta);
  Eigen::VectorXd g = ae.transpose() * (ae * te - to_eigen(b));
  for (Eigen::Index j = 0; j < g.size(); ++j) g(j) += 4.0 * w * std::pow(te(j), 3);
  return g;
}

Vector random_vector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (auto& x : v) x = g(gen);
  return v;
}

std::vector<double> random_signs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution coin;
  std::vector<double> s(n);
  for (auto& x : s) x = coin(gen) ? 1.0 : -1.0;
  return s;
}

Vector worker_outputs(const BlackBoxObjective& f, const Vector& theta, const Matrix& dirs, double delta) {
  Vector g(dirs.rows());
  for (std::size_t i = 0; i < dirs.rows(); ++i)
    g[i] = symmetric_directional_derivative(f, theta, dirs.row(i), delta);
  return g;
}

// Erase random workers one at a time while the pattern stays decodable.
std::vector<bool> random_decodable_pattern(const CodeConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<bool> avail(cfg.n_total, true);
  std::vector<std::size_t> order(cfg.n_total);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), gen);
  for (auto i : order) {
    avail[i] = false;
    if (!check_decodability(cfg, avail)) avail[i] = true;
  }
  return avail;
}

}  // namespace

TEST_CASE("symmetric directional derivative") {
  Matrix eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  const auto f = l2sq_objective(eye, {0, 0});
  for (double delta : {1e-6, 1e-3, 0.5, 3.0})
    CHECK(symmetric_directional_derivative(f, Vector{1, 2}, Vector{1, 0}, delta) == doctest::Approx(1.0).epsilon(1e-9));

  const BlackBoxObjective cube("cube", 1, [](std::span<const double> t) { return t[0] * t[0] * t[0]; });
  CHECK(symmetric_directional_derivative(cube, Vector{1}, Vector{1}, 0.1) == doctest::Approx(3.01).epsilon(1e-12));
  CHECK(cube.eval_count() == 2);

  const BlackBoxObjective wiggly("wiggly", 3, [](std::span<const double> t) { return std::sin(t[0]) * std::exp(t[1]) + t[2]; });
  CHECK(symmetric_directional_derivative(wiggly, Vector{0.3, -0.2, 4}, Vector{0, 0, 0}, 1e-3) == 0.0);

  CHECK_THROWS_AS((void)symmetric_directional_derivative(cube, Vector{1}, Vector{1}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)symmetric_directional_derivative(cube, Vector{1}, Vector{1, 1}, 0.1), std::invalid_argument);
}

TEST_CASE("finite differences") {
  const auto a = gaussian_matrix(12, 5, 101);
  const auto b = random_vector(12, 102);
  const auto theta = random_vector(5, 103);
  const auto f = l2sq_objective(a, b);
  const std::vector<std::size_t> all{0, 1, 2, 3, 4};
  const auto est = finite_difference_gradient(f, theta, 1e-2, all);
  const auto ref = analytic_gradient(a, b, theta);
  for (std::size_t j = 0; j < 5; ++j) CHECK(est.values[j] == doctest::Approx(ref(j)).epsilon(1e-9));
  CHECK(est.n_outputs_used == 5);
  CHECK_FALSE(est.decoded);
  CHECK(f.eval_count() == 10);

  const std::vector<std::size_t> first{0};
  const auto masked = finite_difference_gradient(f, theta, 1e-3, first);
  CHECK(masked.values[1] == 0.0);
  CHECK(masked.values[4] == 0.0);
  CHECK(masked.n_outputs_used == 1);

  CHECK_THROWS_AS((void)finite_difference_gradient(f, theta, 1e-3, std::vector<std::size_t>{}), std::invalid_argument);
  CHECK_THROWS_AS((void)finite_difference_gradient(f, theta, 1e-3, std::vector<std::size_t>{7}), std::invalid_argument);
}

TEST_CASE("finite differences on l1 away from kinks") {
  const auto a = gaussian_matrix(40, 6, 201);
  const auto b = random_vector(40, 202);
  const double delta = 1e-4;
  double a_inf = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (double v : a.row(r)) s += std::abs(v);
    a_inf = std::max(a_inf, s);
  }
  const auto f = l1_objective(a, b);
  int checked = 0;
  for (std::uint64_t seed = 300; checked < 5; ++seed) {
    const auto theta = random_vector(6, seed);
    const auto ae = to_eigen(a);
    const Eigen::VectorXd r = ae * to_eigen(theta) - to_eigen(b);
    if (r.cwiseAbs().minCoeff() <= delta * a_inf) continue;
    const Eigen::VectorXd sub = ae.transpose() * r.unaryExpr([](double x) { return x > 0 ? 1.0 : -1.0; });
    const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
    const auto est = finite_difference_gradient(f, theta, delta, all);
    for (std::size_t j = 0; j < 6; ++j) CHECK(est.values[j] == doctest::Approx(sub(j)).epsilon(1e-7));
    ++checked;
  }
}

TEST_CASE("straggler finite differences keep only arrived coordinates") {
  ErasedOutputs out{{1.5, 2.5, -3.0, 4.0}, {true, false, true, false}};
  const auto est = finite_difference_from_outputs(out);
  CHECK(est.values == Vector{1.5, 0.0, -3.0, 0.0});
  CHECK(est.n_outputs_used == 2);
  ErasedOutputs none{{1.0}, {false}};
  CHECK_THROWS_AS((void)finite_difference_from_outputs(none), std::invalid_argument);
}

TEST_CASE("ES: small examples") {
  Matrix e1(1, 3);
  e1(0, 0) = 1.0;
  const auto est = es_gradient(Vector{7.0}, e1, {true});
  CHECK(est.values == Vector{7.0, 0.0, 0.0});
  CHECK(est.n_outputs_used == 1);
  CHECK(est.method == EstimatorMethod::evolution_strategies);
  CHECK_THROWS_AS((void)es_gradient(Vector{7.0}, e1, {false}), std::invalid_argument);
}

TEST_CASE("ES over all Hadamard rows is exact for linear f") {
  for (std::size_t n = 1; n <= 16; n *= 2) {
    const auto h = oracles::hadamard(n);
    Matrix dirs(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) dirs(i, k) = h(i, k);
    const auto c = random_vector(n, 400 + n);
    const BlackBoxObjective linear("linear", n, [c](std::span<const double> t) { return dot(c, t); });
    const auto g = worker_outputs(linear, Vector(n, 0.3), dirs, 1e-3);
    const auto est = es_gradient(g, dirs, std::vector<bool>(n, true));
    // (1/N) H^T H c = c
    const Eigen::VectorXd ref = h.transpose() * h * to_eigen(c) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(est.values[j] == doctest::Approx(c[j]).epsilon(1e-9));
      CHECK(est.values[j] == doctest::Approx(ref(j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("ES with half of the antithetic Gaussian directions is unbiased") {
  const std::size_t d = 4;
  const auto a = gaussian_matrix(8, d, 501);
  const auto b = random_vector(8, 502);
  const auto theta = random_vector(d, 503);
  const auto grad = analytic_gradient(a, b, theta);

  std::mt19937_64 gen(504);
  std::normal_distribution<double> normal;
  const int trials = 10000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d), sumsq = Eigen::VectorXd::Zero(d);
  for (int t = 0; t < trials; ++t) {
    Matrix dirs(2 * d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t c = 0; c < d; ++c) {
        dirs(2 * i, c) = normal(gen);
        dirs(2 * i + 1, c) = -dirs(2 * i, c);
      }
    }
    std::vector<std::size_t> idx(2 * d);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), gen);
    std::vector<bool> received(2 * d, false);
    for (std::size_t i = 0; i < d; ++i) received[idx[i]] = true;
    Vector g(2 * d);
    for (std::size_t i = 0; i < 2 * d; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += grad(static_cast<Eigen::Index>(c)) * dirs(i, c);
      g[i] = acc;
    }
    const auto est = es_gradient(g, dirs, received);
    const auto e = to_eigen(est.values);
    sum += e;
    sumsq += e.cwiseProduct(e);
  }
  const Eigen::VectorXd mean = sum / trials;
  const Eigen::VectorXd var = sumsq / trials - mean.cwiseProduct(mean);
  for (std::size_t j = 0; j < d; ++j) {
    const double se = std::sqrt(var(j) / trials);
    CHECK(std::abs(mean(j) - grad(j)) <= 3.0 * se);
  }
}

TEST_CASE("coded gradient is exact for quadratics under erasures") {
  const std::size_t d = 32, n = 64;
  const auto cfg = build_config(d, n);
  const auto a = gaussian_matrix(200, d, 601);
  const auto b = random_vector(200, 602);
  const auto f = l2sq_objective(a, b);
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const auto theta = random_vector(d, 610 + trial);
    const auto dirset = make_direction_set(cfg, random_signs(d, 620 + trial));
    const auto g = worker_outputs(f, theta, dirset.directions, 1e-3);
    const auto avail = random_decodable_pattern(cfg, 630 + trial);
    REQUIRE(std::count(avail.begin(), avail.end(), false) > 0);
    const auto est = coded_gradient(dirset, ErasedOutputs{g, avail});
    const auto ref = analytic_gradient(a, b, theta);
    const double scale = ref.cwiseAbs().maxCoeff();
    for (std::size_t j = 0; j < d; ++j) CHECK(std::abs(est.values[j] - ref(j)) <= 1e-9 * scale);
    CHECK(est.decoded);
    CHECK(est.n_outputs_used == static_cast<std::size_t>(std::count(avail.begin(), avail.end(), true)));

    const std::vector<std::size_t> all = [&] {
      std::vector<std::size_t> v(d);
      for (std::size_t j = 0; j < d; ++j) v[j] = j;
      return v;
    }();
    const auto fd = finite_difference_gradient(f, theta, 1e-3, all);
    for (std::size_t j = 0; j < d; ++j) CHECK(std::abs(fd.values[j] - ref(j)) <= 1e-9 * scale);
  }
}

TEST_CASE("coded gradient: diagonal signs cancel") {
  const std::size_t d = 5, n = 8;
  const auto cfg = build_config(d, n);
  const auto a = gaussian_matrix(10, d, 701);
  const auto b = random_vector(10, 702);
  const auto theta = random_vector(d, 703);
  const auto f = l2sq_objective(a, b);

  const auto plus = make_direction_set(cfg, std::vector<double>(d, 1.0));
  const auto gp = worker_outputs(f, theta, plus.directions, 1e-3);
  const auto est_plus = coded_gradient(plus, ErasedOutputs::all_available(gp));
  CHECK(est_plus.values == decode(cfg, ErasedOutputs::all_available(gp)));

  auto signs = std::vector<double>(d, 1.0);
  signs[2] = -1.0;
  const auto flipped = make_direction_set(cfg, signs);
  const auto gf = worker_outputs(f, theta, flipped.directions, 1e-3);
  const auto est_flip = coded_gradient(flipped, ErasedOutputs::all_available(gf));
  for (std::size_t j = 0; j < d; ++j) CHECK(est_flip.values[j] == doctest::Approx(est_plus.values[j]).epsilon(1e-9));

  ErasedOutputs none{gf, std::vector<bool>(n, false)};
  CHECK_THROWS_AS((void)coded_gradient(flipped, none), NotDecodableError);
}

TEST_CASE("coded gradient error is second order in delta") {
  const std::size_t d = 32, n = 64;
  const auto cfg = build_config(d, n);
  const auto a = gaussian_matrix(200, d, 801);
  const auto b = random_vector(200, 802);
  const auto theta = random_vector(d, 803);
  const auto f = quartic_objective(a, b, 0.1);
  const auto dirset = make_direction_set(cfg, random_signs(d, 804));
  const auto avail = random_decodable_pattern(cfg, 805);
  const auto ref = analytic_gradient(a, b, theta, 0.1);

  auto error = [&](double delta) {
    const auto g = worker_outputs(f, theta, dirset.directions, delta);
    const auto est = coded_gradient(dirset, ErasedOutputs{g, avail});
    return (to_eigen(est.values) - ref).cwiseAbs().maxCoeff();
  };
  const double delta = 1e-2;
  const double ratio = error(delta) / error(delta / 2);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("estimators share worker outputs and scale linearly") {
  const std::size_t n = 16;
  const auto cfg = build_config(n, n);
  const auto dirset = make_direction_set(cfg, random_signs(n, 901));
  const auto a = gaussian_matrix(20, n, 902);
  const auto b = random_vector(20, 903);
  const auto theta = random_vector(n, 904);
  const auto f = l2sq_objective(a, b);
  const auto g = worker_outputs(f, theta, dirset.directions, 1e-3);
  const auto evals = f.eval_count();

  const std::vector<bool> all(n, true);
  const auto es = es_gradient(g, dirset.directions, all);
  const auto coded = coded_gradient(dirset, ErasedOutputs{g, all});
  const auto fd = finite_difference_from_outputs(ErasedOutputs{g, all});
  CHECK(f.eval_count() == evals);

  const double s = -2.5;
  Vector gs = g;
  for (auto& v : gs) v *= s;
  const auto es_s = es_gradient(gs, dirset.directions, all);
  const auto coded_s = coded_gradient(dirset, ErasedOutputs{gs, all});
  const auto fd_s = finite_difference_from_outputs(ErasedOutputs{gs, all});
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(es_s.values[j] == doctest::Approx(s * es.values[j]).epsilon(1e-12));
    CHECK(coded_s.values[j] == doctest::Approx(s * coded.values[j]).epsilon(1e-12));
    CHECK(fd_s.values[j] == doctest::Approx(s * fd.values[j]).epsilon(1e-12));
  }
}
