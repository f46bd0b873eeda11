#include "codedbbo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace codedbbo {

BlackBoxObjective::BlackBoxObjective(std::string name, std::size_t dimension, Function f,
                                     Gradient oracle_gradient)
    : name_(std::move(name)), dimension_(dimension), f_(std::move(f)), gradient_(std::move(oracle_gradient)) {}

BlackBoxObjective::BlackBoxObjective(BlackBoxObjective&& other) noexcept
    : name_(std::move(other.name_)),
      dimension_(other.dimension_),
      f_(std::move(other.f_)),
      gradient_(std::move(other.gradient_)),
      count_(other.count_.load()) {}

void BlackBoxObjective::check_dimension(std::span<const double> theta) const {
  if (theta.size() != dimension_) {
    throw std::invalid_argument(name_ + ": expected dimension " + std::to_string(dimension_) + ", got " +
                                std::to_string(theta.size()));
  }
}

double BlackBoxObjective::evaluate(std::span<const double> theta) const {
  check_dimension(theta);
  count_.fetch_add(1, std::memory_order_relaxed);
  return f_(theta);
}

double BlackBoxObjective::peek(std::span<const double> theta) const {
  check_dimension(theta);
  return f_(theta);
}

Vector BlackBoxObjective::oracle_gradient(std::span<const double> theta) const {
  if (!gradient_) throw std::logic_error(name_ + ": no analytic gradient attached");
  check_dimension(theta);
  return gradient_(theta);
}

namespace {

void check_shapes(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("objective shape mismatch: A has " + std::to_string(a.rows()) +
                                " rows but b has " + std::to_string(b.size()) + " entries");
  }
}

Vector residual(const Matrix& a, const Vector& b, std::span<const double> theta) {
  Vector r = multiply(a, theta);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

BlackBoxObjective l1_objective(Matrix a, Vector b) {
  check_shapes(a, b);
  auto data = std::make_shared<const std::pair<Matrix, Vector>>(std::move(a), std::move(b));
  const std::size_t d = data->first.cols();
  return BlackBoxObjective(
      "l1", d,
      [data](std::span<const double> theta) {
        double s = 0.0;
        for (double r : residual(data->first, data->second, theta)) s += std::abs(r);
        return s;
      },
      [data](std::span<const double> theta) {
        Vector r = residual(data->first, data->second, theta);
        for (double& v : r) v = sign(v);
        return multiply_transposed(data->first, r);
      });
}

BlackBoxObjective l2sq_objective(Matrix a, Vector b) {
  return quartic_objective(std::move(a), std::move(b), 0.0);
}

BlackBoxObjective quartic_objective(Matrix a, Vector b, double quartic_weight) {
  check_shapes(a, b);
  auto data = std::make_shared<const std::pair<Matrix, Vector>>(std::move(a), std::move(b));
  const std::size_t d = data->first.cols();
  return BlackBoxObjective(
      quartic_weight == 0.0 ? "l2sq" : "quartic", d,
      [data, quartic_weight](std::span<const double> theta) {
        double s = 0.0;
        for (double r : residual(data->first, data->second, theta)) s += r * r;
        s *= 0.5;
        if (quartic_weight != 0.0) {
          for (double t : theta) s += quartic_weight * t * t * t * t;
        }
        return s;
      },
      [data, quartic_weight](std::span<const double> theta) {
        Vector g = multiply_transposed(data->first, residual(data->first, data->second, theta));
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += 4.0 * quartic_weight * theta[j] * theta[j] * theta[j];
        return g;
      });
}

SyntheticClassifier::SyntheticClassifier(Matrix w1, Vector c1, Matrix w2, Vector c2)
    : w1_(std::move(w1)), c1_(std::move(c1)), w2_(std::move(w2)), c2_(std::move(c2)) {
  if (c1_.size() != w1_.rows() || w2_.cols() != w1_.rows() || c2_.size() != w2_.rows()) {
    throw std::invalid_argument("classifier weight shapes are inconsistent");
  }
  if (w2_.rows() < 2) throw std::invalid_argument("classifier needs at least two classes");
}

SyntheticClassifier SyntheticClassifier::generate(std::size_t input_dim, std::size_t hidden,
                                                  std::size_t classes, std::uint64_t seed,
                                                  double w1_scale, double w2_scale) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](std::size_t rows, std::size_t cols, double scale) {
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = scale * normal(gen);
    return m;
  };
  Matrix w1 = fill(hidden, input_dim, w1_scale / std::sqrt(static_cast<double>(input_dim)));
  Matrix c1 = fill(1, hidden, 0.1);
  Matrix w2 = fill(classes, hidden, w2_scale / std::sqrt(static_cast<double>(hidden)));
  Matrix c2 = fill(1, classes, 0.1);
  return {std::move(w1), c1.data(), std::move(w2), c2.data()};
}

SyntheticClassifier SyntheticClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::size_t d = 0, h = 0, k = 0;
  char c1 = 0, c2 = 0;
  std::istringstream hs(header);
  if (!(hs >> d >> c1 >> h >> c2 >> k) || c1 != ',' || c2 != ',' || d == 0 || h == 0 || k == 0) {
    throw std::runtime_error(path.string() + ": bad model header '" + header + "'");
  }
  std::vector<Vector> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Vector row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.size() != h + 1 + k + 1) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(h + k + 2) + " weight rows");
  }
  auto take = [&](std::size_t first, std::size_t count, std::size_t cols) {
    Matrix m(count, cols);
    for (std::size_t r = 0; r < count; ++r) {
      if (rows[first + r].size() != cols) throw std::runtime_error(path.string() + ": ragged weight row");
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[first + r][c];
    }
    return m;
  };
  Matrix w1 = take(0, h, d);
  Matrix b1 = take(h, 1, h);
  Matrix w2 = take(h + 1, k, h);
  Matrix b2 = take(h + 1 + k, 1, k);
  return {std::move(w1), b1.data(), std::move(w2), b2.data()};
}

void SyntheticClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << input_dim() << ',' << hidden() << ',' << classes() << '\n';
  char buf[32];
  auto put_row = [&](std::span<const double> row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  };
  for (std::size_t r = 0; r < w1_.rows(); ++r) put_row(w1_.row(r));
  put_row(c1_);
  for (std::size_t r = 0; r < w2_.rows(); ++r) put_row(w2_.row(r));
  put_row(c2_);
}

Vector SyntheticClassifier::log_probabilities(std::span<const double> x) const {
  if (x.size() != input_dim()) throw std::invalid_argument("classifier input has wrong dimension");
  Vector hidden_act = multiply(w1_, x);
  for (std::size_t i = 0; i < hidden_act.size(); ++i) hidden_act[i] = std::tanh(hidden_act[i] + c1_[i]);
  Vector logits = multiply(w2_, hidden_act);
  for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += c2_[i];
  const double top = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  for (double z : logits) norm += std::exp(z - top);
  const double log_norm = top + std::log(norm);
  for (double& z : logits) z -= log_norm;
  return logits;
}

Vector SyntheticClassifier::probabilities(std::span<const double> x) const {
  Vector p = log_probabilities(x);
  for (double& v : p) v = std::exp(v);
  return p;
}

std::size_t SyntheticClassifier::predict(std::span<const double> x) const {
  const Vector lp = log_probabilities(x);
  return static_cast<std::size_t>(std::max_element(lp.begin(), lp.end()) - lp.begin());
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double best_other(const Vector& v, std::size_t skip) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (i != skip) best = std::max(best, v[i]);
  return best;
}

void check_attack_args(const SyntheticClassifier& model, const Vector& theta0, std::size_t cls,
                       const AttackParams& params) {
  if (cls >= model.classes()) {
    throw std::invalid_argument("class index " + std::to_string(cls) + " is out of range (" +
                                std::to_string(model.classes()) + " classes)");
  }
  if (theta0.size() != model.input_dim()) throw std::invalid_argument("theta0 has wrong dimension");
  if (params.c < 0.0 || params.kappa < 0.0) throw std::invalid_argument("c and kappa must be non-negative");
}

}  // namespace

BlackBoxObjective targeted_attack_objective(std::shared_ptr<const SyntheticClassifier> model, Vector theta0,
                                            std::size_t target, AttackParams params) {
  check_attack_args(*model, theta0, target, params);
  const std::size_t d = model->input_dim();
  return BlackBoxObjective(
      "targeted_attack", d, [model, theta0 = std::move(theta0), target, params](std::span<const double> theta) {
        const Vector lp = model->log_probabilities(theta);
        double margin = 0.0;
        if (params.literal_probability_margin) {
          double best = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < lp.size(); ++i)
            if (i != target) best = std::max(best, std::exp(lp[i]));
          margin = best - lp[target];
        } else {
          margin = best_other(lp, target) - lp[target];
        }
        return squared_distance(theta, theta0) + params.c * std::max(margin, -params.kappa);
      });
}

BlackBoxObjective untargeted_attack_objective(std::shared_ptr<const SyntheticClassifier> model, Vector theta0,
                                              std::size_t true_class, AttackParams params) {
  check_attack_args(*model, theta0, true_class, params);
  const std::size_t d = model->input_dim();
  return BlackBoxObjective(
      "untargeted_attack", d,
      [model, theta0 = std::move(theta0), true_class, params](std::span<const double> theta) {
        const Vector lp = model->log_probabilities(theta);
        const double margin = lp[true_class] - best_other(lp, true_class);
        return squared_distance(theta, theta0) + params.c * std::max(margin, -params.kappa);
      });
}

}  // namespace codedbbo
