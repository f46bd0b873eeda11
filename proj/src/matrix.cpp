#include "codedbbo/matrix.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

namespace codedbbo {

Vector multiply(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw std::invalid_argument("matrix-vector shape mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
  return y;
}

Vector multiply_transposed(const Matrix& a, std::span<const double> y) {
  if (y.size() != a.rows()) throw std::invalid_argument("matrix-vector shape mismatch");
  Vector x(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) x[c] += row[c] * y[r];
  }
  return x;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot product length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = scale * normal(gen);
  return m;
}

namespace {

std::vector<double> parse_row(const std::string& line, const std::filesystem::path& path,
                              std::size_t line_no) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    std::size_t b = pos, e = end;
    while (b < e && (line[b] == ' ' || line[b] == '\t')) ++b;
    while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t' || line[e - 1] == '\r')) --e;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data() + b, line.data() + e, v);
    if (ec != std::errc{} || ptr != line.data() + e || b == e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed number '" + line.substr(b, e - b) + "'");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

}  // namespace

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    rows.push_back(parse_row(line, path, line_no));
    if (rows.back().size() != rows.front().size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": empty matrix file");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

Vector read_csv_vector(const std::filesystem::path& path) {
  Matrix m = read_csv_matrix(path);
  if (m.rows() != 1 && m.cols() != 1) {
    throw std::runtime_error(path.string() + ": expected a single row or column");
  }
  return m.data();
}

}  // namespace codedbbo
