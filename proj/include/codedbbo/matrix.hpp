#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace codedbbo {

using Vector = std::vector<double>;

/// Dense row-major matrix. Rows double as vectors in R^cols (directions,
/// input blocks) so most callers only touch row().
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  [[nodiscard]] const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

[[nodiscard]] Vector multiply(const Matrix& a, std::span<const double> x);
[[nodiscard]] Vector multiply_transposed(const Matrix& a, std::span<const double> y);
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);

/// i.i.d. standard normal entries scaled by `scale`, from a 64-bit seed.
[[nodiscard]] Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                     double scale = 1.0);

// CSV fixtures: one row per line, comma separated decimal floats.
[[nodiscard]] Matrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);

/// Reads a vector stored either as a single CSV row or as a single column.
[[nodiscard]] Vector read_csv_vector(const std::filesystem::path& path);

}  // namespace codedbbo
