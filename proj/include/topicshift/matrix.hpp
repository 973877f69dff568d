#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace topicshift {

/// Probability vector over the nodes of one side of the graph.
using ScoreVector = std::vector<double>;

/// Small dense row-major matrix. The rerank problems are at most a few
/// dozen nodes per side, so nothing here is sparse.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return values_; }

  double column_sum(std::size_t c) const;
  Matrix transposed() const;

  /// this * v
  std::vector<double> apply(std::span<const double> v) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

}  // namespace topicshift
