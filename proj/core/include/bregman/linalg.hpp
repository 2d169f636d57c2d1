#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bregman/errors.hpp"

namespace bregman {

/// Dense 64-bit float vector. Fixed length, finite entries.
using Vector = std::vector<double>;

/// Row-major dense 64-bit float matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Inner product. Throws DimensionError on length mismatch.
double dot(std::span<const double> a, std::span<const double> b);

double squared_norm(std::span<const double> v);
double norm(std::span<const double> v);

/// Returns v / ||v||. Throws DegenerateInputError when ||v|| is not positive.
Vector l2_normalize(std::span<const double> v);

/// Throws NumericError naming `what` if any entry is NaN or infinite.
void check_finite(std::span<const double> values, const std::string& what);

bool all_finite(std::span<const double> values);

}  // namespace bregman
