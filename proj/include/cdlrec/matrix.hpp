#pragma once

#include <cstddef>
#include <vector>

namespace cdlrec {

// Row-major dense matrix of doubles; carrier for all network parameters.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool operator==(const Matrix&) const = default;
};

}  // namespace cdlrec
