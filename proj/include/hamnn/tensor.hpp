#pragma once

#include <cstddef>
#include <vector>

namespace hamnn {

// Dense row-major array of 64-bit floats. The single carrier for features,
// parameters, gradients and momentum buffers. Invariant: product of shape
// equals data length.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vec(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor zeros_like(const Tensor& other);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  // Rank-2 accessors; throw shape_error when the tensor is not a matrix.
  std::size_t rows() const;
  std::size_t cols() const;
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Standard matrix product, a[m x k] * b[k x n] -> [m x n].
Tensor matmul(const Tensor& a, const Tensor& b);
// a^T * b with a[k x m], b[k x n] -> [m x n].
Tensor matmul_transpose_a(const Tensor& a, const Tensor& b);
// a * b^T with a[m x k], b[n x k] -> [m x n].
Tensor matmul_transpose_b(const Tensor& a, const Tensor& b);

// Sum of squared entries; 0 for the empty tensor.
double squared_norm(const Tensor& t);

// y += alpha * x, elementwise; shapes must agree.
void axpy(double alpha, const Tensor& x, Tensor& y);

}  // namespace hamnn
