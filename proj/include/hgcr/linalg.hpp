#pragma once

#include <cstddef>
#include <vector>

namespace hgcr::linalg {

/// Minimal row-major dense matrix of doubles.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::vector<double> row(std::size_t r) const {
    return {data_.begin() + r * cols_, data_.begin() + (r + 1) * cols_};
  }

  void set_row(std::size_t r, const std::vector<double>& values) {
    for (std::size_t c = 0; c < cols_; ++c) at(r, c) = values[c];
  }

  bool same_shape(const Mat& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// C = A * B
Mat matmul(const Mat& a, const Mat& b);
/// C = A^T * B
Mat matmul_tn(const Mat& a, const Mat& b);
/// C = A * B^T
Mat matmul_nt(const Mat& a, const Mat& b);

void add_inplace(Mat& a, const Mat& b);
void scale_inplace(Mat& a, double s);
void axpy_inplace(Mat& a, double s, const Mat& b);  // a += s * b

/// Column block [col0, col0 + width) of a.
Mat slice_cols(const Mat& a, std::size_t col0, std::size_t width);
/// dst[:, col0:col0+src.cols()] += src
void add_into_cols(Mat& dst, std::size_t col0, const Mat& src);

/// Row-wise softmax, numerically stabilized.
Mat softmax_rows(const Mat& scores);

/// Given softmaxed rows `a` and upstream gradient `da`, the gradient with
/// respect to the pre-softmax scores: ds_ij = a_ij * (da_ij - sum_l da_il * a_il).
Mat softmax_rows_backward(const Mat& a, const Mat& da);

}  // namespace hgcr::linalg
