#include "hgcr/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace hgcr::linalg {

Mat matmul(const Mat& a, const Mat& b) {
  assert(a.cols() == b.rows());
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        c.at(i, j) += aik * b.at(k, j);
      }
    }
  }
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  assert(a.rows() == b.rows());
  Mat c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      double aki = a.at(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        c.at(i, j) += aki * b.at(k, j);
      }
    }
  }
  return c;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  assert(a.cols() == b.cols());
  Mat c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        s += a.at(i, k) * b.at(j, k);
      }
      c.at(i, j) = s;
    }
  }
  return c;
}

void add_inplace(Mat& a, const Mat& b) {
  assert(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

void scale_inplace(Mat& a, double s) {
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] *= s;
}

void axpy_inplace(Mat& a, double s, const Mat& b) {
  assert(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += s * b.data()[i];
}

Mat slice_cols(const Mat& a, std::size_t col0, std::size_t width) {
  Mat out(a.rows(), width);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out.at(i, j) = a.at(i, col0 + j);
    }
  }
  return out;
}

void add_into_cols(Mat& dst, std::size_t col0, const Mat& src) {
  assert(dst.rows() == src.rows());
  for (std::size_t i = 0; i < src.rows(); ++i) {
    for (std::size_t j = 0; j < src.cols(); ++j) {
      dst.at(i, col0 + j) += src.at(i, j);
    }
  }
}

Mat softmax_rows(const Mat& scores) {
  Mat out(scores.rows(), scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double mx = scores.at(i, 0);
    for (std::size_t j = 1; j < scores.cols(); ++j) mx = std::max(mx, scores.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < scores.cols(); ++j) {
      double e = std::exp(scores.at(i, j) - mx);
      out.at(i, j) = e;
      sum += e;
    }
    for (std::size_t j = 0; j < scores.cols(); ++j) out.at(i, j) /= sum;
  }
  return out;
}

Mat softmax_rows_backward(const Mat& a, const Mat& da) {
  assert(a.same_shape(da));
  Mat ds(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) inner += da.at(i, j) * a.at(i, j);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      ds.at(i, j) = a.at(i, j) * (da.at(i, j) - inner);
    }
  }
  return ds;
}

}  // namespace hgcr::linalg
