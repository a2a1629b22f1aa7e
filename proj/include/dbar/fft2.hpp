#pragma once

// 2-D complex FFT on Eigen matrices via row/column passes.
// One instance per thread; plans and scratch are reused across calls.

#include <unsupported/Eigen/FFT>

#include "dbar/types.hpp"

namespace dbar {

template <typename Scalar>
class Fft2 {
 public:
  void fwd(ComplexMatrix<Scalar>& dst, const ComplexMatrix<Scalar>& src) { run(dst, src, true); }
  void inv(ComplexMatrix<Scalar>& dst, const ComplexMatrix<Scalar>& src) { run(dst, src, false); }

 private:
  void run(ComplexMatrix<Scalar>& dst, const ComplexMatrix<Scalar>& src, bool forward) {
    const Eigen::Index n = src.rows();
    dst.resize(n, n);
    buf_.resize(n);
    res_.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      buf_ = src.col(j);
      if (forward)
        fft_.fwd(res_, buf_);
      else
        fft_.inv(res_, buf_);
      dst.col(j) = res_;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      buf_ = dst.row(i).transpose();
      if (forward)
        fft_.fwd(res_, buf_);
      else
        fft_.inv(res_, buf_);
      dst.row(i) = res_.transpose();
    }
  }

  Eigen::FFT<Scalar> fft_;
  ComplexVector<Scalar> buf_, res_;
};

}  // namespace dbar
