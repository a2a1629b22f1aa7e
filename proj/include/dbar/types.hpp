#pragma once

#include <Eigen/Dense>
#include <complex>

namespace dbar {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ComplexMatrix = Matrix<std::complex<Scalar>>;
template <typename Scalar>
using ComplexVector = Vector<std::complex<Scalar>>;
template <typename Scalar>
using Points2 = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using IndexVector = Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1>;

}  // namespace dbar
