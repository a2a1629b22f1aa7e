#pragma once

// Discrete ND matrix from a voltage frame by boundary quadrature, and its
// inversion to the discrete DN matrix.

#include <Eigen/SVD>
#include <string>

#include "dbar/errors.hpp"
#include "dbar/geometry.hpp"
#include "dbar/patterns.hpp"
#include "dbar/types.hpp"

namespace dbar {

template <typename Scalar>
struct NDMatrix {
  Matrix<Scalar> entries;  // N x N
  int frame_index = 0;
  Scalar condition = Scalar(0);
};

template <typename Scalar>
struct DNMatrix {
  Matrix<Scalar> entries;  // N x N
  int frame_index = 0;
  Scalar condition = Scalar(0);  // condition of the inverted ND matrix
};

/// R(m,n) = (1/A) sum_l tau_l dtheta_l J^m_l V^n_l  =  sum_l w_l J^m_l V^n_l.
template <typename Scalar>
NDMatrix<Scalar> nd_matrix(const CurrentPatternSet<Scalar>& set, const VoltageFrame<Scalar>& frame,
                           const NormalizedDomain<Scalar>& geom) {
  if (frame.values.rows() != set.L || frame.values.cols() != set.pattern_count())
    throw InputError("voltage frame dimensions do not match the pattern set");
  if (geom.electrodes.count != set.L)
    throw InputError("geometry electrode count does not match the pattern set");
  NDMatrix<Scalar> nd;
  nd.frame_index = frame.frame_index;
  nd.entries = set.basis.transpose() * set.weights.asDiagonal() * frame.values;
  if (!nd.entries.allFinite()) throw NumericalError("non-finite entries in ND matrix");
  Eigen::JacobiSVD<Matrix<Scalar>> svd(nd.entries);
  const auto& sv = svd.singularValues();
  nd.condition = sv(0) / sv(sv.size() - 1);
  return nd;
}

/// L = R^{-1} by dense LU, optionally symmetrizing R as (R + R^T)/2 first.
template <typename Scalar>
DNMatrix<Scalar> dn_from_nd(const NDMatrix<Scalar>& nd, bool symmetrize = true) {
  Matrix<Scalar> R = nd.entries;
  if (symmetrize) R = ((R + R.transpose()) / Scalar(2)).eval();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(R);
  const auto& sv = svd.singularValues();
  const Scalar cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                            : std::numeric_limits<Scalar>::infinity();
  if (!(cond < Scalar(1e12)))
    throw NumericalError("ND matrix is numerically singular (condition " + std::to_string(cond) +
                         "), cannot form DN matrix");
  DNMatrix<Scalar> dn;
  dn.frame_index = nd.frame_index;
  dn.condition = cond;
  dn.entries = Eigen::PartialPivLU<Matrix<Scalar>>(R).inverse();
  if (!dn.entries.allFinite()) throw NumericalError("non-finite entries in DN matrix");
  return dn;
}

}  // namespace dbar
