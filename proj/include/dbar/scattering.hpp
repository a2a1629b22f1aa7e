#pragma once

// Linearized difference scattering transform on the truncated k-disk:
// boundary-exponential expansion coefficients c(k), d(k) and
// t(k) = d(k)^T (L_d - L_ref) c(k).

#include <complex>
#include <vector>

#include "dbar/dnmap.hpp"
#include "dbar/errors.hpp"
#include "dbar/geometry.hpp"
#include "dbar/kgrid.hpp"
#include "dbar/patterns.hpp"
#include "dbar/types.hpp"

namespace dbar {

/// Expansion coefficients of e^{ikz}|boundary (c) and e^{i conj(k) conj(z)}|boundary (d)
/// in the orthonormal pattern basis, for every retained k (|k| <= R).
/// Satisfies d(k) = conj(c(-k)).
template <typename Scalar>
struct ExpCoeffs {
  ComplexVector<Scalar> kpoints;      // retained grid points, scan order
  std::vector<Eigen::Index> kindex;   // flat grid index (i*M + j) per point
  ComplexMatrix<Scalar> c;            // N x K
  ComplexMatrix<Scalar> d;            // N x K
};

template <typename Scalar>
ExpCoeffs<Scalar> exp_coeffs(const ComplexVector<Scalar>& kpoints,
                             const NormalizedDomain<Scalar>& geom,
                             const CurrentPatternSet<Scalar>& set) {
  using Complex = std::complex<Scalar>;
  const Eigen::Index L = set.L;
  const Eigen::Index N = set.pattern_count();
  const Eigen::Index K = kpoints.size();
  ExpCoeffs<Scalar> out;
  out.kpoints = kpoints;
  out.c.resize(N, K);
  out.d.resize(N, K);
  // weighted basis (w_l J^m_l), projections batched over k
  Matrix<Scalar> WJ = set.weights.asDiagonal() * set.basis;  // L x N
  ComplexMatrix<Scalar> E(L, K), Econj(L, K);
  const Complex iu(0, 1);
  for (Eigen::Index q = 0; q < K; ++q) {
    const Complex k = kpoints(q);
    for (Eigen::Index l = 0; l < L; ++l) {
      const Complex z = geom.electrodes.positions(l);
      E(l, q) = std::exp(iu * k * z);
      Econj(l, q) = std::exp(iu * std::conj(k) * std::conj(z));
    }
  }
  out.c = WJ.transpose().template cast<Complex>() * E;
  out.d = WJ.transpose().template cast<Complex>() * Econj;
  return out;
}

/// Coefficients for all grid points inside the truncation disk.
template <typename Scalar>
ExpCoeffs<Scalar> exp_coeffs(const KGrid<Scalar>& grid, const NormalizedDomain<Scalar>& geom,
                             const CurrentPatternSet<Scalar>& set) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < grid.size; ++i)
    for (Eigen::Index j = 0; j < grid.size; ++j)
      if (grid.mask(i, j)) idx.push_back(i * grid.size + j);
  ComplexVector<Scalar> kp(Eigen::Index(idx.size()));
  for (Eigen::Index q = 0; q < kp.size(); ++q)
    kp(q) = grid.points(idx[q] / grid.size, idx[q] % grid.size);
  auto out = exp_coeffs<Scalar>(kp, geom, set);
  out.kindex = std::move(idx);
  return out;
}

/// t^exp_dif sampled on the k-grid; identically zero outside |k| <= R.
template <typename Scalar>
struct ScatteringField {
  ComplexMatrix<Scalar> values;  // M x M
  Scalar radius = Scalar(0);
};

template <typename Scalar>
ScatteringField<Scalar> texp_dif(const DNMatrix<Scalar>& dn, const DNMatrix<Scalar>& dn_ref,
                                 const ExpCoeffs<Scalar>& coeffs, const KGrid<Scalar>& grid) {
  using Complex = std::complex<Scalar>;
  if (dn.entries.rows() != dn_ref.entries.rows() || dn.entries.cols() != dn_ref.entries.cols())
    throw InputError("DN matrices are on different bases");
  if (coeffs.c.rows() != dn.entries.rows())
    throw InputError("expansion coefficients do not match the DN basis");
  if (coeffs.kindex.size() != size_t(coeffs.kpoints.size()))
    throw InputError("expansion coefficients carry no grid indices");

  const ComplexMatrix<Scalar> diff =
      (dn.entries - dn_ref.entries).template cast<Complex>();
  const ComplexMatrix<Scalar> MC = diff * coeffs.c;                    // N x K
  const ComplexVector<Scalar> t =
      (coeffs.d.array() * MC.array()).colwise().sum().transpose();     // K

  ScatteringField<Scalar> field;
  field.radius = grid.radius;
  field.values = ComplexMatrix<Scalar>::Zero(grid.size, grid.size);
  for (Eigen::Index q = 0; q < t.size(); ++q) {
    const Eigen::Index flat = coeffs.kindex[q];
    field.values(flat / grid.size, flat % grid.size) = t(q);
  }
  if (!field.values.allFinite()) throw NumericalError("non-finite scattering transform");
  return field;
}

}  // namespace dbar
