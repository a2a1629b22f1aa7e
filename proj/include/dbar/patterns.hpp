#pragma once

// Bipolar (pairwise-injection) current patterns, their orthonormalization
// under the weighted boundary inner product, and the matching voltage
// basis change.

#include <optional>
#include <string>

#include "dbar/errors.hpp"
#include "dbar/geometry.hpp"
#include "dbar/types.hpp"

namespace dbar {

template <typename Scalar>
struct CurrentPatternSet {
  Eigen::Index L = 0;
  Eigen::Index skip = 0;
  Scalar amplitude = Scalar(0);  // mA
  Matrix<Scalar> raw;            // L x N, two nonzeros per column
  Matrix<Scalar> basis;          // L x N, orthonormal under sum_l w_l u_l v_l
  Matrix<Scalar> transform;      // N x N, basis = raw * transform
  Vector<Scalar> weights;        // w_l

  Eigen::Index pattern_count() const { return raw.cols(); }
};

/// Voltage frame expressed in the orthonormal pattern basis,
/// columns re-centered to weighted mean zero.
template <typename Scalar>
struct VoltageFrame {
  Matrix<Scalar> values;  // L x N
  int frame_index = 0;
  std::optional<Scalar> timestamp;
};

/// Raw skip-alpha patterns: column m injects +amplitude at electrode m and
/// -amplitude at electrode (m + alpha + 1) mod L; N = L - alpha - 1 columns.
template <typename Scalar>
Matrix<Scalar> bipolar_patterns(Eigen::Index L, Eigen::Index skip, Scalar amplitude) {
  if (L < 4) throw InputError("bipolar patterns need L >= 4 electrodes");
  if (amplitude <= 0) throw InputError("current amplitude must be positive");
  const Eigen::Index N = L - skip - 1;
  if (skip < 0 || skip > L - 3 || N <= 0)
    throw InputError("skip " + std::to_string(skip) + " leaves no independent patterns (L=" +
                     std::to_string(L) + ")");
  Matrix<Scalar> raw = Matrix<Scalar>::Zero(L, N);
  for (Eigen::Index m = 0; m < N; ++m) {
    raw(m % L, m) = amplitude;
    raw((m + skip + 1) % L, m) = -amplitude;
  }
  return raw;
}

template <typename Scalar>
struct Orthonormalized {
  Matrix<Scalar> basis;
  Matrix<Scalar> transform;  // basis = input * transform
};

/// Modified Gram-Schmidt under the weighted inner product, columns left to
/// right, each output column sign-fixed so its first entry above 1e-12 is
/// positive. Also returns the accumulated column transform so the identical
/// linear combinations can be applied to measured voltages.
template <typename Scalar>
Orthonormalized<Scalar> orthonormalize(const Matrix<Scalar>& raw, const Vector<Scalar>& w) {
  if (w.size() != raw.rows()) throw InputError("weight vector length mismatch");
  const Eigen::Index N = raw.cols();
  Orthonormalized<Scalar> out;
  out.basis = raw;
  out.transform = Matrix<Scalar>::Identity(N, N);
  auto dot = [&](const auto& u, const auto& v) { return (w.array() * u.array() * v.array()).sum(); };
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const Scalar r = dot(out.basis.col(i), out.basis.col(j));
      out.basis.col(j) -= r * out.basis.col(i);
      out.transform.col(j) -= r * out.transform.col(i);
    }
    const Scalar nrm = std::sqrt(dot(out.basis.col(j), out.basis.col(j)));
    if (!(nrm > Scalar(1e-12)))
      throw NumericalError("degenerate current patterns: pivot norm " + std::to_string(nrm) +
                           " at column " + std::to_string(j));
    out.basis.col(j) /= nrm;
    out.transform.col(j) /= nrm;
    for (Eigen::Index l = 0; l < raw.rows(); ++l) {
      if (std::abs(out.basis(l, j)) > Scalar(1e-12)) {
        if (out.basis(l, j) < 0) {
          out.basis.col(j) = -out.basis.col(j);
          out.transform.col(j) = -out.transform.col(j);
        }
        break;
      }
    }
  }
  return out;
}

template <typename Scalar>
CurrentPatternSet<Scalar> make_pattern_set(const NormalizedDomain<Scalar>& geom,
                                           Eigen::Index skip, Scalar amplitude) {
  CurrentPatternSet<Scalar> set;
  set.L = geom.electrodes.count;
  set.skip = skip;
  set.amplitude = amplitude;
  set.weights = geom.weights();
  set.raw = bipolar_patterns<Scalar>(set.L, skip, amplitude);
  auto on = orthonormalize<Scalar>(set.raw, set.weights);
  set.basis = std::move(on.basis);
  set.transform = std::move(on.transform);
  return set;
}

/// Apply the orthonormalization's column transform to raw voltages and
/// remove the weighted mean of each column.
template <typename Scalar>
VoltageFrame<Scalar> project_voltages(const Matrix<Scalar>& raw_voltages,
                                      const CurrentPatternSet<Scalar>& set,
                                      int frame_index = 0) {
  if (raw_voltages.rows() != set.L || raw_voltages.cols() != set.pattern_count())
    throw InputError("voltage matrix is " + std::to_string(raw_voltages.rows()) + "x" +
                     std::to_string(raw_voltages.cols()) + ", expected " + std::to_string(set.L) +
                     "x" + std::to_string(set.pattern_count()));
  VoltageFrame<Scalar> frame;
  frame.frame_index = frame_index;
  frame.values = raw_voltages * set.transform;
  const Scalar wsum = set.weights.sum();
  const Vector<Scalar> mean = (set.weights.transpose() * frame.values).transpose() / wsum;
  frame.values.rowwise() -= mean.transpose();
  return frame;
}

}  // namespace dbar
