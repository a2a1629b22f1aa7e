#pragma once

// D-bar equation solver in the spectral variable: FFT-evaluated Cauchy
// transform, pointwise multiplier fields, a matrix-free GMRES for the
// real-linear system [I - A_R T_R conj(.)] mu = 1, and the conductivity
// evaluation sigma(z) = mu(z,0)^2.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dbar/errors.hpp"
#include "dbar/fft2.hpp"
#include "dbar/kgrid.hpp"
#include "dbar/scattering.hpp"
#include "dbar/types.hpp"

namespace dbar {

/// Green's function beta(k) = 1/(pi k) sampled at circulant difference
/// offsets (0, h, ..., up to half the kernel, then negative offsets), with
/// the zero-offset entry set to 0, plus its precomputed forward FFT.
/// Circular mode convolves on the M x M grid as in the fast formula
/// A_R w = h^2 IFFT(FFT(beta) . FFT(w)); padded mode embeds w in a 2M x 2M
/// grid so every true difference is represented without wrap-around.
template <typename Scalar>
struct GreenFFT {
  int grid_size = 0;  // M of the attached k-grid
  bool padded = false;
  ComplexMatrix<Scalar> beta;
  ComplexMatrix<Scalar> beta_hat;

  Eigen::Index kernel_size() const { return beta.rows(); }
};

template <typename Scalar>
GreenFFT<Scalar> make_green_fft(const KGrid<Scalar>& grid, bool padded) {
  GreenFFT<Scalar> g;
  g.grid_size = grid.size;
  g.padded = padded;
  const Eigen::Index n = padded ? 2 * grid.size : grid.size;
  const Scalar h = grid.step;
  auto offset = [&](Eigen::Index m) -> Scalar {
    return (m <= n / 2 ? Scalar(m) : Scalar(m) - Scalar(n)) * h;
  };
  g.beta.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::complex<Scalar> d(offset(i), offset(j));
      g.beta(i, j) = std::abs(d) < Scalar(1e-14)
                         ? std::complex<Scalar>(0, 0)
                         : Scalar(1) / (std::numbers::pi_v<Scalar> * d);
    }
  }
  Fft2<Scalar> fft;
  fft.fwd(g.beta_hat, g.beta);
  return g;
}

/// Reusable per-thread buffers for the convolution and the GMRES solve.
template <typename Scalar>
struct DbarScratch {
  Fft2<Scalar> fft;
  ComplexMatrix<Scalar> a, b;             // kernel-size convolution buffers
  ComplexMatrix<Scalar> w, r;             // grid-size fields
  std::vector<ComplexMatrix<Scalar>> krylov;
  Matrix<Scalar> hess;
  Vector<Scalar> cs, sn, g, y;
};

/// A_R w = h^2 IFFT(beta_hat . FFT(w)), returning the central M x M block
/// in padded mode.
template <typename Scalar>
void apply_cauchy(const ComplexMatrix<Scalar>& w, const GreenFFT<Scalar>& green, Scalar h,
                  DbarScratch<Scalar>& ws, ComplexMatrix<Scalar>& out) {
  const Eigen::Index m = green.grid_size;
  if (w.rows() != m || w.cols() != m)
    throw InputError("field size does not match the Green's function grid");
  const Eigen::Index n = green.kernel_size();
  if (green.padded) {
    ws.a.resize(n, n);
    ws.a.setZero();
    ws.a.block(0, 0, m, m) = w;
  } else {
    ws.a = w;
  }
  ws.fft.fwd(ws.b, ws.a);
  ws.b.array() *= green.beta_hat.array();
  ws.fft.inv(ws.a, ws.b);
  out = h * h * ws.a.block(0, 0, m, m);
}

template <typename Scalar>
ComplexMatrix<Scalar> apply_cauchy(const ComplexMatrix<Scalar>& w, const GreenFFT<Scalar>& green,
                                   Scalar h) {
  DbarScratch<Scalar> ws;
  ComplexMatrix<Scalar> out;
  apply_cauchy(w, green, h, ws, out);
  return out;
}

/// mu - A_R(rho . conj(mu)); real-linear because of the conjugation.
template <typename Scalar>
void dbar_operator(const ComplexMatrix<Scalar>& mu, const Eigen::Ref<const ComplexMatrix<Scalar>>& rho,
                   const GreenFFT<Scalar>& green, Scalar h, DbarScratch<Scalar>& ws,
                   ComplexMatrix<Scalar>& out) {
  ws.w = rho.array() * mu.conjugate().array();
  apply_cauchy(ws.w, green, h, ws, out);
  out = mu - out;
}

template <typename Scalar>
ComplexMatrix<Scalar> dbar_operator(const ComplexMatrix<Scalar>& mu,
                                    const Eigen::Ref<const ComplexMatrix<Scalar>>& rho,
                                    const GreenFFT<Scalar>& green, Scalar h) {
  DbarScratch<Scalar> ws;
  ComplexMatrix<Scalar> out;
  dbar_operator(mu, rho, green, h, ws, out);
  return out;
}

/// Multiplier fields rho(z,k) = t(k)/(4 pi conj(k)) e_{-z}(k) for every z in
/// the mesh, one column per z (flat index = row + col*M of the k-grid).
/// Zero wherever t vanishes and at grid points within 1e-14 of the origin;
/// the latter are counted when t is nonzero there (excluded singular kernel).
template <typename Scalar>
struct MultiplierField {
  ComplexMatrix<Scalar> rho;  // (M*M) x Z
  int grid_size = 0;
  int singular_excluded = 0;
};

template <typename Scalar>
MultiplierField<Scalar> multiplier_field(const ScatteringField<Scalar>& t, const KGrid<Scalar>& grid,
                                         const ComplexVector<Scalar>& zmesh) {
  using Complex = std::complex<Scalar>;
  const Eigen::Index m = grid.size;
  const Eigen::Index nk = m * m;
  MultiplierField<Scalar> field;
  field.grid_size = int(m);

  ComplexVector<Scalar> base(nk);
  Vector<Scalar> kre(nk), kim(nk);
  const Scalar four_pi = Scalar(4) * std::numbers::pi_v<Scalar>;
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index f = i + j * m;
      const Complex k = grid.points(i, j);
      const Complex tv = t.values(i, j);
      kre(f) = k.real();
      kim(f) = k.imag();
      if (tv == Complex(0, 0)) {
        base(f) = Complex(0, 0);
      } else if (std::abs(k) < Scalar(1e-14)) {
        base(f) = Complex(0, 0);
        ++field.singular_excluded;
      } else {
        base(f) = tv / (four_pi * std::conj(k));
      }
    }
  }

  field.rho.resize(nk, zmesh.size());
  Vector<Scalar> phase(nk);
  for (Eigen::Index zi = 0; zi < zmesh.size(); ++zi) {
    const Scalar zx = zmesh(zi).real(), zy = zmesh(zi).imag();
    phase = Scalar(-2) * (kre * zx - kim * zy);
    field.rho.col(zi) = base.array() * (phase.array().cos().template cast<Complex>() +
                                        Complex(0, 1) * phase.array().sin().template cast<Complex>());
  }
  return field;
}

struct GmresReport {
  int iterations = 0;
  double residual = 0;
  bool converged = false;
};

namespace detail {
template <typename Scalar>
Scalar real_dot(const ComplexMatrix<Scalar>& a, const ComplexMatrix<Scalar>& b) {
  return (a.real().array() * b.real().array() + a.imag().array() * b.imag().array()).sum();
}
}  // namespace detail

/// Full-memory GMRES for [I - A_R T_R conj(.)] mu = 1 on the real system of
/// dimension 2 M^2 (the operator is only real-linear, so Krylov coefficients
/// are taken in the real inner product over stacked [Re; Im] components).
/// `mu` carries the initial guess in and the solution out.
template <typename Scalar>
GmresReport gmres_real(ComplexMatrix<Scalar>& mu, const Eigen::Ref<const ComplexMatrix<Scalar>>& rho,
                       const GreenFFT<Scalar>& green, Scalar h, Scalar tol, int maxit,
                       DbarScratch<Scalar>& ws) {
  using detail::real_dot;
  const Eigen::Index m = green.grid_size;
  const Scalar bnorm = Scalar(m);  // right-hand side is the constant field 1

  auto check_finite = [](Scalar v) {
    if (!std::isfinite(v)) throw NumericalError("NaN/Inf encountered in GMRES iterate");
  };

  GmresReport rep;
  dbar_operator(mu, rho, green, h, ws, ws.r);
  ws.r = ComplexMatrix<Scalar>::Ones(m, m) - ws.r;
  Scalar beta = std::sqrt(real_dot(ws.r, ws.r));
  check_finite(beta);
  rep.residual = double(beta / bnorm);
  if (beta / bnorm <= tol) {
    rep.converged = true;
    return rep;
  }

  if (int(ws.krylov.size()) < maxit + 1) ws.krylov.resize(maxit + 1);
  ws.hess = Matrix<Scalar>::Zero(maxit + 1, maxit);
  ws.cs.resize(maxit);
  ws.sn.resize(maxit);
  ws.g = Vector<Scalar>::Zero(maxit + 1);
  ws.g(0) = beta;
  ws.krylov[0] = ws.r / beta;

  int j = 0;
  bool breakdown = false;
  for (; j < maxit; ++j) {
    dbar_operator(ws.krylov[j], rho, green, h, ws, ws.r);
    for (int i = 0; i <= j; ++i) {
      const Scalar hij = real_dot(ws.krylov[i], ws.r);
      ws.hess(i, j) = hij;
      ws.r -= hij * ws.krylov[i];
    }
    const Scalar hnext = std::sqrt(real_dot(ws.r, ws.r));
    check_finite(hnext);
    ws.hess(j + 1, j) = hnext;

    for (int i = 0; i < j; ++i) {
      const Scalar t0 = ws.cs(i) * ws.hess(i, j) + ws.sn(i) * ws.hess(i + 1, j);
      ws.hess(i + 1, j) = -ws.sn(i) * ws.hess(i, j) + ws.cs(i) * ws.hess(i + 1, j);
      ws.hess(i, j) = t0;
    }
    const Scalar denom = std::hypot(ws.hess(j, j), ws.hess(j + 1, j));
    ws.cs(j) = ws.hess(j, j) / denom;
    ws.sn(j) = ws.hess(j + 1, j) / denom;
    ws.hess(j, j) = denom;
    ws.hess(j + 1, j) = 0;
    ws.g(j + 1) = -ws.sn(j) * ws.g(j);
    ws.g(j) = ws.cs(j) * ws.g(j);

    const Scalar res = std::abs(ws.g(j + 1)) / bnorm;
    check_finite(res);
    rep.residual = double(res);

    if (hnext <= Scalar(1e-14) * bnorm) {
      breakdown = true;  // exact solution in the current subspace
      ++j;
      break;
    }
    ws.krylov[j + 1] = ws.r / hnext;
    if (res <= tol) {
      ++j;
      break;
    }
  }

  const int dim = j;
  if (dim > 0) {
    ws.y = ws.g.head(dim);
    for (int i = dim - 1; i >= 0; --i) {
      for (int q = i + 1; q < dim; ++q) ws.y(i) -= ws.hess(i, q) * ws.y(q);
      ws.y(i) /= ws.hess(i, i);
    }
    for (int i = 0; i < dim; ++i) mu += ws.y(i) * ws.krylov[i];
  }
  rep.iterations = dim;
  rep.converged = breakdown || rep.residual <= double(tol);
  return rep;
}

/// mu(z,0) by direct quadrature of the integral equation at s = 0 and the
/// conductivity value sigma(z) = Re(mu0^2). Written in terms of the
/// multiplier column: t(k) e_{-z}(k) / ((0-k) conj(k)) = -4 pi rho(z,k)/k.
template <typename Scalar>
struct SigmaEval {
  std::complex<Scalar> mu0{1, 0};
  Scalar sigma = Scalar(1);
  Scalar im_mu0_sq = Scalar(0);  // diagnostic
};

template <typename Scalar>
SigmaEval<Scalar> eval_sigma(const ComplexMatrix<Scalar>& mu,
                             const Eigen::Ref<const ComplexMatrix<Scalar>>& rho,
                             const KGrid<Scalar>& grid) {
  using Complex = std::complex<Scalar>;
  const Eigen::Index m = grid.size;
  Complex acc(0, 0);
  for (Eigen::Index jc = 0; jc < m; ++jc) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Complex r = rho(i, jc);
      if (r == Complex(0, 0)) continue;
      const Complex k = grid.points(i, jc);
      if (std::abs(k) < Scalar(1e-14)) continue;  // singular kernel, excluded upstream
      acc += r * std::conj(mu(i, jc)) / k;
    }
  }
  SigmaEval<Scalar> ev;
  ev.mu0 = Complex(1, 0) - grid.step * grid.step / std::numbers::pi_v<Scalar> * acc;
  const Complex sq = ev.mu0 * ev.mu0;
  ev.sigma = sq.real();
  ev.im_mu0_sq = sq.imag();
  if (!std::isfinite(ev.sigma)) throw NumericalError("non-finite conductivity value");
  return ev;
}

}  // namespace dbar
