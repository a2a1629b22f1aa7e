#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "dbar/dbar.hpp"
#include "dbar/kgrid.hpp"

using namespace dbar;
using std::numbers::pi;
using Complex = std::complex<double>;

namespace {

// Deterministic complex field for oracle tests.
ComplexMatrix<double> random_field(int m, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  auto uni = [&] { return 2.0 * double(rng() >> 11) * 0x1.0p-53 - 1.0; };
  ComplexMatrix<double> f(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) f(i, j) = scale * Complex(uni(), uni());
  return f;
}

// Dense real-linear representation of mu -> mu - A_R(rho conj mu),
// assembled by applying the operator to stacked unit vectors.
Eigen::MatrixXd dense_operator(const ComplexMatrix<double>& rho, const GreenFFT<double>& green,
                               double h) {
  const int m = green.grid_size;
  const int n = 2 * m * m;
  Eigen::MatrixXd A(n, n);
  DbarScratch<double> ws;
  ComplexMatrix<double> e(m, m), out;
  for (int col = 0; col < n; ++col) {
    e.setZero();
    if (col < m * m)
      e(col % m, col / m) = Complex(1, 0);
    else
      e((col - m * m) % m, (col - m * m) / m) = Complex(0, 1);
    dbar_operator<double>(e, rho, green, h, ws, out);
    for (int f = 0; f < m * m; ++f) {
      A(f, col) = out(f % m, f / m).real();
      A(m * m + f, col) = out(f % m, f / m).imag();
    }
  }
  return A;
}

}  // namespace

// ---------------------------------------------------------------------------
// k-grid
// ---------------------------------------------------------------------------

TEST_CASE("k-grid construction") {
  SUBCASE("paper configuration: s=3.8, n=4") {
    const auto g = build_kgrid<double>(3.8, 4, 3.8);
    CHECK(g.size == 16);
    CHECK(g.step == doctest::Approx(7.6 / 15).epsilon(1e-15));
    CHECK(g.count() == 256);
    CHECK_FALSE(g.has_origin);
    CHECK(g.points(0, 0) == Complex(-3.8, -3.8));
    CHECK(g.points(15, 15).real() == doctest::Approx(3.8).epsilon(1e-15));
  }
  SUBCASE("s=1, n=2") {
    const auto g = build_kgrid<double>(1.0, 2, 1.0);
    CHECK(g.size == 4);
    CHECK(g.step == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(g.points(0, 0) == Complex(-1.0, -1.0));
  }
  SUBCASE("s=3.8, n=5") {
    const auto g = build_kgrid<double>(3.8, 5, 3.8);
    CHECK(g.size == 32);
    CHECK(g.step == doctest::Approx(7.6 / 31).epsilon(1e-15));
  }
  SUBCASE("clipped truncation radius is rejected") {
    CHECK_THROWS_AS(build_kgrid<double>(3.0, 4, 3.8), ConfigError);
  }
}

// ---------------------------------------------------------------------------
// Cauchy transform
// ---------------------------------------------------------------------------

TEST_CASE("apply_cauchy zero field") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  const auto green = make_green_fft(g, false);
  const ComplexMatrix<double> out =
      apply_cauchy<double>(ComplexMatrix<double>::Zero(16, 16), green, g.step);
  CHECK(out.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Cauchy transform inverts dbar on smooth bumps (padded mode)") {
  // oracle: f = exp(-1/(1-|k/r|^2)) inside |k|<r, dbar f known analytically;
  // apply_cauchy(dbar f) must reproduce f on interior points.
  auto run = [](int M) {
    const double s = 3.8;
    const auto g = build_kgrid<double>(s, int(std::log2(M)), s);
    const auto green = make_green_fft(g, true);
    const double r = 1.5;  // support well inside |k| < s/2
    ComplexMatrix<double> f(M, M), w(M, M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const double x = g.points(i, j).real(), y = g.points(i, j).imag();
        const double q = (x * x + y * y) / (r * r);
        if (q < 1) {
          const double val = std::exp(-1.0 / (1.0 - q));
          const double d = (1.0 - q) * (1.0 - q);
          const double fx = val * (-2.0 * x / (r * r)) / d;
          const double fy = val * (-2.0 * y / (r * r)) / d;
          f(i, j) = val;
          w(i, j) = 0.5 * Complex(fx, fy);
        } else {
          f(i, j) = 0;
          w(i, j) = 0;
        }
      }
    const auto out = apply_cauchy<double>(w, green, g.step);
    double err = 0, scale = 0;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const double x = g.points(i, j).real(), y = g.points(i, j).imag();
        if ((x * x + y * y) / (r * r) < 0.8) {
          err = std::max(err, std::abs(out(i, j) - f(i, j)));
          scale = std::max(scale, std::abs(f(i, j)));
        }
      }
    return err / scale;
  };
  const double e64 = run(64);
  const double e128 = run(128);
  CHECK(e64 < 5e-2);
  CHECK(e128 < e64);
}

TEST_CASE("finite-difference dbar of apply_cauchy returns the input") {
  const int M = 64;
  const double s = 3.8;
  const auto g = build_kgrid<double>(s, 6, s);
  const auto green = make_green_fft(g, true);
  const double r = 1.5;
  ComplexMatrix<double> w(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const double x = g.points(i, j).real(), y = g.points(i, j).imag();
      const double q = (x * x + y * y) / (r * r);
      w(i, j) = q < 1 ? Complex(std::exp(-1.0 / (1.0 - q)), 0) : Complex(0, 0);
    }
  const auto F = apply_cauchy<double>(w, green, g.step);
  double err = 0, scale = w.cwiseAbs().maxCoeff();
  for (int i = 1; i + 1 < M; ++i)
    for (int j = 1; j + 1 < M; ++j) {
      const Complex dx = (F(i + 1, j) - F(i - 1, j)) / (2 * g.step);
      const Complex dy = (F(i, j + 1) - F(i, j - 1)) / (2 * g.step);
      const Complex dbar = 0.5 * (dx + Complex(0, 1) * dy);
      const double x = g.points(i, j).real(), y = g.points(i, j).imag();
      if ((x * x + y * y) / (r * r) < 0.8) err = std::max(err, std::abs(dbar - w(i, j)));
    }
  CHECK(err / scale < 5e-2);
}

TEST_CASE("grid size mismatch is rejected") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  const auto green = make_green_fft(g, false);
  CHECK_THROWS_AS(apply_cauchy<double>(ComplexMatrix<double>::Zero(8, 8), green, g.step),
                  InputError);
}

// ---------------------------------------------------------------------------
// multiplier field
// ---------------------------------------------------------------------------

TEST_CASE("multiplier field") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  ScatteringField<double> t;
  t.radius = g.radius;
  t.values = ComplexMatrix<double>::Zero(16, 16);

  SUBCASE("zero scattering gives zero multipliers") {
    ComplexVector<double> zs(3);
    zs << Complex(0, 0), Complex(0.5, 0), Complex(-0.2, 0.7);
    const auto f = multiplier_field(t, g, zs);
    CHECK(f.rho.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("z=0 leaves rho = t/(4 pi conj k); unimodular phase elsewhere") {
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        if (g.mask(i, j)) t.values(i, j) = Complex(0.3 * i - j, 0.1 * j);
    ComplexVector<double> zs(2);
    zs << Complex(0, 0), Complex(0.31, -0.44);
    const auto f = multiplier_field(t, g, zs);
    double worst = 0;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        const Eigen::Index flat = i + 16 * j;
        const Complex want =
            g.mask(i, j) ? t.values(i, j) / (4.0 * pi * std::conj(g.points(i, j))) : Complex(0, 0);
        CHECK(std::abs(f.rho(flat, 0) - want) < 1e-15);
        // |rho| * 4 pi |k| == |t| for every z
        for (int zc = 0; zc < 2; ++zc)
          worst = std::max(worst, std::abs(std::abs(f.rho(flat, zc)) * 4.0 * pi *
                                               std::abs(g.points(i, j)) -
                                           std::abs(t.values(i, j))));
      }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("singular grid points are excluded and counted") {
  // hand-built grid containing the origin (M = 2^n never does by itself)
  auto g = build_kgrid<double>(3.8, 2, 3.8);
  g.points(1, 1) = Complex(0, 0);
  g.has_origin = true;
  ScatteringField<double> t;
  t.radius = g.radius;
  t.values = ComplexMatrix<double>::Constant(4, 4, Complex(1.0, 0.0));
  ComplexVector<double> zs(1);
  zs(0) = Complex(0.2, 0.1);
  const auto f = multiplier_field(t, g, zs);
  CHECK(f.singular_excluded == 1);
  CHECK(f.rho(1 + 4 * 1, 0) == Complex(0, 0));
  const ComplexMatrix<double> mu = ComplexMatrix<double>::Ones(4, 4);
  Eigen::Map<const ComplexMatrix<double>> rho(f.rho.col(0).data(), 4, 4);
  const auto ev = eval_sigma<double>(mu, rho, g);  // no NaN from the origin
  CHECK(std::isfinite(ev.sigma));
}

// ---------------------------------------------------------------------------
// dbar operator and GMRES
// ---------------------------------------------------------------------------

TEST_CASE("dbar_operator is the identity for zero multipliers") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  const auto green = make_green_fft(g, false);
  const auto mu = random_field(16, 11);
  const auto out =
      dbar_operator<double>(mu, ComplexMatrix<double>::Zero(16, 16), green, g.step);
  CHECK((out - mu).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("dbar_operator on the constant field") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  const auto green = make_green_fft(g, false);
  const auto rho = random_field(16, 5, 0.1);
  const ComplexMatrix<double> ones = ComplexMatrix<double>::Ones(16, 16);
  const auto out = dbar_operator<double>(ones, rho, green, g.step);
  const ComplexMatrix<double> want = ones - apply_cauchy<double>(rho, green, g.step);
  CHECK((out - want).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dbar_operator is real-linear but not complex-linear") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  const auto green = make_green_fft(g, false);
  const auto rho = random_field(16, 6, 0.2);
  const auto mu = random_field(16, 7);
  const auto base = dbar_operator<double>(mu, rho, green, g.step);
  // real scalar commutes
  const auto real_scaled = dbar_operator<double>((2.5 * mu).eval(), rho, green, g.step);
  CHECK((real_scaled - 2.5 * base).cwiseAbs().maxCoeff() < 1e-12);
  // imaginary unit does not
  const Complex iu(0, 1);
  const auto imag_scaled = dbar_operator<double>((iu * mu).eval(), rho, green, g.step);
  CHECK((imag_scaled - iu * base).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("gmres: zero multiplier converges instantly to mu == 1") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  const auto green = make_green_fft(g, false);
  DbarScratch<double> ws;
  ComplexMatrix<double> mu = ComplexMatrix<double>::Ones(16, 16);
  const auto rep = gmres_real<double>(mu, ComplexMatrix<double>::Zero(16, 16), green, g.step,
                                      1e-4, 20, ws);
  CHECK(rep.iterations == 0);
  CHECK(rep.converged);
  CHECK((mu - ComplexMatrix<double>::Ones(16, 16)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gmres matches the dense real-linear solve at M=8") {
  const auto g = build_kgrid<double>(3.8, 3, 3.8);
  const int m = g.size;
  for (std::uint64_t seed : {101, 202, 303, 404, 505}) {
    // synthetic multiplier supported on |k| <= R with the physical 1/(4 pi k)
    // scale profile
    ComplexMatrix<double> rho = random_field(m, seed, 0.15);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (!g.mask(i, j)) rho(i, j) = 0;
    for (const bool padded : {false, true}) {
      const auto green = make_green_fft(g, padded);
      const Eigen::MatrixXd A = dense_operator(rho, green, g.step);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * m * m);
      b.head(m * m).setOnes();
      const Eigen::VectorXd x = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(b);
      DbarScratch<double> ws;
      ComplexMatrix<double> mu = ComplexMatrix<double>::Ones(m, m);
      const auto rep = gmres_real<double>(mu, rho, green, g.step, 1e-12, 2 * m * m, ws);
      CHECK(rep.converged);
      double err = 0;
      for (int f = 0; f < m * m; ++f)
        err = std::max(err, std::abs(mu(f % m, f / m) - Complex(x(f), x(m * m + f))));
      CHECK(err / x.cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("gmres reports non-convergence at tiny maxit without failing") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  const auto green = make_green_fft(g, false);
  auto rho = random_field(16, 42, 0.3);
  DbarScratch<double> ws;
  ComplexMatrix<double> mu = ComplexMatrix<double>::Ones(16, 16);
  const auto rep = gmres_real<double>(mu, rho, green, g.step, 1e-14, 1, ws);
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 1);
  CHECK(rep.residual > 0);
  CHECK(mu.allFinite());
}

// ---------------------------------------------------------------------------
// sigma evaluation
// ---------------------------------------------------------------------------

TEST_CASE("eval_sigma at zero scattering returns exactly one") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  const ComplexMatrix<double> mu = ComplexMatrix<double>::Ones(16, 16);
  const auto ev = eval_sigma<double>(mu, ComplexMatrix<double>::Zero(16, 16), g);
  CHECK(ev.mu0 == Complex(1, 0));
  CHECK(ev.sigma == 1.0);
  CHECK(ev.im_mu0_sq == 0.0);
}

TEST_CASE("eval_sigma quadrature against direct summation") {
  const auto g = build_kgrid<double>(3.8, 4, 3.8);
  auto rho = random_field(16, 9, 0.2);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (!g.mask(i, j)) rho(i, j) = 0;
  const auto mu = random_field(16, 10);
  const auto ev = eval_sigma<double>(mu, rho, g);
  Complex acc(0, 0);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (rho(i, j) != Complex(0, 0))
        acc += rho(i, j) * std::conj(mu(i, j)) / g.points(i, j);
  const Complex want = Complex(1, 0) - g.step * g.step / pi * acc;
  CHECK(std::abs(ev.mu0 - want) < 1e-14);
  CHECK(ev.sigma == doctest::Approx((want * want).real()).epsilon(1e-12));
}
