#pragma once

// Synthetic voltage data: an analytic series solver for radially layered
// conductivities on the unit disk (oracle grade) and a piecewise-linear
// finite-element solver for general meshed phantoms.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "dbar/errors.hpp"
#include "dbar/geometry.hpp"
#include "dbar/patterns.hpp"
#include "dbar/types.hpp"

namespace dbar {

// ---------------------------------------------------------------------------
// Clausen function Cl2(x) = -int_0^x log|2 sin(t/2)| dt, used for the
// closed-form homogeneous-disk response to arc currents. Series
// Cl2(x) = x - x log x + sum_m zeta(2m) x^{2m+1} / (m (2m+1) (2pi)^{2m})
// on [0, pi], extended by oddness and 2pi-periodicity.
// ---------------------------------------------------------------------------
namespace detail {

inline const std::vector<double>& clausen_coeffs() {
  static const std::vector<double> coeffs = [] {
    const double pi = std::numbers::pi;
    std::vector<double> zeta(33, 0.0);
    zeta[1] = pi * pi / 6.0;
    zeta[2] = std::pow(pi, 4) / 90.0;
    zeta[3] = std::pow(pi, 6) / 945.0;
    zeta[4] = std::pow(pi, 8) / 9450.0;
    zeta[5] = std::pow(pi, 10) / 93555.0;
    for (int m = 6; m <= 32; ++m) {
      double s = 0;
      for (int j = 64; j >= 1; --j) s += std::pow(double(j), -2.0 * m);
      zeta[m] = s;
    }
    std::vector<double> c(33, 0.0);
    for (int m = 1; m <= 32; ++m)
      c[m] = zeta[m] / (double(m) * (2.0 * m + 1.0) * std::pow(2.0 * pi, 2.0 * m));
    return c;
  }();
  return coeffs;
}

}  // namespace detail

inline double clausen2(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x, two_pi);
  if (x > std::numbers::pi) x -= two_pi;
  if (x < -std::numbers::pi) x += two_pi;
  const double sign = x < 0 ? -1.0 : 1.0;
  x = std::abs(x);
  if (x < 1e-300) return 0.0;
  const auto& c = detail::clausen_coeffs();
  double acc = x - x * std::log(x);
  const double x2 = x * x;
  double p = x * x2;  // x^{2m+1}
  for (size_t m = 1; m < c.size(); ++m) {
    const double term = c[m] * p;
    acc += term;
    if (term < 1e-18 * std::abs(acc)) break;
    p *= x2;
  }
  return sign * acc;
}

// ---------------------------------------------------------------------------
// Radial two-region phantom on the unit disk.
// ---------------------------------------------------------------------------

template <typename Scalar>
struct RadialPhantom {
  Scalar rho = Scalar(0.4);       // inclusion radius, 0 < rho < 1
  Scalar sigma_in = Scalar(1);    // conductivity inside |z| < rho; background 1

  void validate() const {
    if (!(sigma_in > 0)) throw InputError("inclusion conductivity must be positive");
    if (!(rho > 0) || !(rho < Scalar(1) - Scalar(1e-6)))
      throw InputError("inclusion radius must satisfy 0 < rho < 1 - 1e-6");
  }
};

/// DN eigenvalues lambda_n on e^{i n theta}, n = 1..max_mode, from the
/// two-region series solution: lambda_n = n (1 + m rho^{2n}) / (1 - m rho^{2n})
/// with m = (sigma_in - 1)/(sigma_in + 1).
template <typename Scalar>
Vector<Scalar> dn_radial(const RadialPhantom<Scalar>& phantom, Eigen::Index max_mode) {
  phantom.validate();
  Vector<Scalar> lambda(max_mode);
  const Scalar m = (phantom.sigma_in - 1) / (phantom.sigma_in + 1);
  for (Eigen::Index n = 1; n <= max_mode; ++n) {
    const Scalar r = m * std::pow(phantom.rho, Scalar(2 * n));
    lambda(n - 1) = Scalar(n) * (1 + r) / (1 - r);
  }
  return lambda;
}

/// Boundary voltages at electrode centers for every raw pattern column.
/// Currents enter as uniform densities on gap-free arcs of arclength A.
/// The homogeneous-disk part is evaluated in closed form via Cl2, so only
/// the inclusion correction (coefficients decaying like rho^{2n}) depends on
/// max_mode.
template <typename Scalar>
Matrix<Scalar> solve_radial_voltages(const RadialPhantom<Scalar>& phantom,
                                     const NormalizedDomain<Scalar>& geom,
                                     const CurrentPatternSet<Scalar>& set,
                                     Eigen::Index max_mode = 64) {
  using Complex = std::complex<Scalar>;
  phantom.validate();
  const Eigen::Index L = set.L;
  if (geom.electrodes.count != L) throw InputError("geometry and pattern electrode counts differ");
  for (Eigen::Index i = 0; i < geom.boundary.size(); ++i) {
    const Scalar r = geom.boundary.points.row(i).norm();
    if (std::abs(r - 1) > Scalar(1e-9))
      throw InputError("radial series solver requires the unit disk; use fem_voltages");
  }

  const Scalar A = geom.electrodes.area;
  const auto& th = geom.electrodes.centers;
  const Vector<Scalar> lambda = dn_radial(phantom, max_mode);

  // Homogeneous response per unit current at each electrode arc.
  Matrix<Scalar> H(L, L);
  for (Eigen::Index j = 0; j < L; ++j) {
    for (Eigen::Index e = 0; e < L; ++e) {
      const Scalar a = th(e) - A / 2, b = th(e) + A / 2;
      H(j, e) = -Scalar(1) / (std::numbers::pi_v<Scalar> * A) *
                Scalar(clausen2(double(th(j) - b)) - clausen2(double(th(j) - a)));
    }
  }
  Matrix<Scalar> V = H * set.raw;

  // Inclusion correction, modes n = 1..max_mode.
  const Complex iu(0, 1);
  ComplexMatrix<Scalar> G(max_mode, L);
  for (Eigen::Index n = 1; n <= max_mode; ++n) {
    for (Eigen::Index e = 0; e < L; ++e) {
      const Scalar a = th(e) - A / 2, b = th(e) + A / 2;
      G(n - 1, e) = (std::exp(-iu * Scalar(n) * a) - std::exp(-iu * Scalar(n) * b)) /
                    (iu * Scalar(n)) / (Scalar(2) * std::numbers::pi_v<Scalar> * A);
    }
  }
  ComplexMatrix<Scalar> gcoef = G * set.raw.template cast<Complex>();  // modes x N
  for (Eigen::Index n = 1; n <= max_mode; ++n)
    gcoef.row(n - 1) *= (Scalar(1) / lambda(n - 1) - Scalar(1) / Scalar(n));
  ComplexMatrix<Scalar> E(L, max_mode);
  for (Eigen::Index j = 0; j < L; ++j)
    for (Eigen::Index n = 1; n <= max_mode; ++n) E(j, n - 1) = std::exp(iu * Scalar(n) * th(j));
  V += Scalar(2) * (E * gcoef).real();
  return V;
}

// ---------------------------------------------------------------------------
// Meshed phantoms and the P1 finite-element solver.
// ---------------------------------------------------------------------------

template <typename Scalar>
struct MeshPhantom {
  Points2<Scalar> nodes;
  Eigen::Matrix<int, Eigen::Dynamic, 3> triangles;
  std::vector<int> boundary;  // ordered boundary node loop, counterclockwise
  Vector<Scalar> sigma;       // per triangle

  Eigen::Index node_count() const { return nodes.rows(); }
  Eigen::Index triangle_count() const { return triangles.rows(); }
};

template <typename Scalar>
void validate_mesh(MeshPhantom<Scalar>& mesh) {
  const Eigen::Index nt = mesh.triangle_count();
  const Eigen::Index nn = mesh.node_count();
  if (nt == 0 || nn < 3) throw InputError("empty mesh");
  if (mesh.sigma.size() != nt) throw InputError("sigma_per_tri length does not match triangle count");
  if (!(mesh.sigma.minCoeff() > 0)) throw InputError("conductivity must be positive on every triangle");
  for (Eigen::Index t = 0; t < nt; ++t) {
    for (int v = 0; v < 3; ++v)
      if (mesh.triangles(t, v) < 0 || mesh.triangles(t, v) >= nn)
        throw InputError("triangle vertex index out of range");
    const Eigen::Vector2<Scalar> a = mesh.nodes.row(mesh.triangles(t, 0));
    const Eigen::Vector2<Scalar> b = mesh.nodes.row(mesh.triangles(t, 1));
    const Eigen::Vector2<Scalar> c = mesh.nodes.row(mesh.triangles(t, 2));
    const Scalar det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (det == 0) throw InputError("degenerate (zero-area) triangle " + std::to_string(t));
    if (det < 0) std::swap(mesh.triangles(t, 1), mesh.triangles(t, 2));
  }
  // Watertightness: every consecutive boundary pair is an edge of exactly
  // one triangle, and no interior edge appears once.
  if (mesh.boundary.size() < 3) throw InputError("boundary loop too short");
  std::vector<std::pair<int64_t, int>> edges;
  edges.reserve(3 * size_t(nt));
  auto key = [nn](int a, int b) {
    return int64_t(std::min(a, b)) * nn + std::max(a, b);
  };
  for (Eigen::Index t = 0; t < nt; ++t)
    for (int v = 0; v < 3; ++v)
      edges.emplace_back(key(mesh.triangles(t, v), mesh.triangles(t, (v + 1) % 3)), 1);
  std::sort(edges.begin(), edges.end());
  std::vector<int64_t> once;
  for (size_t i = 0; i < edges.size();) {
    size_t j = i;
    while (j < edges.size() && edges[j].first == edges[i].first) ++j;
    if (j - i == 1) once.push_back(edges[i].first);
    else if (j - i > 2) throw InputError("non-manifold edge in mesh");
    i = j;
  }
  if (once.size() != mesh.boundary.size())
    throw InputError("boundary loop does not match the mesh's free edges");
  for (size_t i = 0; i < mesh.boundary.size(); ++i) {
    const int64_t k = key(mesh.boundary[i], mesh.boundary[(i + 1) % mesh.boundary.size()]);
    if (!std::binary_search(once.begin(), once.end(), k))
      throw InputError("boundary loop traverses a non-boundary edge");
  }
}

/// Structured disk-type triangulation: concentric rings with node counts
/// growing linearly, merged ring-to-ring by angle. The outer ring count is a
/// multiple of `electrode_count` so electrode centers land on nodes;
/// `radial(theta)` scales each ring for non-circular domains.
template <typename Scalar, typename RadialFn>
MeshPhantom<Scalar> make_ring_mesh(int rings, int per_ring, Eigen::Index electrode_count,
                                   RadialFn&& radial) {
  MeshPhantom<Scalar> mesh;
  std::vector<Eigen::Vector2<Scalar>> nodes{{Scalar(0), Scalar(0)}};
  std::vector<int> ring_start(rings + 1, 0);
  std::vector<int> ring_count(rings + 1, 1);
  for (int j = 1; j <= rings; ++j) {
    int nj = std::max(6, per_ring * j);
    if (j == rings) {
      nj = std::max<int>(nj, 4 * int(electrode_count));
      nj = int((nj + electrode_count - 1) / electrode_count) * int(electrode_count);
    }
    ring_start[j] = int(nodes.size());
    ring_count[j] = nj;
    const Scalar r = Scalar(j) / Scalar(rings);
    for (int i = 0; i < nj; ++i) {
      const Scalar a = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(i) / Scalar(nj);
      const Scalar rr = r * radial(a);
      nodes.push_back({rr * std::cos(a), rr * std::sin(a)});
    }
  }
  std::vector<Eigen::Vector3i> tris;
  for (int i = 0; i < ring_count[1]; ++i)
    tris.emplace_back(0, ring_start[1] + i, ring_start[1] + (i + 1) % ring_count[1]);
  for (int j = 1; j < rings; ++j) {
    const int si = ring_start[j], ci = ring_count[j];
    const int so = ring_start[j + 1], co = ring_count[j + 1];
    int ai = 0, bi = 0;
    while (ai < ci || bi < co) {
      const double a_next = ai < ci ? double(ai + 1) / ci : 2.0;
      const double b_next = bi < co ? double(bi + 1) / co : 2.0;
      if (b_next <= a_next) {
        tris.emplace_back(so + bi % co, so + (bi + 1) % co, si + ai % ci);
        ++bi;
      } else {
        tris.emplace_back(si + ai % ci, so + bi % co, si + (ai + 1) % ci);
        ++ai;
      }
    }
  }
  mesh.nodes.resize(Eigen::Index(nodes.size()), 2);
  for (size_t i = 0; i < nodes.size(); ++i) mesh.nodes.row(Eigen::Index(i)) = nodes[i].transpose();
  mesh.triangles.resize(Eigen::Index(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t) mesh.triangles.row(Eigen::Index(t)) = tris[t].transpose();
  mesh.boundary.resize(ring_count[rings]);
  for (int i = 0; i < ring_count[rings]; ++i) mesh.boundary[size_t(i)] = ring_start[rings] + i;
  mesh.sigma = Vector<Scalar>::Ones(mesh.triangle_count());
  validate_mesh(mesh);
  return mesh;
}

template <typename Scalar>
MeshPhantom<Scalar> make_disk_mesh(int rings, Eigen::Index electrode_count, int per_ring = 4) {
  return make_ring_mesh<Scalar>(rings, per_ring, electrode_count,
                                [](Scalar) { return Scalar(1); });
}

template <typename Scalar>
MeshPhantom<Scalar> make_chest_mesh(int rings, Eigen::Index electrode_count, int per_ring = 4) {
  return make_ring_mesh<Scalar>(rings, per_ring, electrode_count,
                                [](Scalar a) { return chest_radius(a); });
}

/// Mesh conforming to a normalized domain's boundary polygon.
template <typename Scalar>
MeshPhantom<Scalar> make_domain_mesh(const NormalizedDomain<Scalar>& dom, int rings,
                                     int per_ring = 4) {
  return make_ring_mesh<Scalar>(rings, per_ring, dom.electrodes.count,
                                [&dom](Scalar a) { return boundary_radius(dom, a); });
}

/// Set sigma on triangles whose centroid lies inside the given disk.
template <typename Scalar>
int set_region_sigma(MeshPhantom<Scalar>& mesh, Scalar cx, Scalar cy, Scalar radius, Scalar value) {
  if (!(value > 0)) throw InputError("region conductivity must be positive");
  int hit = 0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    Scalar x = 0, y = 0;
    for (int v = 0; v < 3; ++v) {
      x += mesh.nodes(mesh.triangles(t, v), 0);
      y += mesh.nodes(mesh.triangles(t, v), 1);
    }
    x /= 3;
    y /= 3;
    if ((x - cx) * (x - cx) + (y - cy) * (y - cy) < radius * radius) {
      mesh.sigma(t) = value;
      ++hit;
    }
  }
  return hit;
}

/// P1 FEM for div(sigma grad u) = 0 with Neumann data given by uniform
/// current densities on the electrode arcs, the mean of u pinned to zero by
/// a Lagrange multiplier. Returns voltages sampled at the boundary nodes
/// nearest to the electrode centers, one column per pattern.
template <typename Scalar>
Matrix<Scalar> fem_voltages(const MeshPhantom<Scalar>& phantom, const NormalizedDomain<Scalar>& geom,
                            const CurrentPatternSet<Scalar>& set) {
  using Triplet = Eigen::Triplet<Scalar>;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  MeshPhantom<Scalar> mesh = phantom;  // validation may reorient triangles
  validate_mesh(mesh);
  const Eigen::Index L = set.L;
  if (geom.electrodes.count != L) throw InputError("geometry and pattern electrode counts differ");
  for (Eigen::Index c = 0; c < set.raw.cols(); ++c)
    if (std::abs(set.raw.col(c).sum()) > Scalar(1e-10) * set.amplitude)
      throw InputError("current pattern column " + std::to_string(c) + " is not mean-zero");

  const Eigen::Index nn = mesh.node_count();
  std::vector<Triplet> trip;
  trip.reserve(9 * size_t(mesh.triangle_count()) + 2 * size_t(nn));
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const int a = mesh.triangles(t, 0), b = mesh.triangles(t, 1), c = mesh.triangles(t, 2);
    const Eigen::Vector2<Scalar> pa = mesh.nodes.row(a), pb = mesh.nodes.row(b), pc = mesh.nodes.row(c);
    Eigen::Matrix<Scalar, 2, 2> B;
    B.col(0) = pb - pa;
    B.col(1) = pc - pa;
    const Scalar det = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0);
    const Scalar area = std::abs(det) / 2;
    Eigen::Matrix<Scalar, 3, 2> ref;
    ref << -1, -1, 1, 0, 0, 1;
    const Eigen::Matrix<Scalar, 3, 2> grad = ref * B.inverse();
    const Eigen::Matrix<Scalar, 3, 3> Ke = mesh.sigma(t) * area * (grad * grad.transpose());
    const int idx[3] = {a, b, c};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(idx[i], idx[j], Ke(i, j));
  }
  for (Eigen::Index i = 0; i < nn; ++i) {
    trip.emplace_back(int(i), int(nn), Scalar(1));
    trip.emplace_back(int(nn), int(i), Scalar(1));
  }
  Eigen::SparseMatrix<Scalar> K(nn + 1, nn + 1);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw NumericalError("FEM system factorization failed (singular or disconnected mesh)");

  // Ordered boundary edges with node angles.
  const size_t nb = mesh.boundary.size();
  Vector<Scalar> bang;
  bang.resize(Eigen::Index(nb));
  for (size_t i = 0; i < nb; ++i) {
    const auto p = mesh.nodes.row(mesh.boundary[i]);
    bang(Eigen::Index(i)) = detail::wrap_angle(Scalar(std::atan2(p(1), p(0))));
  }

  // Electrode arcs in angle; angular width = arclength A / boundary speed.
  Vector<Scalar> arc_lo(L), arc_hi(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const Scalar half = geom.electrodes.area / geom.electrode_speed(l) / 2;
    arc_lo(l) = geom.electrodes.centers(l) - half;
    arc_hi(l) = geom.electrodes.centers(l) + half;
  }
  // Require >= 4 boundary edges overlapping each electrode arc.
  for (Eigen::Index l = 0; l < L; ++l) {
    int hits = 0;
    for (size_t i = 0; i < nb; ++i) {
      Scalar t0 = bang(Eigen::Index(i));
      Scalar t1 = bang(Eigen::Index((i + 1) % nb));
      if (t1 < t0) t1 += two_pi;
      for (Scalar shift : {-two_pi, Scalar(0), two_pi})
        if (std::min(t1, arc_hi(l) + shift) > std::max(t0, arc_lo(l) + shift)) {
          ++hits;
          break;
        }
    }
    if (hits < 4)
      throw InputError("mesh boundary does not resolve electrode " + std::to_string(l) +
                       " with at least 4 edges");
  }

  Matrix<Scalar> V(L, set.raw.cols());
  Vector<Scalar> rhs(nn + 1);
  for (Eigen::Index col = 0; col < set.raw.cols(); ++col) {
    rhs.setZero();
    for (Eigen::Index e = 0; e < L; ++e) {
      const Scalar cur = set.raw(e, col);
      if (cur == 0) continue;
      const Scalar dens = cur / geom.electrodes.area;  // per unit arclength
      for (size_t i = 0; i < nb; ++i) {
        const int n0 = mesh.boundary[i];
        const int n1 = mesh.boundary[(i + 1) % nb];
        Scalar t0 = bang(Eigen::Index(i));
        Scalar t1 = bang(Eigen::Index((i + 1) % nb));
        if (t1 < t0) t1 += two_pi;
        const Scalar elen = (mesh.nodes.row(n1) - mesh.nodes.row(n0)).norm();
        for (Scalar shift : {-two_pi, Scalar(0), two_pi}) {
          const Scalar lo = std::max(t0, arc_lo(e) + shift);
          const Scalar hi = std::min(t1, arc_hi(e) + shift);
          if (hi <= lo) continue;
          const Scalar s0 = (lo - t0) / (t1 - t0);
          const Scalar s1 = (hi - t0) / (t1 - t0);
          const Scalar seg = elen * (s1 - s0);
          rhs(n0) += dens * seg * (1 - (s0 + s1) / 2);
          rhs(n1) += dens * seg * (s0 + s1) / 2;
        }
      }
    }
    const Vector<Scalar> u = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !u.allFinite())
      throw NumericalError("FEM solve failed for pattern column " + std::to_string(col));
    for (Eigen::Index l = 0; l < L; ++l) {
      const Scalar target = detail::wrap_angle(geom.electrodes.centers(l));
      Eigen::Index best = 0;
      Scalar bd = std::numeric_limits<Scalar>::max();
      for (size_t i = 0; i < nb; ++i) {
        Scalar d = std::abs(bang(Eigen::Index(i)) - target);
        d = std::min(d, two_pi - d);
        if (d < bd) {
          bd = d;
          best = Eigen::Index(i);
        }
      }
      V(l, col) = u(mesh.boundary[size_t(best)]);
    }
  }
  return V;
}

// ---------------------------------------------------------------------------
// Synthetic acquisition sessions.
// ---------------------------------------------------------------------------

struct SyntheticSession {
  int L = 32;
  int skip = 0;
  double amplitude = 0.823;  // mA
  std::vector<Eigen::MatrixXd> frames;  // raw voltages, L x N each
  int reference_index = 0;
  double noise_level = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// Deterministic standard normals: Box-Muller on mt19937_64 output,
// independent of libstdc++'s distribution internals.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    const double u1 = 1.0 - double(rng_() >> 11) * 0x1.0p-53;  // (0,1]
    const double u2 = double(rng_() >> 11) * 0x1.0p-53;        // [0,1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detail

/// Gaussian perturbations with std = level x per-column RMS voltage,
/// deterministic under the seed.
inline SyntheticSession add_noise(const SyntheticSession& session, double level,
                                  std::uint64_t seed) {
  if (level < 0) throw InputError("noise level must be nonnegative");
  SyntheticSession out = session;
  out.noise_level = level;
  out.seed = seed;
  if (level == 0) return out;
  detail::NormalSampler normal(seed);
  for (auto& frame : out.frames) {
    for (Eigen::Index c = 0; c < frame.cols(); ++c) {
      const double rms = std::sqrt(frame.col(c).squaredNorm() / double(frame.rows()));
      for (Eigen::Index r = 0; r < frame.rows(); ++r) frame(r, c) += level * rms * normal();
    }
  }
  return out;
}

}  // namespace dbar
