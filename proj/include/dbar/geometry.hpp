#pragma once

// Imaging-domain geometry: closed boundary curves, normalization to the
// unit-scale frame, electrode placement and the arclength quantities used
// by the boundary quadrature.

#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

#include "dbar/errors.hpp"
#include "dbar/types.hpp"

namespace dbar {

/// Closed simple curve traced counterclockwise, one row per vertex.
template <typename Scalar>
struct BoundaryCurve {
  Points2<Scalar> points;
  bool closed = true;

  Eigen::Index size() const { return points.rows(); }
};

template <typename Scalar>
struct ElectrodeLayout {
  Eigen::Index count = 0;          // L
  Vector<Scalar> centers;          // angles theta_l, strictly increasing
  Scalar area = Scalar(0);         // effective electrode area A
  ComplexVector<Scalar> positions; // z_l on the normalized boundary
};

/// Boundary in normalized coordinates (centroid at the origin, max |z| = 1)
/// together with the applied affine map and tabulated arclength data.
template <typename Scalar>
struct NormalizedDomain {
  BoundaryCurve<Scalar> boundary;
  Eigen::Vector2<Scalar> center = Eigen::Vector2<Scalar>::Zero();
  Scalar scale = Scalar(1);

  // Cumulative chord arclength at each vertex plus the closing segment;
  // size n+1, strictly increasing, last entry = perimeter.
  Vector<Scalar> arclength;

  ElectrodeLayout<Scalar> electrodes;
  Vector<Scalar> electrode_arclength;  // s_l = s(theta_l), cumulative
  Vector<Scalar> electrode_speed;      // |dz/dtheta| at theta_l
  Vector<Scalar> electrode_gaps;       // dtheta_l, wraparound convention

  Scalar perimeter() const { return arclength(arclength.size() - 1); }

  // Quadrature weights of the discrete boundary inner product,
  // w_l = |dz/dtheta|(theta_l) * dtheta_l / A.
  Vector<Scalar> weights() const {
    return (electrode_speed.array() * electrode_gaps.array() / electrodes.area)
        .matrix();
  }
};

namespace detail {

template <typename Scalar>
Scalar signed_area(const Points2<Scalar>& p) {
  Scalar acc = 0;
  const Eigen::Index n = p.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + 1) % n;
    acc += p(i, 0) * p(j, 1) - p(j, 0) * p(i, 1);
  }
  return acc / Scalar(2);
}

template <typename Scalar>
Scalar cross2(Scalar ax, Scalar ay, Scalar bx, Scalar by) {
  return ax * by - ay * bx;
}

// Proper-crossing test for two closed segments.
template <typename Scalar>
bool segments_intersect(const Eigen::Vector2<Scalar>& a, const Eigen::Vector2<Scalar>& b,
                        const Eigen::Vector2<Scalar>& c, const Eigen::Vector2<Scalar>& d) {
  const Scalar d1 = cross2(b.x() - a.x(), b.y() - a.y(), c.x() - a.x(), c.y() - a.y());
  const Scalar d2 = cross2(b.x() - a.x(), b.y() - a.y(), d.x() - a.x(), d.y() - a.y());
  const Scalar d3 = cross2(d.x() - c.x(), d.y() - c.y(), a.x() - c.x(), a.y() - c.y());
  const Scalar d4 = cross2(d.x() - c.x(), d.y() - c.y(), b.x() - c.x(), b.y() - c.y());
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

template <typename Scalar>
bool curve_is_simple(const Points2<Scalar>& p) {
  const Eigen::Index n = p.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2<Scalar> a = p.row(i), b = p.row((i + 1) % n);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;  // adjacent
      const Eigen::Vector2<Scalar> c = p.row(j), d = p.row((j + 1) % n);
      if (segments_intersect<Scalar>(a, b, c, d)) return false;
    }
  }
  return true;
}

template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  a = std::fmod(a, two_pi);
  if (a < 0) a += two_pi;
  return a;
}

}  // namespace detail

template <typename Scalar>
void validate_curve(const BoundaryCurve<Scalar>& curve) {
  const Eigen::Index n = curve.size();
  if (n < 8) throw InputError("boundary curve needs at least 8 points, got " + std::to_string(n));
  Scalar diam = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    diam = std::max(diam, (curve.points.row(i) - curve.points.row(0)).norm());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar d = (curve.points.row((i + 1) % n) - curve.points.row(i)).norm();
    if (d <= Scalar(1e-14) * diam)
      throw GeometryError("consecutive boundary points coincide at index " + std::to_string(i));
  }
  if (detail::signed_area<Scalar>(curve.points) <= 0)
    throw GeometryError("boundary curve must be counterclockwise (signed area > 0)");
  if (!detail::curve_is_simple<Scalar>(curve.points))
    throw GeometryError("boundary curve is self-intersecting");
}

/// Center the curve on its vertex centroid, scale so max |z| = 1, place
/// electrodes at the given boundary angles and tabulate arclength data.
/// The centered curve must be star-shaped about the centroid: polar angles
/// of its vertices have to be strictly increasing along the curve, since
/// electrodes and the arclength function are parameterized by angle.
template <typename Scalar>
NormalizedDomain<Scalar> normalize_domain(const BoundaryCurve<Scalar>& raw,
                                          const Vector<Scalar>& electrode_angles,
                                          std::optional<Scalar> electrode_area = std::nullopt) {
  using std::numbers::pi_v;
  const Scalar two_pi = Scalar(2) * pi_v<Scalar>;
  validate_curve(raw);

  const Eigen::Index L = electrode_angles.size();
  if (L < 4) throw InputError("need at least 4 electrodes, got " + std::to_string(L));
  if (electrode_angles(0) < 0 || electrode_angles(0) >= two_pi)
    throw InputError("first electrode angle must lie in [0, 2*pi)");
  for (Eigen::Index l = 1; l < L; ++l)
    if (electrode_angles(l) <= electrode_angles(l - 1))
      throw InputError("electrode angles must be strictly increasing");
  if (electrode_angles(L - 1) - electrode_angles(0) >= two_pi)
    throw InputError("electrode angles span more than one revolution");

  NormalizedDomain<Scalar> dom;
  const Eigen::Index n = raw.size();
  dom.center = raw.points.colwise().mean();
  Points2<Scalar> pts = raw.points.rowwise() - dom.center.transpose();
  dom.scale = pts.rowwise().norm().maxCoeff();
  if (dom.scale <= 0) throw GeometryError("degenerate boundary curve");
  pts /= dom.scale;
  dom.boundary.points = pts;

  // Vertex polar angles must be strictly increasing along the curve
  // (exactly one wrap over the closed loop).
  Vector<Scalar> phi(n);
  for (Eigen::Index i = 0; i < n; ++i) phi(i) = detail::wrap_angle(std::atan2(pts(i, 1), pts(i, 0)));
  int wraps = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = phi(i), b = phi((i + 1) % n);
    if (b <= a) ++wraps;
  }
  if (wraps != 1)
    throw GeometryError("boundary curve is not star-shaped about its centroid; "
                        "angle parameterization is ill-defined");

  dom.arclength.resize(n + 1);
  dom.arclength(0) = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    dom.arclength(i + 1) =
        dom.arclength(i) + (pts.row((i + 1) % n) - pts.row(i)).norm();

  dom.electrodes.count = L;
  dom.electrodes.centers = electrode_angles;
  dom.electrodes.positions.resize(L);
  dom.electrode_arclength.resize(L);
  dom.electrode_speed.resize(L);
  dom.electrode_gaps.resize(L);

  // Ray-cast each electrode angle onto the polyline. Segment spans partition
  // [0, 2pi); rounding can land an angle exactly on a span boundary, so the
  // closed comparison is required.
  auto segment_speed = [&](Eigen::Index i) {
    const Scalar a = phi(i), b = phi((i + 1) % n);
    const Scalar s = (b > a) ? b - a : b - a + two_pi;
    return (pts.row((i + 1) % n) - pts.row(i)).norm() / s;
  };
  for (Eigen::Index l = 0; l < L; ++l) {
    const Scalar th = detail::wrap_angle(electrode_angles(l));
    Eigen::Index seg = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar a = phi(i), b = phi((i + 1) % n);
      const Scalar s = (b > a) ? b - a : b - a + two_pi;
      Scalar off = th - a;
      if (off < 0) off += two_pi;
      if (off <= s) {
        seg = i;
        break;
      }
    }
    if (seg < 0) throw GeometryError("failed to locate electrode angle on boundary");
    const Eigen::Vector2<Scalar> a = pts.row(seg), b = pts.row((seg + 1) % n);
    const Scalar dx = std::cos(th), dy = std::sin(th);
    const Scalar denom = detail::cross2<Scalar>(dx, dy, b.x() - a.x(), b.y() - a.y());
    Scalar u;
    if (std::abs(denom) < Scalar(1e-30)) {
      u = 0;  // ray parallel to segment: vertex hit
    } else {
      u = detail::cross2<Scalar>(a.x(), a.y(), dx, dy) / denom;
    }
    u = std::min(std::max(u, Scalar(0)), Scalar(1));
    const Eigen::Vector2<Scalar> p = a + u * (b - a);
    dom.electrodes.positions(l) = std::complex<Scalar>(p.x(), p.y());
    const Scalar chord = (b - a).norm();
    dom.electrode_arclength(l) = dom.arclength(seg) + u * chord;
    // centered estimate of |dz/dtheta| when the electrode sits on a vertex
    if (u < Scalar(1e-9))
      dom.electrode_speed(l) =
          (segment_speed((seg + n - 1) % n) + segment_speed(seg)) / Scalar(2);
    else if (u > Scalar(1) - Scalar(1e-9))
      dom.electrode_speed(l) = (segment_speed(seg) + segment_speed((seg + 1) % n)) / Scalar(2);
    else
      dom.electrode_speed(l) = segment_speed(seg);
  }

  for (Eigen::Index l = 0; l < L; ++l) {
    const Scalar prev = electrode_angles((l + L - 1) % L);
    Scalar gap = electrode_angles(l) - prev;
    if (l == 0) gap += two_pi;
    dom.electrode_gaps(l) = gap;
  }

  dom.electrodes.area =
      electrode_area.value_or(dom.perimeter() / Scalar(L));
  if (dom.electrodes.area <= 0) throw InputError("electrode area must be positive");
  return dom;
}

/// Per-electrode arclength values s_l and angular gaps dtheta_l
/// (theta_{-1} = theta_L wraparound for the first gap).
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> electrode_quadrature(const NormalizedDomain<Scalar>& dom) {
  return {dom.electrode_arclength, dom.electrode_gaps};
}

/// Boundary radius at a given polar angle (normalized coordinates).
template <typename Scalar>
Scalar boundary_radius(const NormalizedDomain<Scalar>& dom, Scalar angle) {
  const auto& pts = dom.boundary.points;
  const Eigen::Index n = pts.rows();
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar th = detail::wrap_angle(angle);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2<Scalar> a = pts.row(i), b = pts.row((i + 1) % n);
    const Scalar pa = detail::wrap_angle(std::atan2(a.y(), a.x()));
    const Scalar pb = detail::wrap_angle(std::atan2(b.y(), b.x()));
    const Scalar s = (pb > pa) ? pb - pa : pb - pa + two_pi;
    Scalar off = th - pa;
    if (off < 0) off += two_pi;
    if (off <= s) {
      const Scalar dx = std::cos(th), dy = std::sin(th);
      const Scalar denom = detail::cross2<Scalar>(dx, dy, b.x() - a.x(), b.y() - a.y());
      Scalar u = 0;
      if (std::abs(denom) >= Scalar(1e-30))
        u = detail::cross2<Scalar>(a.x(), a.y(), dx, dy) / denom;
      u = std::min(std::max(u, Scalar(0)), Scalar(1));
      return (a + u * (b - a)).norm();
    }
  }
  return pts.row(0).norm();
}

/// Circle of the given radius/center sampled at n vertices, vertex 0 at angle 0.
template <typename Scalar>
BoundaryCurve<Scalar> make_disk_boundary(Eigen::Index n, Scalar radius = Scalar(1),
                                         Eigen::Vector2<Scalar> center = Eigen::Vector2<Scalar>::Zero()) {
  BoundaryCurve<Scalar> c;
  c.points.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(i) / Scalar(n);
    c.points(i, 0) = center.x() + radius * std::cos(a);
    c.points(i, 1) = center.y() + radius * std::sin(a);
  }
  return c;
}

/// Chest-like cross-section: wider than tall with a flatter top,
/// r(theta) = 1 + 0.18 cos 2theta + 0.04 cos 4theta - 0.06 sin theta.
template <typename Scalar>
Scalar chest_radius(Scalar theta) {
  return Scalar(1) + Scalar(0.18) * std::cos(2 * theta) + Scalar(0.04) * std::cos(4 * theta) -
         Scalar(0.06) * std::sin(theta);
}

template <typename Scalar>
BoundaryCurve<Scalar> make_chest_boundary(Eigen::Index n) {
  BoundaryCurve<Scalar> c;
  c.points.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(i) / Scalar(n);
    const Scalar r = chest_radius(a);
    c.points(i, 0) = r * std::cos(a);
    c.points(i, 1) = r * std::sin(a);
  }
  return c;
}

/// L equispaced electrode angles starting at 0.
template <typename Scalar>
Vector<Scalar> equispaced_angles(Eigen::Index L) {
  Vector<Scalar> a(L);
  for (Eigen::Index l = 0; l < L; ++l)
    a(l) = Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(l) / Scalar(L);
  return a;
}

}  // namespace dbar
