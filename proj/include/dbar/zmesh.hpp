#pragma once

// Reconstruction point sets ("z-meshes") inside the normalized domain.
// Sunflower (golden-angle) layout gives an exact point count with
// near-uniform coverage; points are scaled radially into non-circular
// domains.

#include <cmath>
#include <numbers>
#include <string>

#include "dbar/errors.hpp"
#include "dbar/geometry.hpp"
#include "dbar/types.hpp"

namespace dbar {

inline constexpr int kCoarseZCount = 562;
inline constexpr int kMediumZCount = 1931;
inline constexpr int kFineZCount = 5916;

template <typename Scalar>
ComplexVector<Scalar> make_zmesh(const NormalizedDomain<Scalar>& dom, Eigen::Index count,
                                 Scalar fill = Scalar(0.95)) {
  if (count < 1) throw InputError("z-mesh needs at least one point");
  ComplexVector<Scalar> z(count);
  const Scalar golden = std::numbers::pi_v<Scalar> * (3 - std::sqrt(Scalar(5)));
  for (Eigen::Index i = 0; i < count; ++i) {
    const Scalar r = std::sqrt((Scalar(i) + Scalar(0.5)) / Scalar(count));
    const Scalar a = detail::wrap_angle(golden * Scalar(i));
    const Scalar rr = fill * r * boundary_radius(dom, a);
    z(i) = std::complex<Scalar>(rr * std::cos(a), rr * std::sin(a));
  }
  return z;
}

/// Named mesh sizes from the benchmark configuration: coarse 562,
/// medium 1931, fine 5916 points.
inline Eigen::Index zmesh_count(const std::string& name) {
  if (name == "coarse") return kCoarseZCount;
  if (name == "medium") return kMediumZCount;
  if (name == "fine") return kFineZCount;
  throw ConfigError("unknown z-mesh name '" + name + "' (expected coarse|medium|fine)");
}

}  // namespace dbar
