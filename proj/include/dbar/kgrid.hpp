#pragma once

// Uniform square grid in the spectral k-plane.

#include <cmath>
#include <string>

#include "dbar/errors.hpp"
#include "dbar/types.hpp"

namespace dbar {

/// M x M grid on [-s,s]^2 with M = 2^n and h = 2s/(M-1);
/// points(i,j) = (-s + i h) + i*(-s + j h). For even M the origin is not a
/// grid point; if a point falls within 1e-14 of the origin it is flagged and
/// treated specially by the Green's kernel and the multiplier.
template <typename Scalar>
struct KGrid {
  Scalar halfwidth = Scalar(0);  // s
  int size = 0;                  // M
  Scalar step = Scalar(0);       // h
  Scalar radius = Scalar(0);     // truncation radius R of the scattering disk
  ComplexMatrix<Scalar> points;
  BoolGrid mask;        // |k| <= R
  bool has_origin = false;

  Eigen::Index count() const { return Eigen::Index(size) * size; }
};

template <typename Scalar>
KGrid<Scalar> build_kgrid(Scalar s, int n, Scalar radius) {
  if (n < 2) throw ConfigError("k-grid exponent must be at least 2");
  if (s < radius)
    throw ConfigError("k-grid half-width " + std::to_string(s) + " is below the truncation radius " +
                      std::to_string(radius) + "; truncated scattering would be clipped");
  KGrid<Scalar> g;
  g.halfwidth = s;
  g.size = 1 << n;
  g.step = Scalar(2) * s / Scalar(g.size - 1);
  g.radius = radius;
  g.points.resize(g.size, g.size);
  g.mask.resize(g.size, g.size);
  for (int i = 0; i < g.size; ++i) {
    const Scalar re = -s + g.step * Scalar(i);
    for (int j = 0; j < g.size; ++j) {
      const Scalar im = -s + g.step * Scalar(j);
      g.points(i, j) = std::complex<Scalar>(re, im);
      const Scalar mag = std::hypot(re, im);
      g.mask(i, j) = mag <= radius;
      if (mag < Scalar(1e-14)) g.has_origin = true;
    }
  }
  return g;
}

}  // namespace dbar
