#pragma once

// Raster (binary PPM) rendering of sigma images with a fixed diverging
// palette, and hand-emitted SVG speedup plots.

#include <array>
#include <string>
#include <vector>

#include "dbar/geometry.hpp"
#include "dbar/pipeline.hpp"
#include "dbar/types.hpp"

namespace dbar {

/// 256-entry blue-white-red palette; index 128 is the neutral midpoint.
const std::array<std::array<unsigned char, 3>, 256>& diverging_palette();

/// Nearest-z-point raster of sigma over the domain on a fixed color scale
/// [1-delta, 1+delta]; pixels outside the boundary are white. Binary PPM (P6).
std::string render_sigma_ppm(const ComplexVector<double>& zmesh, const Eigen::VectorXd& sigma,
                             const NormalizedDomain<double>& dom, double delta, int size);

void write_sigma_ppm(const std::string& path, const ComplexVector<double>& zmesh,
                     const Eigen::VectorXd& sigma, const NormalizedDomain<double>& dom,
                     double delta, int size);

/// Measured (solid) vs Amdahl (dashed) speedup curves, one pair of polylines
/// per mesh, for rows of a single schedule.
std::string render_speedup_svg(const std::vector<TimingReport>& rows, const std::string& schedule);

void write_speedup_svg(const std::string& path, const std::vector<TimingReport>& rows,
                       const std::string& schedule);

}  // namespace dbar
