#pragma once

// End-to-end reconstruction under the two parallel schedules (per-frame
// loop parallel over z-points, or batched frames in parallel with serial
// z-loops) plus the benchmark / Amdahl harness.

#include <functional>
#include <string>
#include <vector>

#include "dbar/dbar.hpp"
#include "dbar/dnmap.hpp"
#include "dbar/forward.hpp"
#include "dbar/geometry.hpp"
#include "dbar/patterns.hpp"
#include "dbar/scattering.hpp"
#include "dbar/types.hpp"

namespace dbar {

enum class Schedule { PerZ, PerFrame };
enum class ConvMode { Circular, Padded };

std::string to_string(Schedule s);
std::string to_string(ConvMode c);
Schedule schedule_from_string(const std::string& s);
ConvMode conv_from_string(const std::string& s);

struct ReconConfig {
  double k_halfwidth = 3.8;   // s
  int k_exponent = 4;         // M = 2^n
  double radius = 3.8;        // truncation radius R
  std::string zmesh = "coarse";
  Schedule schedule = Schedule::PerFrame;
  int workers = 1;
  double tol = 1e-4;
  int maxit = 20;
  bool warm_start = false;    // per-z schedule only: previous frame's mu as guess
  bool symmetrize = true;
  ConvMode conv = ConvMode::Circular;
  bool include_reference = false;
  double color_delta = 0.5;   // raster scale [1-delta, 1+delta]
  int raster_size = 256;

  void validate() const;
};

/// Immutable state shared by every frame reconstruction: grids, Green FFT,
/// expansion coefficients, reference DN matrix, z-mesh.
struct ReconSetup {
  NormalizedDomain<double> geom;
  CurrentPatternSet<double> patterns;
  KGrid<double> grid;
  GreenFFT<double> green;
  ExpCoeffs<double> coeffs;
  DNMatrix<double> ref_dn;
  ComplexVector<double> zmesh;
};

ReconSetup make_setup(const NormalizedDomain<double>& geom, int skip, double amplitude,
                      const Eigen::MatrixXd& reference_raw, const ComplexVector<double>& zmesh,
                      const ReconConfig& cfg);

struct FrameDiagnostics {
  int gmres_max_iterations = 0;
  double gmres_max_residual = 0;
  double max_im_ratio = 0;   // max_z |Im mu0| / |mu0|
  int solver_warnings = 0;   // z-solves that hit maxit without tolerance
  int singular_excluded = 0; // singular-kernel grid points excluded from eval
};

struct FrameImage {
  int frame_index = 0;
  Eigen::VectorXd sigma;
  FrameDiagnostics diag;
};

/// Optional streaming state: previous frame's mu fields, one column per z.
struct WarmStart {
  ComplexMatrix<double> mu;
  bool valid = false;
};

/// Reconstruct one frame: DN matrix, scattering transform and multiplier
/// fields serially, then the z-loop with `z_workers` workers. Deterministic:
/// identical output for any worker count or scheduling order.
FrameImage reconstruct_frame(const Eigen::MatrixXd& raw_voltages, int frame_index,
                             const ReconSetup& setup, const ReconConfig& cfg, int z_workers,
                             WarmStart* warm = nullptr, double* loop_seconds = nullptr);

struct ReconSequence {
  std::vector<FrameImage> frames;   // input order
  double setup_s = 0;
  double loop_s = 0;                // parallel-region time only
  double total_s = 0;
};

/// All frames of a session under the configured schedule. Results are
/// numerically identical between schedules and for any worker count.
ReconSequence reconstruct_batch(const SyntheticSession& session, const ReconSetup& setup,
                                const ReconConfig& cfg);

struct TimingReport {
  std::string schedule;
  std::string mesh;
  int cores = 1;
  std::size_t mesh_points = 0;
  std::size_t frame_count = 0;
  double total_s = 0;
  double loop_s = 0;
  double s_per_frame = 0;
  double speedup = 1.0;      // T(base)/T(n), base = first listed worker count
  double parallel_fraction = 0;  // loop_s / total_s of this run
};

/// Timed reconstruction sweeps over meshes, schedules and worker counts;
/// each row is the median of `repeats` runs. Setup is included in total_s,
/// mirroring the runtime-table methodology.
std::vector<TimingReport> benchmark(const SyntheticSession& session,
                                    const NormalizedDomain<double>& geom,
                                    const ReconConfig& base_cfg,
                                    const std::vector<std::string>& meshes,
                                    const std::vector<int>& worker_counts,
                                    const std::vector<Schedule>& schedules, int repeats = 3);

/// Amdahl's law s(n) = 1 / ((1-p) + p/n).
double amdahl_speedup(double p, double n);

/// Least-squares fit of the parallel fraction p to measured speedups.
double fit_parallel_fraction(const std::vector<double>& cores, const std::vector<double>& speedups);

/// Run fn(task, worker) for every task in [0, n); work-stealing over an
/// atomic index with chunk size 1. Exceptions are rethrown in the caller.
void parallel_for_indexed(int n_tasks, int workers, const std::function<void(int, int)>& fn);

}  // namespace dbar
