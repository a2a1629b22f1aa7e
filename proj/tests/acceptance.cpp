// Acceptance suite: one pass/fail line per criterion. Scaling criteria are
// report-only on machines with fewer than 8 hardware threads; the soft
// throughput target is always report-only.

#include <chrono>
#include <map>
#include <cstdio>
#include <cstring>
#include <random>
#include <thread>
#include <vector>

#include "dbar/dbar.hpp"
#include "dbar/pipeline.hpp"
#include "dbar/simulate.hpp"
#include "dbar/zmesh.hpp"

using namespace dbar;
using Clock = std::chrono::steady_clock;
using Complex = std::complex<double>;

namespace {

int failures = 0;

void report(int criterion, bool pass, bool hard, const std::string& detail) {
  const char* tag = pass ? "PASS" : (hard ? "FAIL" : "REPORT");
  std::printf("[%s] criterion %2d: %s\n", tag, criterion, detail.c_str());
  if (!pass && hard) ++failures;
}

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SyntheticSession make_session(int frames, double sigma_in, double noise, std::uint64_t seed) {
  SimulateConfig cfg;
  cfg.geometry = "disk";
  cfg.boundary_points = 64;
  cfg.electrodes = 32;
  cfg.skip = 0;
  cfg.amplitude = 0.823;
  cfg.frames = frames;
  cfg.noise = noise;
  cfg.seed = seed;
  cfg.phantom.type = "radial";
  cfg.phantom.rho = 0.4;
  cfg.phantom.sigma_in = sigma_in;
  return simulate_session(cfg);
}

const NormalizedDomain<double>& disk_geom() {
  static const auto geom = resolve_geometry("disk", 64, 32, std::nullopt);
  return geom;
}

ReconSetup setup_for(const SyntheticSession& session, const ReconConfig& cfg,
                     Eigen::Index zcount = 562) {
  return make_setup(disk_geom(), session.skip, session.amplitude,
                    session.frames[size_t(session.reference_index)],
                    make_zmesh<double>(disk_geom(), zcount), cfg);
}

// ---------------------------------------------------------------------------

void criterion_1_homogeneous_fixed_point() {
  const auto t0 = Clock::now();
  const auto session = make_session(2, 1.0, 0.0, 0);
  ReconConfig cfg;  // defaults: M=16, R=3.8, circular, tol 1e-4
  const auto setup = setup_for(session, cfg);
  const auto seq = reconstruct_batch(session, setup, cfg);
  const double dev = (seq.frames.at(0).sigma.array() - 1.0).abs().maxCoeff();

  // t forced to zero: sigma must be 1 to 1e-6 at every z
  ScatteringField<double> zero;
  zero.radius = setup.grid.radius;
  zero.values = ComplexMatrix<double>::Zero(setup.grid.size, setup.grid.size);
  const auto mult = multiplier_field(zero, setup.grid, setup.zmesh);
  DbarScratch<double> ws;
  double dev0 = 0;
  for (Eigen::Index zi = 0; zi < setup.zmesh.size(); ++zi) {
    ComplexMatrix<double> mu = ComplexMatrix<double>::Ones(setup.grid.size, setup.grid.size);
    Eigen::Map<const ComplexMatrix<double>> rho(mult.rho.col(zi).data(), setup.grid.size,
                                                setup.grid.size);
    gmres_real<double>(mu, rho, setup.green, setup.grid.step, cfg.tol, cfg.maxit, ws);
    const auto ev = eval_sigma<double>(mu, rho, setup.grid);
    dev0 = std::max(dev0, std::abs(ev.sigma - 1.0));
  }
  const double secs = elapsed(t0);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "homogeneous fixed point: max|sigma-1| = %.2e (<=0.02), forced t=0 dev = %.2e "
                "(<=1e-6), %.1f s (<10)",
                dev, dev0, secs);
  report(1, dev <= 0.02 && dev0 <= 1e-6 && secs < 10.0, true, buf);
}

void criterion_2_inclusion_detection() {
  const auto t0 = Clock::now();
  ReconConfig cfg;
  bool pass = true;
  char buf[300];
  std::string detail;
  for (const double contrast : {2.0, 0.5}) {
    const auto session = make_session(2, contrast, 0.0, 0);
    const auto setup = setup_for(session, cfg);
    const auto seq = reconstruct_batch(session, setup, cfg);
    const auto& sigma = seq.frames.at(0).sigma;
    Eigen::Index arg = 0;
    (sigma.array() - 1.0).abs().maxCoeff(&arg);
    const double dist = std::max(0.0, std::abs(setup.zmesh(arg)) - 0.4);
    const double change = sigma(arg) - 1.0;
    const bool sign_ok = contrast > 1.0 ? change > 0 : change < 0;
    pass = pass && dist <= 0.2 && sign_ok;
    std::snprintf(buf, sizeof buf, "[sigma_in=%.1f: argmax at |z|=%.3f (dist %.3f<=0.2), change %+.3f] ",
                  contrast, std::abs(setup.zmesh(arg)), dist, change);
    detail += buf;
  }
  const double secs = elapsed(t0);
  const bool time_ok = secs < 2 * 30.0;  // two images, < 30 s each
  std::snprintf(buf, sizeof buf, "inclusion detection: %s%.1f s (<60 for both images)",
                detail.c_str(), secs);
  report(2, pass && time_ok, true, buf);
}

void criterion_3_solver_oracle() {
  const auto t0 = Clock::now();
  const auto grid = build_kgrid<double>(3.8, 3, 3.8);
  const auto green = make_green_fft(grid, false);
  const int m = grid.size;
  double worst = 0;
  for (const std::uint64_t seed : {11, 22, 33, 44, 55}) {
    std::mt19937_64 rng(seed);
    auto uni = [&] { return 2.0 * double(rng() >> 11) * 0x1.0p-53 - 1.0; };
    ComplexMatrix<double> rho(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        rho(i, j) = grid.mask(i, j) ? 0.2 * Complex(uni(), uni()) : Complex(0, 0);

    // dense real-linear matrix assembled from operator applications
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
      dbar_operator<double>(e, rho, green, grid.step, ws, out);
      for (int f = 0; f < m * m; ++f) {
        A(f, col) = out(f % m, f / m).real();
        A(m * m + f, col) = out(f % m, f / m).imag();
      }
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b.head(m * m).setOnes();
    const Eigen::VectorXd x = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(b);

    ComplexMatrix<double> mu = ComplexMatrix<double>::Ones(m, m);
    gmres_real<double>(mu, rho, green, grid.step, 1e-12, n, ws);
    double err = 0;
    for (int f = 0; f < m * m; ++f)
      err = std::max(err, std::abs(mu(f % m, f / m) - Complex(x(f), x(m * m + f))));
    worst = std::max(worst, err / x.cwiseAbs().maxCoeff());
  }
  const double secs = elapsed(t0);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "solver oracle: gmres vs dense solve rel err %.2e (<=1e-8) over 5 seeds, %.1f s (<5)",
                worst, secs);
  report(3, worst <= 1e-8 && secs < 5.0, true, buf);
}

void criterion_4_cauchy_inversion() {
  auto fd_check = [](int M) {
    const double s = 3.8;
    const auto g = build_kgrid<double>(s, int(std::lround(std::log2(M))), s);
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
    double err = 0;
    const double scale = w.cwiseAbs().maxCoeff();
    for (int i = 1; i + 1 < M; ++i)
      for (int j = 1; j + 1 < M; ++j) {
        const double x = g.points(i, j).real(), y = g.points(i, j).imag();
        if ((x * x + y * y) / (r * r) >= 0.8) continue;
        const Complex dx = (F(i + 1, j) - F(i - 1, j)) / (2 * g.step);
        const Complex dy = (F(i, j + 1) - F(i, j - 1)) / (2 * g.step);
        const Complex dbar = 0.5 * (dx + Complex(0, 1) * dy);
        err = std::max(err, std::abs(dbar - w(i, j)));
      }
    return err / scale;
  };
  const double e64 = fd_check(64);
  const double e128 = fd_check(128);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "dbar inversion of padded Cauchy transform: rel err %.2e at M=64 (<=5e-2), %.2e at "
                "M=128 (decreasing)",
                e64, e128);
  report(4, e64 <= 5e-2 && e128 < e64, true, buf);
}

void criterion_5_conjugate_symmetry() {
  const auto session = make_session(2, 2.0, 0.0, 0);
  ReconConfig cfg;
  cfg.conv = ConvMode::Padded;  // accuracy configuration
  cfg.tol = 1e-8;
  cfg.maxit = 40;
  const auto setup = setup_for(session, cfg);

  // scattering symmetry t(-k) = conj(t(k))
  const auto frame = project_voltages<double>(session.frames[1], setup.patterns, 1);
  const auto dn = dn_from_nd(nd_matrix<double>(setup.patterns, frame, setup.geom), true);
  const auto t = texp_dif(dn, setup.ref_dn, setup.coeffs, setup.grid);
  double sym = 0;
  const int m = setup.grid.size;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      sym = std::max(sym, std::abs(t.values(m - 1 - i, m - 1 - j) - std::conj(t.values(i, j))));
  const double tscale = t.values.cwiseAbs().maxCoeff();

  const auto seq = reconstruct_batch(session, setup, cfg);
  const double imratio = seq.frames.at(0).diag.max_im_ratio;
  char buf[220];
  std::snprintf(buf, sizeof buf,
                "conjugate symmetry: max|t(-k)-conj(t(k))| = %.2e (<=1e-12 rel), max|Im mu0|/|mu0| "
                "= %.2e (<=1e-6)",
                sym / tscale, imratio);
  report(5, sym <= 1e-12 * tscale && imratio <= 1e-6, true, buf);
}

void criterion_6_schedule_equivalence() {
  const auto session = make_session(6, 2.0, 1e-3, 3);
  ReconConfig cfg;
  const auto setup = setup_for(session, cfg);
  std::vector<ReconSequence> runs;
  for (const auto sched : {Schedule::PerZ, Schedule::PerFrame}) {
    for (const int workers : {1, 8}) {
      ReconConfig c = cfg;
      c.schedule = sched;
      c.workers = workers;
      runs.push_back(reconstruct_batch(session, setup, c));
    }
  }
  double maxdiff = 0;
  bool bit_identical = true;
  for (size_t r = 1; r < runs.size(); ++r)
    for (size_t f = 0; f < runs[0].frames.size(); ++f) {
      maxdiff = std::max(maxdiff,
                         (runs[r].frames[f].sigma - runs[0].frames[f].sigma).cwiseAbs().maxCoeff());
      bit_identical = bit_identical &&
                      std::memcmp(runs[r].frames[f].sigma.data(), runs[0].frames[f].sigma.data(),
                                  sizeof(double) * size_t(runs[0].frames[f].sigma.size())) == 0;
    }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "schedule/worker determinism over 4 runs: max diff %.1e (<=1e-12), bit-identical: %s",
                maxdiff, bit_identical ? "yes" : "no");
  report(6, maxdiff <= 1e-12, true, buf);
}

void criterion_7_gmres_iterations() {
  const auto session = make_session(360, 1.0, 1e-3, 42);
  ReconConfig cfg;
  cfg.tol = 1e-4;
  cfg.workers = int(std::max(1u, std::thread::hardware_concurrency()));
  cfg.schedule = Schedule::PerFrame;
  const auto setup = setup_for(session, cfg);
  const auto seq = reconstruct_batch(session, setup, cfg);
  int fast = 0;
  for (const auto& f : seq.frames)
    if (f.diag.gmres_max_iterations <= 2) ++fast;
  const double frac = double(fast) / double(seq.frames.size());
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "gmres iteration claim: %.1f%% of %zu frames converged in <=2 iterations at tol "
                "1e-4 (>=95%%)",
                100.0 * frac, seq.frames.size());
  report(7, frac >= 0.95, true, buf);
}

struct BenchOutcome {
  std::vector<TimingReport> rows;
};

BenchOutcome criterion_8_scaling(unsigned hw) {
  const auto session = make_session(7, 1.0, 1e-3, 5);
  ReconConfig cfg;
  BenchOutcome out;
  // per-frame schedule on the medium mesh
  const auto medium = benchmark(session, disk_geom(), cfg, {"medium"}, {1, 2, 4},
                                {Schedule::PerFrame}, 1);
  // per-z schedule on the coarse mesh
  const auto coarse = benchmark(session, disk_geom(), cfg, {"coarse"}, {1, 2, 4, 8},
                                {Schedule::PerZ}, 1);
  out.rows = medium;
  out.rows.insert(out.rows.end(), coarse.begin(), coarse.end());

  double speedup4 = 0;
  for (const auto& r : medium)
    if (r.cores == 4) speedup4 = r.speedup;
  size_t peak = 0;
  for (size_t i = 1; i < coarse.size(); ++i)
    if (coarse[i].speedup > coarse[peak].speedup) peak = i;
  bool no_gain_past_peak = true;
  for (size_t i = peak + 1; i < coarse.size(); ++i)
    no_gain_past_peak = no_gain_past_peak && coarse[i].speedup <= coarse[peak].speedup * 1.05;

  const bool hard = hw >= 8;
  char buf[260];
  std::snprintf(buf, sizeof buf,
                "scaling (%u hw threads%s): per-frame medium speedup@4 = %.2f (>=2.5); per-z coarse "
                "peak at %d workers, no gain past peak: %s",
                hw, hard ? "" : ", report-only", speedup4, coarse[peak].cores,
                no_gain_past_peak ? "yes" : "no");
  report(8, speedup4 >= 2.5 && no_gain_past_peak, hard, buf);
  return out;
}

void criterion_9_throughput(unsigned hw) {
  const auto session = make_session(33, 1.0, 1e-3, 6);
  ReconConfig cfg;
  cfg.workers = int(hw);
  cfg.schedule = Schedule::PerFrame;
  const auto rows =
      benchmark(session, disk_geom(), cfg, {"coarse"}, {int(hw)}, {Schedule::PerFrame}, 1);
  const double spf = rows.at(0).s_per_frame;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "throughput (soft, report-only): coarse mesh s/frame = %.4f at %u workers "
                "(target <= 0.0625 = 16 fps)",
                spf, hw);
  report(9, spf <= 0.0625, false, buf);
}

void criterion_10_amdahl(const BenchOutcome& bench) {
  // formula reproduction: fitted p recovers the generating fraction
  std::vector<double> cores{1, 2, 4, 8, 16}, speeds;
  for (double c : cores) speeds.push_back(amdahl_speedup(0.9, c));
  const double pfit = fit_parallel_fraction(cores, speeds);

  // measured speedups never exceed the Amdahl bound from the measured
  // parallel-loop fraction by more than 10%
  bool bounded = true;
  double worst_excess = 0;
  std::map<std::pair<std::string, std::string>, double> base_fraction;
  for (const auto& r : bench.rows)
    if (r.cores == 1) base_fraction[{r.schedule, r.mesh}] = r.parallel_fraction;
  for (const auto& r : bench.rows) {
    const double p_upper = base_fraction.at({r.schedule, r.mesh});
    const double bound = amdahl_speedup(p_upper, double(r.cores));
    const double excess = r.speedup / bound;
    worst_excess = std::max(worst_excess, excess);
    bounded = bounded && r.speedup <= 1.10 * bound;
  }
  char buf[220];
  std::snprintf(buf, sizeof buf,
                "amdahl harness: fit recovers p=0.9 as %.6f; max measured/bound ratio %.3f "
                "(<=1.10)",
                pfit, worst_excess);
  report(10, std::abs(pfit - 0.9) < 1e-6 && bounded, true, buf);
}

}  // namespace

int main() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::printf("acceptance suite (%u hardware threads)\n", hw);
  criterion_1_homogeneous_fixed_point();
  criterion_2_inclusion_detection();
  criterion_3_solver_oracle();
  criterion_4_cauchy_inversion();
  criterion_5_conjugate_symmetry();
  criterion_6_schedule_equivalence();
  criterion_7_gmres_iterations();
  const auto bench = criterion_8_scaling(hw);
  criterion_9_throughput(hw);
  criterion_10_amdahl(bench);
  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all hard criteria passed\n");
  return 0;
}
