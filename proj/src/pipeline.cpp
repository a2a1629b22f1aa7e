#include "dbar/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "dbar/zmesh.hpp"

namespace dbar {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::string to_string(Schedule s) { return s == Schedule::PerZ ? "per-z" : "per-frame"; }
std::string to_string(ConvMode c) { return c == ConvMode::Circular ? "circular" : "padded"; }

Schedule schedule_from_string(const std::string& s) {
  if (s == "per-z") return Schedule::PerZ;
  if (s == "per-frame") return Schedule::PerFrame;
  throw ConfigError("unknown schedule '" + s + "' (expected per-z|per-frame)");
}

ConvMode conv_from_string(const std::string& s) {
  if (s == "circular") return ConvMode::Circular;
  if (s == "padded") return ConvMode::Padded;
  throw ConfigError("unknown convolution mode '" + s + "' (expected circular|padded)");
}

void ReconConfig::validate() const {
  if (workers < 1) throw ConfigError("worker count must be at least 1");
  if (k_halfwidth < radius)
    throw ConfigError("k-grid half-width must be at least the truncation radius");
  if (!(tol > 0) || maxit < 1) throw ConfigError("invalid GMRES tolerance/maxit");
  if (!(color_delta > 0)) throw ConfigError("color scale delta must be positive");
}

void parallel_for_indexed(int n_tasks, int workers, const std::function<void(int, int)>& fn) {
  if (n_tasks <= 0) return;
  workers = std::max(1, std::min(workers, n_tasks));
  if (workers == 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&](int worker) {
    try {
      for (;;) {
        const int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n_tasks) break;
        fn(i, worker);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n_tasks, std::memory_order_relaxed);  // drain remaining work
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(size_t(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ReconSetup make_setup(const NormalizedDomain<double>& geom, int skip, double amplitude,
                      const Eigen::MatrixXd& reference_raw, const ComplexVector<double>& zmesh,
                      const ReconConfig& cfg) {
  cfg.validate();
  ReconSetup setup;
  setup.geom = geom;
  setup.patterns = make_pattern_set<double>(geom, skip, amplitude);
  setup.grid = build_kgrid<double>(cfg.k_halfwidth, cfg.k_exponent, cfg.radius);
  setup.green = make_green_fft(setup.grid, cfg.conv == ConvMode::Padded);
  setup.coeffs = exp_coeffs<double>(setup.grid, geom, setup.patterns);
  const auto ref_frame = project_voltages<double>(reference_raw, setup.patterns, 0);
  setup.ref_dn = dn_from_nd(nd_matrix<double>(setup.patterns, ref_frame, geom), cfg.symmetrize);
  setup.zmesh = zmesh;
  return setup;
}

FrameImage reconstruct_frame(const Eigen::MatrixXd& raw_voltages, int frame_index,
                             const ReconSetup& setup, const ReconConfig& cfg, int z_workers,
                             WarmStart* warm, double* loop_seconds) {
  const int m = setup.grid.size;
  const Eigen::Index nz = setup.zmesh.size();

  const auto frame = project_voltages<double>(raw_voltages, setup.patterns, frame_index);
  const auto dn = dn_from_nd(nd_matrix<double>(setup.patterns, frame, setup.geom), cfg.symmetrize);
  const auto t = texp_dif(dn, setup.ref_dn, setup.coeffs, setup.grid);
  const auto mult = multiplier_field(t, setup.grid, setup.zmesh);

  FrameImage image;
  image.frame_index = frame_index;
  image.sigma.resize(nz);
  image.diag.singular_excluded = mult.singular_excluded;

  const bool use_warm = warm != nullptr && cfg.warm_start;
  if (use_warm && !warm->valid) {
    warm->mu.resize(Eigen::Index(m) * m, nz);
    warm->mu.setOnes();
  }

  const size_t zn = static_cast<size_t>(nz);
  std::vector<int> iters(zn);
  std::vector<double> resid(zn), imratio(zn);
  std::vector<char> warned(zn, 0);

  const int workers = std::max(1, z_workers);
  std::vector<DbarScratch<double>> scratch(size_t(std::min<Eigen::Index>(workers, nz)));

  const auto t0 = Clock::now();
  auto z_task = [&](int zi, int wi) {
    auto& ws = scratch[size_t(wi)];
    ComplexMatrix<double> mu;
    if (use_warm)
      mu = Eigen::Map<const ComplexMatrix<double>>(warm->mu.col(zi).data(), m, m);
    else
      mu = ComplexMatrix<double>::Ones(m, m);
    Eigen::Map<const ComplexMatrix<double>> rho(mult.rho.col(zi).data(), m, m);
    const auto rep = gmres_real<double>(mu, rho, setup.green, setup.grid.step, cfg.tol, cfg.maxit, ws);
    const auto ev = eval_sigma<double>(mu, rho, setup.grid);
    image.sigma(zi) = ev.sigma;
    iters[size_t(zi)] = rep.iterations;
    resid[size_t(zi)] = rep.residual;
    imratio[size_t(zi)] = std::abs(ev.mu0.imag()) / std::abs(ev.mu0);
    warned[size_t(zi)] = rep.converged ? 0 : 1;
    if (use_warm)
      Eigen::Map<ComplexMatrix<double>>(warm->mu.col(zi).data(), m, m) = mu;
  };
  try {
    parallel_for_indexed(int(nz), workers, z_task);
  } catch (const NumericalError& e) {
    throw NumericalError("frame " + std::to_string(frame_index) + ": " + e.what());
  }
  const double loop = seconds_since(t0);
  if (loop_seconds) *loop_seconds = loop;
  if (use_warm) warm->valid = true;

  for (Eigen::Index zi = 0; zi < nz; ++zi) {
    image.diag.gmres_max_iterations = std::max(image.diag.gmres_max_iterations, iters[size_t(zi)]);
    image.diag.gmres_max_residual = std::max(image.diag.gmres_max_residual, resid[size_t(zi)]);
    image.diag.max_im_ratio = std::max(image.diag.max_im_ratio, imratio[size_t(zi)]);
    image.diag.solver_warnings += warned[size_t(zi)];
  }
  return image;
}

ReconSequence reconstruct_batch(const SyntheticSession& session, const ReconSetup& setup,
                                const ReconConfig& cfg) {
  cfg.validate();
  if (session.reference_index < 0 || size_t(session.reference_index) >= session.frames.size())
    throw InputError("session reference index out of range");

  std::vector<int> todo;
  for (size_t f = 0; f < session.frames.size(); ++f)
    if (cfg.include_reference || int(f) != session.reference_index) todo.push_back(int(f));

  ReconSequence seq;
  seq.frames.resize(todo.size());
  const auto t0 = Clock::now();

  if (cfg.schedule == Schedule::PerZ) {
    WarmStart warm;
    double loop_total = 0;
    for (size_t i = 0; i < todo.size(); ++i) {
      double loop = 0;
      seq.frames[i] = reconstruct_frame(session.frames[size_t(todo[i])], todo[i], setup, cfg,
                                        cfg.workers, cfg.warm_start ? &warm : nullptr, &loop);
      loop_total += loop;
    }
    seq.loop_s = loop_total;
  } else {
    const auto tl = Clock::now();
    parallel_for_indexed(int(todo.size()), cfg.workers, [&](int i, int) {
      seq.frames[size_t(i)] =
          reconstruct_frame(session.frames[size_t(todo[size_t(i)])], todo[size_t(i)], setup, cfg,
                            /*z_workers=*/1);
    });
    seq.loop_s = seconds_since(tl);
  }
  seq.total_s = seconds_since(t0);
  return seq;
}

std::vector<TimingReport> benchmark(const SyntheticSession& session,
                                    const NormalizedDomain<double>& geom,
                                    const ReconConfig& base_cfg,
                                    const std::vector<std::string>& meshes,
                                    const std::vector<int>& worker_counts,
                                    const std::vector<Schedule>& schedules, int repeats) {
  if (worker_counts.empty() || meshes.empty() || schedules.empty() || repeats < 1)
    throw InputError("benchmark needs at least one mesh, schedule, worker count and repeat");
  std::vector<TimingReport> rows;
  const size_t frames = session.frames.size() - (base_cfg.include_reference ? 0 : 1);

  for (const auto& mesh : meshes) {
    const auto zm = make_zmesh<double>(geom, zmesh_count(mesh));
    for (const auto sched : schedules) {
      double base_total = -1;
      for (const int cores : worker_counts) {
        ReconConfig cfg = base_cfg;
        cfg.schedule = sched;
        cfg.workers = cores;
        std::vector<double> totals, loops;
        for (int r = 0; r < repeats; ++r) {
          const auto t0 = Clock::now();
          const auto setup =
              make_setup(geom, session.skip, session.amplitude,
                         session.frames[size_t(session.reference_index)], zm, cfg);
          const auto seq = reconstruct_batch(session, setup, cfg);
          totals.push_back(seconds_since(t0));
          loops.push_back(seq.loop_s);
        }
        auto median = [](std::vector<double> v) {
          std::sort(v.begin(), v.end());
          return v[v.size() / 2];
        };
        TimingReport row;
        row.schedule = to_string(sched);
        row.mesh = mesh;
        row.cores = cores;
        row.mesh_points = size_t(zm.size());
        row.frame_count = frames;
        row.total_s = median(totals);
        row.loop_s = median(loops);
        row.s_per_frame = row.total_s / double(frames);
        row.parallel_fraction = row.total_s > 0 ? row.loop_s / row.total_s : 0;
        if (base_total < 0) base_total = row.total_s;
        row.speedup = base_total / row.total_s;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

double amdahl_speedup(double p, double n) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("parallel fraction must lie in [0, 1]");
  if (!(n >= 1.0)) throw InputError("worker count must be at least 1");
  return 1.0 / ((1.0 - p) + p / n);
}

double fit_parallel_fraction(const std::vector<double>& cores, const std::vector<double>& speedups) {
  if (cores.size() != speedups.size() || cores.empty())
    throw InputError("speedup fit needs matching nonempty samples");
  auto loss = [&](double p) {
    double acc = 0;
    for (size_t i = 0; i < cores.size(); ++i) {
      const double d = speedups[i] - amdahl_speedup(p, cores[i]);
      acc += d * d;
    }
    return acc;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    if (loss(a) < loss(b))
      hi = b;
    else
      lo = a;
  }
  return (lo + hi) / 2;
}

}  // namespace dbar
