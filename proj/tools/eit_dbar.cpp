// Command-line front end: simulate synthetic sessions, reconstruct sessions
// to difference images, run benchmarks and render reports.
//
// Exit codes: 0 ok, 2 input/config error, 3 numerical failure.

#include <CLI11.hpp>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "dbar/io.hpp"
#include "dbar/pipeline.hpp"
#include "dbar/render.hpp"
#include "dbar/simulate.hpp"
#include "dbar/version.hpp"
#include "dbar/zmesh.hpp"

namespace fs = std::filesystem;
using namespace dbar;

namespace {

std::string out_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

struct ManifestScope {
  RunManifest m;
  std::string dir;
  void add_input(const std::string& path) { m.inputs[path] = fnv1a64_file(path); }
  void add_output(const std::string& path) { m.outputs.push_back(path); }
  void finish() {
    m.finished_utc = utc_timestamp();
    std::sort(m.outputs.begin(), m.outputs.end());
    write_manifest(out_path(dir, "manifest.json"), m);
  }
};

ComplexVector<double> resolve_zmesh(const std::string& spec, const NormalizedDomain<double>& geom) {
  if (spec == "coarse" || spec == "medium" || spec == "fine")
    return make_zmesh<double>(geom, zmesh_count(spec));
  // otherwise a CSV/JSON-free list: two columns "z_x,z_y" or a sigma CSV
  const std::string text = read_file(spec);
  std::istringstream in(text);
  std::string line;
  std::vector<std::complex<double>> pts;
  while (std::getline(in, line)) {
    if (line.empty() || std::isalpha((unsigned char)line[0])) continue;  // header
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) continue;
    pts.emplace_back(std::stod(a), std::stod(b));
  }
  if (pts.empty()) throw InputError("z-mesh file '" + spec + "' contains no points");
  ComplexVector<double> z(Eigen::Index(pts.size()));
  for (size_t i = 0; i < pts.size(); ++i) z(Eigen::Index(i)) = pts[i];
  return z;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override) {
  AppConfig cfg = load_config(config_path);
  if (!cfg.has_simulate) throw InputError("config has no \"simulate\" section");
  if (seed_override) cfg.simulate.seed = *seed_override;

  ManifestScope ms;
  ms.dir = out_dir;
  ms.m.command = "simulate";
  ms.m.seed = cfg.simulate.seed;
  ms.m.started_utc = utc_timestamp();
  ms.add_input(config_path);

  const auto session = simulate_session(cfg.simulate);
  const std::string session_path = out_path(out_dir, "session.json");
  save_session(session_path, session);
  ms.add_output(session_path);
  ms.m.config_json = config_to_json(cfg);
  ms.finish();
  std::printf("wrote %s (%zu frames, reference %d)\n", session_path.c_str(),
              session.frames.size(), session.reference_index);
  return 0;
}

int cmd_reconstruct(const std::string& session_path, const std::string& config_path,
                    const std::string& out_dir, std::optional<int> cores,
                    std::optional<std::string> schedule, std::optional<std::string> mesh) {
  AppConfig cfg = load_config(config_path);
  if (!cfg.has_reconstruct) throw InputError("config has no \"reconstruct\" section");
  if (cores) cfg.reconstruct.workers = *cores;
  if (schedule) cfg.reconstruct.schedule = schedule_from_string(*schedule);
  if (mesh) cfg.reconstruct.zmesh = *mesh;
  cfg.reconstruct.validate();

  ManifestScope ms;
  ms.dir = out_dir;
  ms.m.command = "reconstruct";
  ms.m.started_utc = utc_timestamp();
  ms.add_input(config_path);
  ms.add_input(session_path);

  const auto session = load_session(session_path);
  const auto geom = resolve_geometry(cfg.geometry, cfg.boundary_points, session.L,
                                     cfg.electrode_area);
  const auto zmesh = resolve_zmesh(cfg.reconstruct.zmesh, geom);
  const auto setup = make_setup(geom, session.skip, session.amplitude,
                                session.frames[size_t(session.reference_index)], zmesh,
                                cfg.reconstruct);
  const auto seq = reconstruct_batch(session, setup, cfg.reconstruct);

  for (const auto& frame : seq.frames) {
    char name[64];
    std::snprintf(name, sizeof name, "sigma_%04d.csv", frame.frame_index);
    const std::string csv = out_path(out_dir, name);
    write_sigma_csv(csv, zmesh, frame.sigma);
    ms.add_output(csv);
    std::snprintf(name, sizeof name, "sigma_%04d.ppm", frame.frame_index);
    const std::string ppm = out_path(out_dir, name);
    write_sigma_ppm(ppm, zmesh, frame.sigma, geom, cfg.reconstruct.color_delta,
                    cfg.reconstruct.raster_size);
    ms.add_output(ppm);
  }
  const std::string diag = out_path(out_dir, "diagnostics.csv");
  write_diagnostics_csv(diag, seq.frames);
  ms.add_output(diag);
  ms.m.config_json = config_to_json(cfg);
  ms.finish();
  std::printf("reconstructed %zu frames in %.3f s (loop %.3f s) to %s\n", seq.frames.size(),
              seq.total_s, seq.loop_s, out_dir.c_str());
  return 0;
}

int cmd_bench(const std::string& session_path, const std::string& config_path,
              const std::string& out_dir, std::vector<int> cores,
              std::optional<std::string> schedule, std::optional<std::string> mesh, int repeats) {
  AppConfig cfg = load_config(config_path);
  if (!cfg.has_reconstruct) throw InputError("config has no \"reconstruct\" section");

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (cores.empty()) cores = {1, 2, 4};
  for (int& c : cores) {
    if (c < 1) throw InputError("core counts must be positive");
    if (unsigned(c) > hw) {
      std::fprintf(stderr, "warning: requested cores %d exceed the %u hardware threads; clamped\n",
                   c, hw);
      c = int(hw);
    }
  }
  std::vector<std::string> meshes =
      mesh ? std::vector<std::string>{*mesh} : std::vector<std::string>{"coarse", "medium", "fine"};
  std::vector<Schedule> schedules =
      schedule ? std::vector<Schedule>{schedule_from_string(*schedule)}
               : std::vector<Schedule>{Schedule::PerZ, Schedule::PerFrame};

  ManifestScope ms;
  ms.dir = out_dir;
  ms.m.command = "bench";
  ms.m.started_utc = utc_timestamp();
  ms.add_input(config_path);
  ms.add_input(session_path);

  const auto session = load_session(session_path);
  const auto geom = resolve_geometry(cfg.geometry, cfg.boundary_points, session.L,
                                     cfg.electrode_area);
  const auto rows = benchmark(session, geom, cfg.reconstruct, meshes, cores, schedules, repeats);

  const std::string csv = out_path(out_dir, "bench.csv");
  write_benchmark_csv(csv, rows);
  ms.add_output(csv);
  std::set<std::string> sched_names;
  for (const auto& r : rows) sched_names.insert(r.schedule);
  for (const auto& s : sched_names) {
    const std::string svg = out_path(out_dir, "speedup_" + s + ".svg");
    write_speedup_svg(svg, rows, s);
    ms.add_output(svg);
  }
  ms.m.config_json = config_to_json(cfg);
  ms.finish();
  std::printf("wrote %s (%zu rows)\n", csv.c_str(), rows.size());
  return 0;
}

int cmd_report(const std::string& bench_csv, const std::string& out_dir) {
  const auto rows = load_benchmark_csv(bench_csv);
  if (rows.empty()) throw InputError("benchmark CSV is empty");

  ManifestScope ms;
  ms.dir = out_dir;
  ms.m.command = "report";
  ms.m.started_utc = utc_timestamp();
  ms.add_input(bench_csv);

  std::set<std::string> sched_names;
  for (const auto& r : rows) sched_names.insert(r.schedule);
  for (const auto& s : sched_names) {
    const std::string svg = out_path(out_dir, "speedup_" + s + ".svg");
    write_speedup_svg(svg, rows, s);
    ms.add_output(svg);
  }

  // Text summary: timings are measured from voltage ingestion to image.
  std::string md = "# benchmark report\n\nTimings cover voltage ingestion to image; "
                   "the acquisition-rate target is 0.0625 s/frame (16 frames/s).\n\n";
  md += "| schedule | mesh | cores | total (s) | loop (s) | s/frame | speedup | 16 fps |\n";
  md += "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof line, "| %s | %s | %d | %.4f | %.4f | %.4f | %.2f | %s |\n",
                  r.schedule.c_str(), r.mesh.c_str(), r.cores, r.total_s, r.loop_s, r.s_per_frame,
                  r.speedup, r.s_per_frame <= 0.0625 ? "pass" : "fail");
    md += line;
  }
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.schedule, r.mesh}];
    g.first.push_back(double(r.cores));
    g.second.push_back(r.speedup);
  }
  md += "\nFitted parallel fractions (least squares over the Amdahl curve family):\n\n";
  for (const auto& [key, g] : groups) {
    char line[160];
    std::snprintf(line, sizeof line, "- %s / %s: p = %.4f\n", key.first.c_str(),
                  key.second.c_str(), fit_parallel_fraction(g.first, g.second));
    md += line;
  }
  const std::string report = out_path(out_dir, "report.md");
  write_file(report, md);
  ms.add_output(report);
  ms.finish();
  std::printf("wrote %s\n", report.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) + " " + kToolVersion +
               " - real-time D-bar difference imaging for 2-D EIT"};
  app.require_subcommand(1);

  std::string config_path, session_path, out_dir = ".", bench_csv;
  std::optional<std::uint64_t> seed;
  std::optional<int> cores_one;
  std::optional<std::string> schedule, mesh;
  std::vector<int> cores_list;
  int repeats = 3;

  auto* sim = app.add_subcommand("simulate", "synthesize a voltage session from a phantom config");
  sim->add_option("--config", config_path, "config JSON")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "override the config's noise seed");

  auto* rec = app.add_subcommand("reconstruct", "reconstruct difference images from a session");
  rec->add_option("--session", session_path, "session JSON")->required();
  rec->add_option("--config", config_path, "config JSON")->required();
  rec->add_option("--out", out_dir, "output directory");
  rec->add_option("--cores", cores_one, "worker threads");
  rec->add_option("--schedule", schedule, "per-z | per-frame");
  rec->add_option("--mesh", mesh, "coarse | medium | fine | z-mesh file");

  auto* ben = app.add_subcommand("bench", "timed reconstruction sweeps and speedup plots");
  ben->add_option("--session", session_path, "session JSON")->required();
  ben->add_option("--config", config_path, "config JSON")->required();
  ben->add_option("--out", out_dir, "output directory");
  ben->add_option("--cores", cores_list, "worker counts (repeatable or comma list)")->delimiter(',');
  ben->add_option("--schedule", schedule, "restrict to one schedule");
  ben->add_option("--mesh", mesh, "restrict to one mesh");
  ben->add_option("--repeats", repeats, "runs per row (median reported)");

  auto* rep = app.add_subcommand("report", "render plots and a summary from a benchmark CSV");
  rep->add_option("--bench", bench_csv, "benchmark CSV from the bench command")->required();
  rep->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(config_path, out_dir, seed);
    if (rec->parsed())
      return cmd_reconstruct(session_path, config_path, out_dir, cores_one, schedule, mesh);
    if (ben->parsed())
      return cmd_bench(session_path, config_path, out_dir, cores_list, schedule, mesh, repeats);
    if (rep->parsed()) return cmd_report(bench_csv, out_dir);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
