#pragma once

// File formats: JSON fixtures (boundary, mesh), session files, configs,
// run manifests and the CSV outputs. All writers are deterministic:
// identical inputs produce identical bytes.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbar/forward.hpp"
#include "dbar/geometry.hpp"
#include "dbar/pipeline.hpp"
#include "dbar/scattering.hpp"
#include "dbar/types.hpp"

namespace dbar {

// --- boundary fixture: {"points": [[x,y],...], "electrode_angles": [...], "area": a}

struct BoundaryFixture {
  BoundaryCurve<double> curve;
  Vector<double> electrode_angles;
  std::optional<double> area;
};

BoundaryFixture load_boundary_fixture(const std::string& path);
void save_boundary_fixture(const std::string& path, const BoundaryFixture& fixture);

// --- mesh fixture: {"nodes": [[x,y]...], "triangles": [[a,b,c]...], "boundary": [...]}
//     optional "sigma": per-triangle values (defaults to 1).

MeshPhantom<double> load_mesh_fixture(const std::string& path);
void save_mesh_fixture(const std::string& path, const MeshPhantom<double>& mesh);

// --- session file (patterns-module frame format)

void save_session(const std::string& path, const SyntheticSession& session);
SyntheticSession load_session(const std::string& path);

// --- configuration

struct PhantomSpec {
  std::string type = "radial";  // radial | mesh | homogeneous
  double rho = 0.4;
  double sigma_in = 1.0;
  std::string mesh;             // builtin "disk"/"chest" or a fixture path
  int rings = 64;
  struct Region {
    double cx = 0, cy = 0, radius = 0.2, sigma = 1.0;
  };
  std::vector<Region> regions;
};

struct ModulationSpec {
  std::string type = "none";  // none | sine
  int period_frames = 40;
  double depth = 1.0;
};

struct SimulateConfig {
  std::string geometry = "disk";  // builtin name or fixture path
  int boundary_points = 256;
  int electrodes = 32;
  int skip = 0;
  double amplitude = 0.823;
  std::optional<double> electrode_area;
  int frames = 2;
  int reference_index = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  int max_mode = 64;
  PhantomSpec phantom;
  PhantomSpec reference{"homogeneous"};
  ModulationSpec modulation;
};

struct AppConfig {
  std::string schema;
  bool has_simulate = false;
  bool has_reconstruct = false;
  SimulateConfig simulate;
  ReconConfig reconstruct;
  std::string geometry = "disk";  // geometry used by reconstruct
  int boundary_points = 256;
  std::optional<double> electrode_area;
};

AppConfig load_config(const std::string& path);
void save_config(const std::string& path, const AppConfig& config);
std::string config_to_json(const AppConfig& config);

// --- CSV outputs

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m, int precision = 17);
void write_scattering_csv(const std::string& path, const ScatteringField<double>& t,
                          const KGrid<double>& grid);
void write_mu_csv(const std::string& path, const ComplexMatrix<double>& mu,
                  const KGrid<double>& grid);
void write_sigma_csv(const std::string& path, const ComplexVector<double>& zmesh,
                     const Eigen::VectorXd& sigma);
void write_diagnostics_csv(const std::string& path, const std::vector<FrameImage>& frames);
void write_benchmark_csv(const std::string& path, const std::vector<TimingReport>& rows);
std::vector<TimingReport> load_benchmark_csv(const std::string& path);

// --- run manifest

struct RunManifest {
  std::string command;
  std::string config_json;  // snapshot of the effective configuration
  std::map<std::string, std::string> inputs;   // path -> fnv1a64 hash
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string started_utc;
  std::string finished_utc;
};

std::string fnv1a64_file(const std::string& path);
std::string fnv1a64_bytes(const std::string& bytes);
void write_manifest(const std::string& path, const RunManifest& manifest);

// --- helpers

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);
std::string utc_timestamp();

}  // namespace dbar
