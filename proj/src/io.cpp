#include "dbar/io.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dbar/version.hpp"

namespace dbar {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
  return j;
}

void dump_file(const std::string& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad value for field '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing required field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad value for field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << bytes;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fnv1a64_bytes(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string fnv1a64_file(const std::string& path) { return fnv1a64_bytes(read_file(path)); }

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

BoundaryFixture load_boundary_fixture(const std::string& path) {
  const json j = parse_file(path);
  BoundaryFixture fx;
  const auto pts = require<std::vector<std::vector<double>>>(j, "points");
  fx.curve.points.resize(Eigen::Index(pts.size()), 2);
  for (size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].size() != 2) throw InputError("boundary point " + std::to_string(i) + " is not [x,y]");
    fx.curve.points(Eigen::Index(i), 0) = pts[i][0];
    fx.curve.points(Eigen::Index(i), 1) = pts[i][1];
  }
  const auto angles = require<std::vector<double>>(j, "electrode_angles");
  fx.electrode_angles.resize(Eigen::Index(angles.size()));
  for (size_t i = 0; i < angles.size(); ++i) fx.electrode_angles(Eigen::Index(i)) = angles[i];
  if (j.contains("area") && !j.at("area").is_null()) fx.area = j.at("area").get<double>();
  return fx;
}

void save_boundary_fixture(const std::string& path, const BoundaryFixture& fixture) {
  json j;
  auto& pts = j["points"];
  pts = json::array();
  for (Eigen::Index i = 0; i < fixture.curve.size(); ++i)
    pts.push_back({fixture.curve.points(i, 0), fixture.curve.points(i, 1)});
  auto& ang = j["electrode_angles"];
  ang = json::array();
  for (Eigen::Index i = 0; i < fixture.electrode_angles.size(); ++i)
    ang.push_back(fixture.electrode_angles(i));
  if (fixture.area) j["area"] = *fixture.area;
  dump_file(path, j);
}

MeshPhantom<double> load_mesh_fixture(const std::string& path) {
  const json j = parse_file(path);
  MeshPhantom<double> mesh;
  const auto nodes = require<std::vector<std::vector<double>>>(j, "nodes");
  mesh.nodes.resize(Eigen::Index(nodes.size()), 2);
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].size() != 2) throw InputError("mesh node " + std::to_string(i) + " is not [x,y]");
    mesh.nodes(Eigen::Index(i), 0) = nodes[i][0];
    mesh.nodes(Eigen::Index(i), 1) = nodes[i][1];
  }
  const auto tris = require<std::vector<std::vector<int>>>(j, "triangles");
  mesh.triangles.resize(Eigen::Index(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t) {
    if (tris[t].size() != 3) throw InputError("triangle " + std::to_string(t) + " is not [a,b,c]");
    for (int v = 0; v < 3; ++v) mesh.triangles(Eigen::Index(t), v) = tris[t][size_t(v)];
  }
  mesh.boundary = require<std::vector<int>>(j, "boundary");
  if (j.contains("sigma")) {
    const auto sig = j.at("sigma").get<std::vector<double>>();
    if (sig.size() != tris.size()) throw InputError("sigma length does not match triangle count");
    mesh.sigma.resize(Eigen::Index(sig.size()));
    for (size_t i = 0; i < sig.size(); ++i) mesh.sigma(Eigen::Index(i)) = sig[i];
  } else {
    mesh.sigma = Vector<double>::Ones(mesh.triangle_count());
  }
  validate_mesh(mesh);
  return mesh;
}

void save_mesh_fixture(const std::string& path, const MeshPhantom<double>& mesh) {
  json j;
  j["nodes"] = json::array();
  for (Eigen::Index i = 0; i < mesh.node_count(); ++i)
    j["nodes"].push_back({mesh.nodes(i, 0), mesh.nodes(i, 1)});
  j["triangles"] = json::array();
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t)
    j["triangles"].push_back({mesh.triangles(t, 0), mesh.triangles(t, 1), mesh.triangles(t, 2)});
  j["boundary"] = mesh.boundary;
  j["sigma"] = std::vector<double>(mesh.sigma.data(), mesh.sigma.data() + mesh.sigma.size());
  dump_file(path, j);
}

// ---------------------------------------------------------------------------
// Sessions
// ---------------------------------------------------------------------------

void save_session(const std::string& path, const SyntheticSession& session) {
  json j;
  j["L"] = session.L;
  j["skip"] = session.skip;
  j["amplitude_mA"] = session.amplitude;
  j["reference_index"] = session.reference_index;
  j["noise_level"] = session.noise_level;
  j["seed"] = session.seed;
  auto& frames = j["frames"];
  frames = json::array();
  for (size_t f = 0; f < session.frames.size(); ++f) {
    json jf;
    jf["index"] = int(f);
    auto& v = jf["voltages"];
    v = json::array();
    const auto& m = session.frames[f];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      v.push_back(std::move(row));
    }
    frames.push_back(std::move(jf));
  }
  dump_file(path, j);
}

SyntheticSession load_session(const std::string& path) {
  const json j = parse_file(path);
  SyntheticSession s;
  s.L = require<int>(j, "L");
  s.skip = require<int>(j, "skip");
  s.amplitude = require<double>(j, "amplitude_mA");
  s.reference_index = require<int>(j, "reference_index");
  s.noise_level = get_or<double>(j, "noise_level", 0.0);
  s.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (!j.contains("frames") || !j.at("frames").is_array() || j.at("frames").empty())
    throw InputError("session has no frames");
  const int N = s.L - s.skip - 1;
  s.frames.reserve(j.at("frames").size());
  for (const auto& jf : j.at("frames")) {
    const auto rows = require<std::vector<std::vector<double>>>(jf, "voltages");
    if (int(rows.size()) != s.L)
      throw InputError("frame voltage matrix has " + std::to_string(rows.size()) +
                       " rows, expected " + std::to_string(s.L));
    Eigen::MatrixXd m(s.L, N);
    for (int r = 0; r < s.L; ++r) {
      if (int(rows[size_t(r)].size()) != N)
        throw InputError("frame voltage matrix has wrong column count");
      for (int c = 0; c < N; ++c) m(r, c) = rows[size_t(r)][size_t(c)];
    }
    s.frames.push_back(std::move(m));
  }
  if (s.reference_index < 0 || size_t(s.reference_index) >= s.frames.size())
    throw InputError("reference_index " + std::to_string(s.reference_index) +
                     " is outside the session's " + std::to_string(s.frames.size()) + " frames");
  return s;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

PhantomSpec phantom_from_json(const json& j) {
  PhantomSpec p;
  p.type = get_or<std::string>(j, "type", "radial");
  if (p.type != "radial" && p.type != "mesh" && p.type != "homogeneous")
    throw InputError("phantom type must be radial|mesh|homogeneous, got '" + p.type + "'");
  p.rho = get_or<double>(j, "rho", 0.4);
  p.sigma_in = get_or<double>(j, "sigma_in", 1.0);
  p.mesh = get_or<std::string>(j, "mesh", "");
  p.rings = get_or<int>(j, "rings", 64);
  if (j.contains("regions")) {
    for (const auto& jr : j.at("regions")) {
      PhantomSpec::Region r;
      r.cx = get_or<double>(jr, "cx", 0.0);
      r.cy = get_or<double>(jr, "cy", 0.0);
      r.radius = get_or<double>(jr, "r", 0.2);
      r.sigma = get_or<double>(jr, "sigma", 1.0);
      p.regions.push_back(r);
    }
  }
  return p;
}

json phantom_to_json(const PhantomSpec& p) {
  json j;
  j["type"] = p.type;
  if (p.type == "radial") {
    j["rho"] = p.rho;
    j["sigma_in"] = p.sigma_in;
  } else if (p.type == "mesh") {
    j["mesh"] = p.mesh;
    j["rings"] = p.rings;
    j["regions"] = json::array();
    for (const auto& r : p.regions)
      j["regions"].push_back({{"cx", r.cx}, {"cy", r.cy}, {"r", r.radius}, {"sigma", r.sigma}});
  }
  return j;
}

}  // namespace

AppConfig load_config(const std::string& path) {
  const json j = parse_file(path);
  AppConfig cfg;
  cfg.schema = get_or<std::string>(j, "schema", "");
  if (cfg.schema != kConfigSchema)
    throw InputError("config field 'schema' must be \"" + std::string(kConfigSchema) + "\"");
  cfg.geometry = get_or<std::string>(j, "geometry", "disk");
  cfg.boundary_points = get_or<int>(j, "boundary_points", 256);
  if (j.contains("electrode_area") && !j.at("electrode_area").is_null())
    cfg.electrode_area = j.at("electrode_area").get<double>();

  if (j.contains("simulate")) {
    cfg.has_simulate = true;
    const auto& js = j.at("simulate");
    auto& s = cfg.simulate;
    s.geometry = get_or<std::string>(js, "geometry", cfg.geometry);
    s.boundary_points = get_or<int>(js, "boundary_points", cfg.boundary_points);
    s.electrodes = get_or<int>(js, "electrodes", 32);
    s.skip = get_or<int>(js, "skip", 0);
    s.amplitude = get_or<double>(js, "amplitude_mA", 0.823);
    if (js.contains("electrode_area") && !js.at("electrode_area").is_null())
      s.electrode_area = js.at("electrode_area").get<double>();
    else
      s.electrode_area = cfg.electrode_area;
    s.frames = get_or<int>(js, "frames", 2);
    s.reference_index = get_or<int>(js, "reference_index", 0);
    s.noise = get_or<double>(js, "noise", 0.0);
    s.seed = get_or<std::uint64_t>(js, "seed", 0);
    s.max_mode = get_or<int>(js, "max_mode", 64);
    if (js.contains("phantom")) s.phantom = phantom_from_json(js.at("phantom"));
    if (js.contains("reference_phantom"))
      s.reference = phantom_from_json(js.at("reference_phantom"));
    else
      s.reference.type = "homogeneous";
    if (js.contains("modulation")) {
      const auto& jm = js.at("modulation");
      s.modulation.type = get_or<std::string>(jm, "type", "none");
      if (s.modulation.type != "none" && s.modulation.type != "sine")
        throw InputError("modulation type must be none|sine");
      s.modulation.period_frames = get_or<int>(jm, "period_frames", 40);
      s.modulation.depth = get_or<double>(jm, "depth", 1.0);
    }
  }

  if (j.contains("reconstruct")) {
    cfg.has_reconstruct = true;
    const auto& jr = j.at("reconstruct");
    auto& r = cfg.reconstruct;
    r.k_halfwidth = get_or<double>(jr, "k_halfwidth", 3.8);
    r.k_exponent = get_or<int>(jr, "k_exponent", 4);
    r.radius = get_or<double>(jr, "truncation_radius", 3.8);
    r.zmesh = get_or<std::string>(jr, "zmesh", "coarse");
    r.schedule = schedule_from_string(get_or<std::string>(jr, "schedule", "per-frame"));
    r.workers = get_or<int>(jr, "workers", 1);
    r.tol = get_or<double>(jr, "gmres_tol", 1e-4);
    r.maxit = get_or<int>(jr, "gmres_maxit", 20);
    r.warm_start = get_or<bool>(jr, "warm_start", false);
    r.symmetrize = get_or<bool>(jr, "symmetrize", true);
    r.conv = conv_from_string(get_or<std::string>(jr, "convolution", "circular"));
    r.include_reference = get_or<bool>(jr, "include_reference", false);
    r.color_delta = get_or<double>(jr, "color_delta", 0.5);
    r.raster_size = get_or<int>(jr, "raster_size", 256);
    r.validate();
  }
  return cfg;
}

namespace {
json config_json_tree(const AppConfig& cfg) {
  json j;
  j["schema"] = kConfigSchema;
  j["geometry"] = cfg.geometry;
  j["boundary_points"] = cfg.boundary_points;
  if (cfg.electrode_area) j["electrode_area"] = *cfg.electrode_area;
  if (cfg.has_simulate) {
    const auto& s = cfg.simulate;
    json js;
    js["geometry"] = s.geometry;
    js["boundary_points"] = s.boundary_points;
    js["electrodes"] = s.electrodes;
    js["skip"] = s.skip;
    js["amplitude_mA"] = s.amplitude;
    if (s.electrode_area) js["electrode_area"] = *s.electrode_area;
    js["frames"] = s.frames;
    js["reference_index"] = s.reference_index;
    js["noise"] = s.noise;
    js["seed"] = s.seed;
    js["max_mode"] = s.max_mode;
    js["phantom"] = phantom_to_json(s.phantom);
    js["reference_phantom"] = phantom_to_json(s.reference);
    js["modulation"] = {{"type", s.modulation.type},
                        {"period_frames", s.modulation.period_frames},
                        {"depth", s.modulation.depth}};
    j["simulate"] = std::move(js);
  }
  if (cfg.has_reconstruct) {
    const auto& r = cfg.reconstruct;
    json jr;
    jr["k_halfwidth"] = r.k_halfwidth;
    jr["k_exponent"] = r.k_exponent;
    jr["truncation_radius"] = r.radius;
    jr["zmesh"] = r.zmesh;
    jr["schedule"] = to_string(r.schedule);
    jr["workers"] = r.workers;
    jr["gmres_tol"] = r.tol;
    jr["gmres_maxit"] = r.maxit;
    jr["warm_start"] = r.warm_start;
    jr["symmetrize"] = r.symmetrize;
    jr["convolution"] = to_string(r.conv);
    jr["include_reference"] = r.include_reference;
    jr["color_delta"] = r.color_delta;
    jr["raster_size"] = r.raster_size;
    j["reconstruct"] = std::move(jr);
  }
  return j;
}
}  // namespace

void save_config(const std::string& path, const AppConfig& cfg) {
  dump_file(path, config_json_tree(cfg));
}

std::string config_to_json(const AppConfig& cfg) { return config_json_tree(cfg).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v, int precision = 17) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m, int precision) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += fmt(m(r, c), precision);
    }
    out += '\n';
  }
  write_file(path, out);
}

void write_scattering_csv(const std::string& path, const ScatteringField<double>& t,
                          const KGrid<double>& grid) {
  std::string out = "k_re,k_im,t_re,t_im\n";
  for (int j = 0; j < grid.size; ++j)
    for (int i = 0; i < grid.size; ++i)
      out += fmt(grid.points(i, j).real()) + ',' + fmt(grid.points(i, j).imag()) + ',' +
             fmt(t.values(i, j).real()) + ',' + fmt(t.values(i, j).imag()) + '\n';
  write_file(path, out);
}

void write_mu_csv(const std::string& path, const ComplexMatrix<double>& mu,
                  const KGrid<double>& grid) {
  std::string out = "k_re,k_im,mu_re,mu_im\n";
  for (int j = 0; j < grid.size; ++j)
    for (int i = 0; i < grid.size; ++i)
      out += fmt(grid.points(i, j).real()) + ',' + fmt(grid.points(i, j).imag()) + ',' +
             fmt(mu(i, j).real()) + ',' + fmt(mu(i, j).imag()) + '\n';
  write_file(path, out);
}

void write_sigma_csv(const std::string& path, const ComplexVector<double>& zmesh,
                     const Eigen::VectorXd& sigma) {
  std::string out = "z_x,z_y,sigma\n";
  for (Eigen::Index i = 0; i < zmesh.size(); ++i)
    out += fmt(zmesh(i).real()) + ',' + fmt(zmesh(i).imag()) + ',' + fmt(sigma(i)) + '\n';
  write_file(path, out);
}

void write_diagnostics_csv(const std::string& path, const std::vector<FrameImage>& frames) {
  std::string out =
      "frame,gmres_max_iterations,gmres_max_residual,max_im_ratio,solver_warnings,"
      "singular_excluded\n";
  for (const auto& f : frames)
    out += std::to_string(f.frame_index) + ',' + std::to_string(f.diag.gmres_max_iterations) + ',' +
           fmt(f.diag.gmres_max_residual, 10) + ',' + fmt(f.diag.max_im_ratio, 10) + ',' +
           std::to_string(f.diag.solver_warnings) + ',' + std::to_string(f.diag.singular_excluded) +
           '\n';
  write_file(path, out);
}

void write_benchmark_csv(const std::string& path, const std::vector<TimingReport>& rows) {
  std::string out = "schedule,mesh,cores,total_s,loop_s,s_per_frame,speedup\n";
  for (const auto& r : rows)
    out += r.schedule + ',' + r.mesh + ',' + std::to_string(r.cores) + ',' + fmt(r.total_s, 6) +
           ',' + fmt(r.loop_s, 6) + ',' + fmt(r.s_per_frame, 6) + ',' + fmt(r.speedup, 6) + '\n';
  write_file(path, out);
}

std::vector<TimingReport> load_benchmark_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "schedule,mesh,cores,total_s,loop_s,s_per_frame,speedup")
    throw InputError("'" + path + "' is not a benchmark CSV");
  std::vector<TimingReport> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TimingReport r;
    std::istringstream ls(line);
    std::string field;
    std::getline(ls, r.schedule, ',');
    std::getline(ls, r.mesh, ',');
    std::getline(ls, field, ',');
    r.cores = std::stoi(field);
    std::getline(ls, field, ',');
    r.total_s = std::stod(field);
    std::getline(ls, field, ',');
    r.loop_s = std::stod(field);
    std::getline(ls, field, ',');
    r.s_per_frame = std::stod(field);
    std::getline(ls, field, ',');
    r.speedup = std::stod(field);
    r.parallel_fraction = r.total_s > 0 ? r.loop_s / r.total_s : 0;
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

void write_manifest(const std::string& path, const RunManifest& manifest) {
  json j;
  j["tool"] = kToolName;
  j["tool_version"] = kToolVersion;
  j["command"] = manifest.command;
  j["config"] = json::parse(manifest.config_json.empty() ? "{}" : manifest.config_json);
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["seed"] = manifest.seed;
  j["started_utc"] = manifest.started_utc;
  j["finished_utc"] = manifest.finished_utc;
  dump_file(path, j);
}

}  // namespace dbar
