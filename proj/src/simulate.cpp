#include "dbar/simulate.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "dbar/patterns.hpp"

namespace dbar {

NormalizedDomain<double> resolve_geometry(const std::string& name, int boundary_points,
                                          int electrodes, std::optional<double> area) {
  BoundaryCurve<double> curve;
  Vector<double> angles;
  if (name == "disk") {
    curve = make_disk_boundary<double>(boundary_points);
    angles = equispaced_angles<double>(electrodes);
  } else if (name == "chest") {
    curve = make_chest_boundary<double>(boundary_points);
    angles = equispaced_angles<double>(electrodes);
  } else {
    const auto fx = load_boundary_fixture(name);
    curve = fx.curve;
    angles = fx.electrode_angles;
    if (!area) area = fx.area;
  }
  return normalize_domain<double>(curve, angles, area);
}

namespace {

// Contrast scale for frame f: 1 at f=0, dipping by `depth` over a period.
double modulation_scale(const ModulationSpec& mod, int frame) {
  if (mod.type != "sine") return 1.0;
  if (mod.period_frames < 1) throw InputError("modulation period must be at least one frame");
  const double phase = 2.0 * std::numbers::pi * double(frame) / double(mod.period_frames);
  return 1.0 - mod.depth * (0.5 - 0.5 * std::cos(phase));
}

class FrameSynthesizer {
 public:
  FrameSynthesizer(const SimulateConfig& cfg, const NormalizedDomain<double>& geom,
                   const CurrentPatternSet<double>& patterns)
      : cfg_(cfg), geom_(geom), patterns_(patterns) {}

  // `scale` scales the phantom contrast (sigma - 1) for modulation.
  Eigen::MatrixXd solve(const PhantomSpec& spec, double scale) {
    const double key = spec_key(spec) + scale;
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    Eigen::MatrixXd V;
    if (spec.type == "homogeneous") {
      RadialPhantom<double> ph{0.5, 1.0};
      V = is_disk() ? solve_radial_voltages<double>(ph, geom_, patterns_, cfg_.max_mode)
                    : fem_for(spec, 1.0);
    } else if (spec.type == "radial") {
      RadialPhantom<double> ph{spec.rho, 1.0 + (spec.sigma_in - 1.0) * scale};
      if (ph.sigma_in <= 0)
        throw InputError("modulated inclusion conductivity is not positive");
      V = solve_radial_voltages<double>(ph, geom_, patterns_, cfg_.max_mode);
    } else if (spec.type == "mesh") {
      V = fem_for(spec, scale);
    } else {
      throw InputError("unknown phantom type '" + spec.type + "'");
    }
    cache_.emplace(key, V);
    return V;
  }

 private:
  bool is_disk() const {
    for (Eigen::Index i = 0; i < geom_.boundary.size(); ++i)
      if (std::abs(geom_.boundary.points.row(i).norm() - 1.0) > 1e-9) return false;
    return true;
  }

  static double spec_key(const PhantomSpec& spec) {
    // distinguishes phantom identities in the cache; scale is added on top
    double k = spec.type == "radial" ? 1e6 : (spec.type == "mesh" ? 2e6 : 3e6);
    k += spec.rho * 1e3 + spec.sigma_in * 17.0;
    for (const auto& r : spec.regions) k += r.cx * 3 + r.cy * 5 + r.radius * 7 + r.sigma * 11;
    return k;
  }

  Eigen::MatrixXd fem_for(const PhantomSpec& spec, double scale) {
    MeshPhantom<double> mesh;
    if (spec.mesh.empty() || spec.mesh == "domain" || spec.mesh == "disk" || spec.mesh == "chest")
      mesh = make_domain_mesh<double>(geom_, spec.rings);
    else
      mesh = load_mesh_fixture(spec.mesh);
    for (const auto& r : spec.regions) {
      const double value = 1.0 + (r.sigma - 1.0) * scale;
      if (value <= 0) throw InputError("modulated region conductivity is not positive");
      set_region_sigma<double>(mesh, r.cx, r.cy, r.radius, value);
    }
    return fem_voltages<double>(mesh, geom_, patterns_);
  }

  const SimulateConfig& cfg_;
  const NormalizedDomain<double>& geom_;
  const CurrentPatternSet<double>& patterns_;
  std::map<double, Eigen::MatrixXd> cache_;
};

}  // namespace

SyntheticSession simulate_session(const SimulateConfig& cfg) {
  if (cfg.frames < 1) throw InputError("simulation needs at least one frame");
  if (cfg.reference_index < 0 || cfg.reference_index >= cfg.frames)
    throw InputError("reference_index must name one of the simulated frames");

  const auto geom =
      resolve_geometry(cfg.geometry, cfg.boundary_points, cfg.electrodes, cfg.electrode_area);
  const auto patterns = make_pattern_set<double>(geom, cfg.skip, cfg.amplitude);

  SyntheticSession session;
  session.L = int(patterns.L);
  session.skip = int(patterns.skip);
  session.amplitude = cfg.amplitude;
  session.reference_index = cfg.reference_index;

  FrameSynthesizer synth(cfg, geom, patterns);
  session.frames.reserve(size_t(cfg.frames));
  for (int f = 0; f < cfg.frames; ++f) {
    if (f == cfg.reference_index) {
      session.frames.push_back(synth.solve(cfg.reference, 1.0));
    } else {
      session.frames.push_back(synth.solve(cfg.phantom, modulation_scale(cfg.modulation, f)));
    }
  }
  return add_noise(session, cfg.noise, cfg.seed);
}

}  // namespace dbar
