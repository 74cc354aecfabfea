#include "mpgan/solver/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "mpgan/core/fvol.hpp"
#include "mpgan/solver/advection.hpp"
#include "mpgan/solver/resample.hpp"

namespace mpgan::solver {
namespace {

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

bool inside(const SourceSpec& s, const Vec3& p) {
  const Vec3 d = p - s.center;
  return d.x * d.x + d.y * d.y + d.z * d.z <= s.radius * s.radius;
}

}  // namespace

void SimConfig::validate() const {
  if (hr_resolution.nx <= 0 || hr_resolution.ny <= 0 || hr_resolution.nz <= 0) {
    throw ValidationError("hr_resolution must be positive");
  }
  if (upscale_factor != 4 && upscale_factor != 8) throw ValidationError("upscale_factor must be 4 or 8");
  if (hr_resolution.nx % upscale_factor || hr_resolution.ny % upscale_factor || hr_resolution.nz % upscale_factor) {
    throw ValidationError("hr_resolution " + hr_resolution.str() + " not divisible by factor " +
                          std::to_string(upscale_factor));
  }
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (frames < 3) throw ValidationError("frames must be >= 3");
  if (min_inflows < 1 || max_inflows < min_inflows) throw ValidationError("invalid inflow count range");
  if (!(cg_tolerance > 0.0) || cg_max_iter <= 0) throw ValidationError("invalid CG settings");
  if (simulations < 1) throw ValidationError("simulations must be >= 1");
}

Dims SimConfig::lr_resolution() const {
  return {hr_resolution.nx / upscale_factor, hr_resolution.ny / upscale_factor, hr_resolution.nz / upscale_factor};
}

Scenario sample_scenario(const SimConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> count_dist(config.min_inflows, config.max_inflows);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Dims d = config.hr_resolution;
  const double res = std::max({d.nx, d.ny, d.nz});
  const double vscale = res / 64.0;

  Scenario sc;
  sc.buoyancy = {unit(rng) * config.max_buoyancy.x, unit(rng) * config.max_buoyancy.y,
                 unit(rng) * config.max_buoyancy.z};
  const int n = count_dist(rng);
  for (int i = 0; i < n; ++i) {
    SourceSpec s;
    s.radius = std::max(1.5, (0.04 + 0.05 * unit(rng)) * std::min({d.nx, d.ny, d.nz}));
    // Keep the sphere inside the domain; inflows sit in the lower half so plumes have room to rise.
    auto place = [&](int n_axis, double lo_frac, double hi_frac) {
      const double lo = s.radius, hi = n_axis - 1 - s.radius;
      const double a = std::max(lo, lo_frac * n_axis), b = std::min(hi, hi_frac * n_axis);
      return a < b ? a + (b - a) * unit(rng) : 0.5 * (n_axis - 1);
    };
    s.center = {place(d.nx, 0.15, 0.85), place(d.ny, 0.08, 0.5), place(d.nz, 0.15, 0.85)};
    s.density_rate = 0.02 + 0.08 * unit(rng);
    s.inflow_velocity = {(unit(rng) - 0.5) * 0.6 * vscale, unit(rng) * 0.6 * vscale, (unit(rng) - 0.5) * 0.6 * vscale};
    sc.sources.push_back(s);
  }
  return sc;
}

Vec3 effective_buoyancy(const SimConfig& config, const Scenario& scenario) {
  if (!config.scale_buoyancy_by_resolution) return scenario.buoyancy;
  const Dims d = config.hr_resolution;
  return scenario.buoyancy * static_cast<double>(std::max({d.nx, d.ny, d.nz}));
}

void apply_sources(SimState& state, const std::vector<SourceSpec>& sources) {
  const Dims d = state.density.dims();
  for (const SourceSpec& s : sources) {
    const int x0 = std::max(0, static_cast<int>(std::floor(s.center.x - s.radius - 1)));
    const int x1 = std::min(d.nx, static_cast<int>(std::ceil(s.center.x + s.radius + 2)));
    const int y0 = std::max(0, static_cast<int>(std::floor(s.center.y - s.radius - 1)));
    const int y1 = std::min(d.ny, static_cast<int>(std::ceil(s.center.y + s.radius + 2)));
    const int z0 = std::max(0, static_cast<int>(std::floor(s.center.z - s.radius - 1)));
    const int z1 = std::min(d.nz, static_cast<int>(std::ceil(s.center.z + s.radius + 2)));
    for (int z = z0; z < z1; ++z)
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
          if (inside(s, {double(x), double(y), double(z)})) state.density.at(x, y, z) += s.density_rate;
        }
    for (int axis = 0; axis < 3; ++axis) {
      Volume& comp = state.velocity.component(axis);
      const Dims fd = comp.dims();
      for (int z = z0; z < std::min(fd.nz, z1 + 1); ++z)
        for (int y = y0; y < std::min(fd.ny, y1 + 1); ++y)
          for (int x = x0; x < std::min(fd.nx, x1 + 1); ++x) {
            Vec3 p{double(x), double(y), double(z)};
            p[axis] -= 0.5;
            if (inside(s, p)) comp.at(x, y, z) = s.inflow_velocity[axis];
          }
    }
  }
}

StepReport sim_step(SimState& state, const std::vector<SourceSpec>& sources, const StepParams& params) {
  apply_sources(state, sources);
  MacVelocity vel = add_buoyancy(state.velocity, state.density, params.buoyancy, params.dt);
  vel = advect_maccormack(vel, vel, params.dt);
  ProjectionResult proj = project_cg(vel, params.cg_tolerance, params.cg_max_iter);
  state.velocity = std::move(proj.velocity);
  state.density = advect_maccormack(state.density, state.velocity, params.dt);
  for (double& v : state.density.data()) v = std::max(v, 0.0);
  return {proj.residual, proj.iterations, proj.converged};
}

std::string frame_file(const std::string& quantity, int level, int frame) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s_x%d_%04d.fvol", quantity.c_str(), level, frame);
  return buf;
}

std::vector<int> export_levels(int factor) {
  if (factor == 8) return {1, 2, 4, 8};
  return {1, factor};
}

SimulationSummary run_simulation(const SimConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());

  SimulationSummary summary{out_dir, sample_scenario(config), 0, 0};
  const StepParams params{effective_buoyancy(config, summary.scenario), config.dt, config.cg_tolerance,
                          config.cg_max_iter};
  const int f = config.upscale_factor;
  SimState state(config.hr_resolution);
  for (int frame = 0; frame < config.frames; ++frame) {
    const StepReport rep = sim_step(state, summary.scenario.sources, params);
    if (!rep.converged) ++summary.unconverged_steps;
    const Volume vel_hr = state.velocity.centered();
    for (int level : export_levels(f)) {
      const int down = f / level;
      write_fvol(out_dir / frame_file("density", level, frame), solver::downsample_box(state.density, down));
      if (level == 1 || level == f) {
        write_fvol(out_dir / frame_file("velocity", level, frame), downsample_velocity(vel_hr, down));
      }
    }
    ++summary.frames_written;
  }

  nlohmann::json meta = to_json(config);
  meta["scenario"] = to_json(summary.scenario);
  meta["effective_buoyancy"] = vec_json(params.buoyancy);
  meta["unconverged_steps"] = summary.unconverged_steps;
  std::ofstream out(out_dir / "simulation.meta.json");
  if (!out) throw std::runtime_error("cannot write '" + (out_dir / "simulation.meta.json").string() + "'");
  out << meta.dump(2) << "\n";
  return summary;
}

std::vector<SimulationSummary> generate_dataset(const SimConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::vector<SimulationSummary> all;
  for (int i = 0; i < config.simulations; ++i) {
    SimConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(i);
    c.simulations = 1;
    char name[32];
    std::snprintf(name, sizeof(name), "sim_%04d", i);
    all.push_back(run_simulation(c, out_dir / name));
  }
  return all;
}

nlohmann::json to_json(const SimConfig& c) {
  return {{"hr_resolution", {c.hr_resolution.nx, c.hr_resolution.ny, c.hr_resolution.nz}},
          {"upscale_factor", c.upscale_factor},
          {"dt", c.dt},
          {"frames", c.frames},
          {"min_inflows", c.min_inflows},
          {"max_inflows", c.max_inflows},
          {"max_buoyancy", vec_json(c.max_buoyancy)},
          {"scale_buoyancy_by_resolution", c.scale_buoyancy_by_resolution},
          {"cg_tolerance", c.cg_tolerance},
          {"cg_max_iter", c.cg_max_iter},
          {"seed", c.seed},
          {"simulations", c.simulations}};
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig c;
  if (j.contains("hr_resolution")) {
    const auto& r = j.at("hr_resolution");
    if (r.is_number_integer()) {
      const int n = r.get<int>();
      c.hr_resolution = {n, n, n};
    } else {
      c.hr_resolution = {r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>()};
    }
  }
  c.upscale_factor = j.value("upscale_factor", c.upscale_factor);
  c.dt = j.value("dt", c.dt);
  c.frames = j.value("frames", c.frames);
  c.min_inflows = j.value("min_inflows", c.min_inflows);
  c.max_inflows = j.value("max_inflows", c.max_inflows);
  if (j.contains("max_buoyancy")) c.max_buoyancy = vec_from(j.at("max_buoyancy"));
  c.scale_buoyancy_by_resolution = j.value("scale_buoyancy_by_resolution", c.scale_buoyancy_by_resolution);
  c.cg_tolerance = j.value("cg_tolerance", c.cg_tolerance);
  c.cg_max_iter = j.value("cg_max_iter", c.cg_max_iter);
  c.seed = j.value("seed", c.seed);
  c.simulations = j.value("simulations", c.simulations);
  return c;
}

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json sources = nlohmann::json::array();
  for (const SourceSpec& src : s.sources) {
    sources.push_back({{"center", vec_json(src.center)},
                       {"radius", src.radius},
                       {"density_rate", src.density_rate},
                       {"inflow_velocity", vec_json(src.inflow_velocity)}});
  }
  return {{"buoyancy", vec_json(s.buoyancy)}, {"sources", sources}};
}

}  // namespace mpgan::solver
