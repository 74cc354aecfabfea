#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpgan/core/volume.hpp"
#include "mpgan/solver/projection.hpp"

namespace mpgan::solver {

/// Spherical inflow, re-applied every step.
struct SourceSpec {
  Vec3 center;           ///< cell-index space
  double radius = 1.0;   ///< cells
  double density_rate = 0.0;  ///< density added per step inside the sphere
  Vec3 inflow_velocity;  ///< cells per time unit, imposed on faces inside the sphere
};

struct SimConfig {
  Dims hr_resolution{64, 64, 64};
  int upscale_factor = 4;
  double dt = 0.5;
  int frames = 120;
  int min_inflows = 3;
  int max_inflows = 12;
  /// Upper corner of the buoyancy sampling box; the lower corner is the origin.
  Vec3 max_buoyancy{0.0, 3e-4, 0.0};
  /// Buoyancy is given in domain units; forces applied on the grid are
  /// multiplied by the largest grid dimension.
  bool scale_buoyancy_by_resolution = true;
  double cg_tolerance = 1e-6;  ///< relative to the max divergence before projection
  int cg_max_iter = 4000;
  std::uint64_t seed = 0;
  int simulations = 1;

  void validate() const;
  Dims lr_resolution() const;
};

/// Sampled inflow setup for one simulation.
struct Scenario {
  std::vector<SourceSpec> sources;
  Vec3 buoyancy;  ///< as sampled (domain units)
};

Scenario sample_scenario(const SimConfig& config);

/// Grid-space buoyancy force for a scenario under `config`.
Vec3 effective_buoyancy(const SimConfig& config, const Scenario& scenario);

struct StepParams {
  Vec3 buoyancy;  ///< grid-space force
  double dt = 0.5;
  double cg_tolerance = 1e-6;
  int cg_max_iter = 4000;
};

struct SimState {
  Volume density;
  MacVelocity velocity;

  explicit SimState(Dims d) : density(d), velocity(d) {}
};

struct StepReport {
  double residual = 0.0;
  int cg_iterations = 0;
  bool converged = true;
};

/// Writes sources into the state (density added, face velocities imposed).
void apply_sources(SimState& state, const std::vector<SourceSpec>& sources);

/// sources -> buoyancy -> MacCormack velocity advection -> projection -> MacCormack density advection.
StepReport sim_step(SimState& state, const std::vector<SourceSpec>& sources, const StepParams& params);

/// File stem of a level export: level 1 is the LR grid, level f the HR grid.
std::string frame_file(const std::string& quantity, int level, int frame);

struct SimulationSummary {
  std::filesystem::path directory;
  Scenario scenario;
  int frames_written = 0;
  int unconverged_steps = 0;
};

/// Runs one simulation and writes per-frame density/velocity FVOL files at
/// every resolution level plus `simulation.meta.json`.
SimulationSummary run_simulation(const SimConfig& config, const std::filesystem::path& out_dir);

/// Runs `config.simulations` simulations into `out_dir/sim_XXXX` with seeds seed+i.
std::vector<SimulationSummary> generate_dataset(const SimConfig& config, const std::filesystem::path& out_dir);

/// Resolution levels exported for a factor: {1, f} for 4x, {1, 2, 4, 8} for 8x.
std::vector<int> export_levels(int factor);

nlohmann::json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& scenario);

}  // namespace mpgan::solver
