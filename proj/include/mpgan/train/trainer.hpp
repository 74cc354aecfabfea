#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpgan/data/batches.hpp"
#include "mpgan/data/samples.hpp"
#include "mpgan/nets/network.hpp"
#include "mpgan/train/adam.hpp"
#include "mpgan/train/checkpoint.hpp"
#include "mpgan/train/losses.hpp"
#include "mpgan/train/schedule.hpp"

namespace mpgan::train {

using nets::GrowthState;
using nets::NetworkSpec;

/// Desk-scale runs divide every schedule length by this.
inline constexpr std::int64_t kDeskScaleDivisor = 100;

struct TrainConfig {
  int pass = 1;    ///< 1: XY-plane generator; 2: YZ-plane refinement
  int factor = 8;  ///< 4 or 8
  LossWeights loss;
  AdamConfig adam;
  ScheduleConfig schedule;
  int spatial_batch = data::kSpatialBatch;
  int temporal_batch = data::kTemporalBatch;
  bool desk_scale = false;
  /// Iterations to run; 0 runs the whole schedule.
  std::int64_t iterations = 0;
  std::uint64_t seed = 1;
  /// Frame spacing used by the temporal warp.
  double dt = 0.5;
  std::int64_t checkpoint_every = 1000;
  int divergence_patience = 100;
  double divergence_threshold = 1e6;

  /// Defaults for a network family; desk scale shrinks the schedule.
  static TrainConfig make(int pass, int factor, LossKind kind, bool desk_scale);
  void validate() const;
  std::int64_t total_iterations() const { return iterations > 0 ? iterations : schedule.total_iterations(); }

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct NetworkSet {
  NetworkSpec generator;
  NetworkSpec spatial;
  NetworkSpec temporal;
};

/// The generator and critics trained for (pass, factor).
NetworkSet networks_for(int pass, int factor);

struct TrainData {
  std::vector<data::SliceSample> spatial;
  std::vector<data::TripletSample> temporal;  ///< empty disables the temporal critic
};

/// Fixed CSV schema of the training log.
const std::vector<std::string>& log_columns();

struct StepRecord {
  std::int64_t iteration = 0;
  int stage = 0;
  double alpha = 1.0;
  double lr_scale = 1.0;
  double d_spatial = 0, d_temporal = 0, gp_spatial = 0, gp_temporal = 0;
  double g_adv_spatial = 0, g_adv_temporal = 0, g_feature = 0, g_l1 = 0, g_total = 0;
  bool skipped = false;
  double wall_seconds = 0;

  std::string csv_row() const;
};

class Trainer {
 public:
  Trainer(TrainConfig cfg, TrainData data);

  /// One critic update followed by one generator update.
  StepRecord step();

  /// Runs until `total_iterations()`; writes `train_log.csv` and periodic
  /// checkpoints under `out_dir` when it is non-empty.
  void run(const std::filesystem::path& out_dir, const std::function<void(const StepRecord&)>& on_step = {});

  Checkpoint checkpoint() const;
  /// Restores weights, optimiser moments, counters and RNG streams.
  void resume(const Checkpoint& ckpt);

  std::int64_t iteration() const { return iteration_; }
  const TrainConfig& config() const { return cfg_; }
  const NetworkSet& nets() const { return nets_; }
  const WeightStore& generator() const { return g_; }
  const WeightStore& spatial_critic() const { return ds_; }
  const WeightStore& temporal_critic() const { return dt_; }
  WeightStore& generator() { return g_; }

 private:
  struct Batch;
  GrowthState growth_at(const SchedulePoint& p) const;

  TrainConfig cfg_;
  TrainData data_;
  NetworkSet nets_;
  WeightStore g_, ds_, dt_;
  Adam opt_g_, opt_ds_, opt_dt_;
  std::unique_ptr<data::BatchStream> spatial_stream_, temporal_stream_;
  std::mt19937_64 mix_rng_;
  std::int64_t iteration_ = 0;
  int bad_steps_ = 0;
};

/// Generator weights plus the metadata needed for inference.
struct GeneratorCheckpoint {
  int pass = 1;
  int factor = 8;
  NetworkSpec spec;
  WeightStore weights;
};
GeneratorCheckpoint load_generator(const std::filesystem::path& dir);

}  // namespace mpgan::train
