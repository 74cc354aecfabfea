#pragma once

#include <cstdint>

namespace mpgan::train {

struct ScheduleConfig {
  /// Growing runs fade stages first_stage..final_stage in; otherwise the
  /// final stage trains at alpha 1 from the start.
  bool growing = true;
  int first_stage = 1;
  int final_stage = 3;
  std::int64_t blend_iters = 120000;
  std::int64_t stabilize_iters = 120000;
  std::int64_t decay_iters = 160000;

  static ScheduleConfig first_pass_8x();
  static ScheduleConfig second_pass();
  static ScheduleConfig first_pass_4x();
  /// All iteration counts divided by `divisor` (rounded, at least 1).
  ScheduleConfig scaled(std::int64_t divisor) const;
  void validate() const;

  std::int64_t growth_iterations() const;
  std::int64_t total_iterations() const { return growth_iterations() + decay_iters; }
};

struct SchedulePoint {
  int stage = 0;
  double alpha = 1.0;
  double lr_scale = 1.0;
  bool fading = false;
};

/// Piecewise-linear curriculum: per stage a linear alpha ramp over
/// blend_iters, a hold at 1 for stabilize_iters, then a linear learning-rate
/// decay to 0 over decay_iters after the last stage.
SchedulePoint curriculum_schedule(const ScheduleConfig& cfg, std::int64_t iteration);

}  // namespace mpgan::train
