#include "mpgan/train/schedule.hpp"

#include <algorithm>
#include <string>

#include "mpgan/core/volume.hpp"

namespace mpgan::train {

ScheduleConfig ScheduleConfig::first_pass_8x() { return ScheduleConfig{}; }

ScheduleConfig ScheduleConfig::second_pass() {
  ScheduleConfig c;
  c.growing = false;
  c.first_stage = c.final_stage = 0;
  c.decay_iters = 600000;
  return c;
}

ScheduleConfig ScheduleConfig::first_pass_4x() {
  ScheduleConfig c;
  c.growing = false;
  c.first_stage = c.final_stage = 0;
  c.decay_iters = 160000;
  return c;
}

ScheduleConfig ScheduleConfig::scaled(std::int64_t divisor) const {
  if (divisor < 1) throw ValidationError("schedule divisor must be >= 1");
  auto shrink = [divisor](std::int64_t n) { return std::max<std::int64_t>(1, (n + divisor / 2) / divisor); };
  ScheduleConfig c = *this;
  c.blend_iters = shrink(blend_iters);
  c.stabilize_iters = shrink(stabilize_iters);
  c.decay_iters = shrink(decay_iters);
  return c;
}

void ScheduleConfig::validate() const {
  if (blend_iters <= 0 || stabilize_iters <= 0 || decay_iters <= 0) {
    throw ValidationError("schedule iteration counts must be positive");
  }
  if (first_stage < 0 || final_stage < first_stage) {
    throw ValidationError("schedule stages must satisfy 0 <= first <= final, got " + std::to_string(first_stage) +
                          ".." + std::to_string(final_stage));
  }
  if (growing && first_stage == 0) throw ValidationError("growing starts by fading in stage 1 or later");
}

std::int64_t ScheduleConfig::growth_iterations() const {
  if (!growing) return 0;
  return static_cast<std::int64_t>(final_stage - first_stage + 1) * (blend_iters + stabilize_iters);
}

SchedulePoint curriculum_schedule(const ScheduleConfig& cfg, std::int64_t it) {
  if (it < 0) throw ValidationError("iteration must be non-negative");
  SchedulePoint p;
  const std::int64_t grow = cfg.growth_iterations();
  if (it < grow) {
    const std::int64_t per_stage = cfg.blend_iters + cfg.stabilize_iters;
    const std::int64_t k = it / per_stage, local = it % per_stage;
    p.stage = cfg.first_stage + static_cast<int>(k);
    p.fading = local < cfg.blend_iters;
    p.alpha = p.fading ? static_cast<double>(local) / static_cast<double>(cfg.blend_iters) : 1.0;
    return p;
  }
  p.stage = cfg.final_stage;
  const double t = static_cast<double>(it - grow) / static_cast<double>(cfg.decay_iters);
  p.lr_scale = std::max(0.0, 1.0 - t);
  return p;
}

}  // namespace mpgan::train
