#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mpgan::data {

inline constexpr int kSpatialBatch = 16;
inline constexpr int kTemporalBatch = 15;

/// Index stream over a sample pool: each epoch is a fresh permutation cut
/// into full batches; the remainder is dropped. Deterministic per seed.
class BatchStream {
 public:
  BatchStream(std::size_t pool_size, int batch_size, std::uint64_t seed);

  std::vector<std::size_t> next();

  std::size_t batches_per_epoch() const { return pool_ / batch_; }
  std::size_t epoch() const { return epoch_; }

  // Checkpointing: the engine state plus position within the current epoch.
  std::string save_state() const;
  void load_state(const std::string& state);

 private:
  void reshuffle();

  std::size_t pool_;
  std::size_t batch_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

}  // namespace mpgan::data
