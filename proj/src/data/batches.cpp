#include "mpgan/data/batches.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>

#include "mpgan/core/volume.hpp"

namespace mpgan::data {

BatchStream::BatchStream(std::size_t pool_size, int batch_size, std::uint64_t seed)
    : pool_(pool_size), batch_(static_cast<std::size_t>(batch_size)), rng_(seed) {
  if (pool_size == 0) throw ValidationError("empty sample pool");
  if (batch_size <= 0) throw ValidationError("batch size must be positive");
  if (pool_size < batch_) {
    throw ValidationError("sample pool of " + std::to_string(pool_size) + " cannot fill one batch of " +
                          std::to_string(batch_size));
  }
  order_.resize(pool_);
  reshuffle();
}

void BatchStream::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

std::vector<std::size_t> BatchStream::next() {
  if (cursor_ + batch_ > pool_) {
    reshuffle();
    ++epoch_;
  }
  std::vector<std::size_t> b(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                             order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + batch_));
  cursor_ += batch_;
  return b;
}

std::string BatchStream::save_state() const {
  std::ostringstream os;
  os << rng_ << ' ' << cursor_ << ' ' << epoch_;
  for (std::size_t i : order_) os << ' ' << i;
  return os.str();
}

void BatchStream::load_state(const std::string& state) {
  std::istringstream is(state);
  std::mt19937_64 rng;
  std::size_t cursor = 0, epoch = 0;
  is >> rng >> cursor >> epoch;
  std::vector<std::size_t> order(pool_);
  for (auto& i : order) is >> i;
  if (!is || cursor > pool_) throw ValidationError("corrupt batch stream state");
  rng_ = rng;
  cursor_ = cursor;
  epoch_ = epoch;
  order_ = std::move(order);
}

}  // namespace mpgan::data
