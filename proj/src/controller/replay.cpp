#include "ala/controller/replay.hpp"

#include <numeric>

namespace ala::controller {

ReplayMemory::ReplayMemory(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity_ == 0) throw UsageError("replay capacity must be >= 1");
}

void ReplayMemory::push(Episode episode) {
  if (episode.reward < -1 || episode.reward > 1) {
    throw InputError("episode reward must be in {-1, 0, 1}");
  }
  if (!buffer_.empty() && episode.state.size() != buffer_.front().state.size()) {
    throw ShapeError("episode observation layout differs from stored episodes");
  }
  if (buffer_.size() == capacity_) buffer_.pop_front();
  buffer_.push_back(std::move(episode));
}

std::vector<Episode> ReplayMemory::sample(std::size_t n) {
  const std::size_t take = std::min(n, buffer_.size());
  std::vector<std::size_t> idx(buffer_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng_, idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<Episode> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(buffer_[idx[i]]);
  return out;
}

}  // namespace ala::controller
