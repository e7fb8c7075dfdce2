#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "ala/controller/policy.hpp"
#include "ala/core/rng.hpp"

namespace ala::controller {

inline constexpr std::size_t kDefaultReplayCapacity = 1000;

/// Bounded FIFO of past episodes with a seeded uniform sampler.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity = kDefaultReplayCapacity, std::uint64_t seed = 0);

  /// Evicts the oldest episode when full.
  void push(Episode episode);
  /// min(n, size()) distinct episodes, uniformly without replacement.
  std::vector<Episode> sample(std::size_t n);

  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return buffer_.empty(); }
  const std::deque<Episode>& episodes() const { return buffer_; }

 private:
  std::size_t capacity_;
  std::deque<Episode> buffer_;
  Rng rng_;
};

}  // namespace ala::controller
