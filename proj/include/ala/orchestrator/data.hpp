#pragma once

#include <vector>

#include "ala/core/types.hpp"

namespace ala::orchestrator {

/// Examples (one per row) with integer class labels.
struct LabeledSet {
  Matrix x;
  std::vector<int> y;
  int num_classes = 0;

  std::size_t size() const { return y.size(); }
  LabeledSet subset(const std::vector<int>& rows) const;
  /// Row indices grouped by label.
  std::vector<std::vector<int>> by_class() const;
  /// ShapeError / InputError if rows, labels and class count disagree.
  void check() const;
};

}  // namespace ala::orchestrator
