#pragma once

#include <vector>

#include "ala/core/types.hpp"

namespace ala::losses {

/// Validation confusion statistics: C(i,j) is the mean over class-i samples
/// of −log p_j (probabilities clamped to [1e-7, 1 − 1e-7]).
struct ConfusionMatrix {
  Matrix values;
  std::vector<int> counts;    // samples per true class
  std::vector<bool> absent;   // classes with no samples; their rows are 0

  int num_classes() const { return static_cast<int>(values.rows()); }
  bool any_absent() const;
};

/// InputError if a label is outside [0, num_classes) or the probability
/// matrix width disagrees with num_classes.
ConfusionMatrix confusion_matrix(const Matrix& probs, const std::vector<int>& labels,
                                 int num_classes);

}  // namespace ala::losses
