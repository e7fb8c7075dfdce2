#include "ala/losses/confusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ala/losses/losses.hpp"

namespace ala::losses {

bool ConfusionMatrix::any_absent() const {
  return std::find(absent.begin(), absent.end(), true) != absent.end();
}

ConfusionMatrix confusion_matrix(const Matrix& probs, const std::vector<int>& labels,
                                 int num_classes) {
  if (probs.cols() != num_classes) {
    throw ShapeError("confusion_matrix: probabilities have " + std::to_string(probs.cols()) +
                     " columns for " + std::to_string(num_classes) + " classes");
  }
  if (probs.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw ShapeError("confusion_matrix: label count mismatch");
  }
  ConfusionMatrix cm;
  cm.values = Matrix::Zero(num_classes, num_classes);
  cm.counts.assign(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const int y = labels[n];
    if (y < 0 || y >= num_classes) {
      throw InputError("confusion_matrix: label " + std::to_string(y) + " out of range");
    }
    ++cm.counts[static_cast<std::size_t>(y)];
    for (int j = 0; j < num_classes; ++j) {
      const double p = std::clamp(probs(static_cast<Eigen::Index>(n), j), kProbClamp,
                                  1.0 - kProbClamp);
      cm.values(y, j) -= std::log(p);
    }
  }
  cm.absent.assign(static_cast<std::size_t>(num_classes), false);
  for (int i = 0; i < num_classes; ++i) {
    if (cm.counts[static_cast<std::size_t>(i)] == 0) {
      cm.absent[static_cast<std::size_t>(i)] = true;
      cm.values.row(i).setZero();
    } else {
      cm.values.row(i) /= static_cast<double>(cm.counts[static_cast<std::size_t>(i)]);
    }
  }
  return cm;
}

}  // namespace ala::losses
