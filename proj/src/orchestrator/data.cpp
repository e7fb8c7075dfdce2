#include "ala/orchestrator/data.hpp"

namespace ala::orchestrator {

LabeledSet LabeledSet::subset(const std::vector<int>& rows) const {
  LabeledSet out;
  out.num_classes = num_classes;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
    out.y.push_back(y[static_cast<std::size_t>(rows[k])]);
  }
  return out;
}

std::vector<std::vector<int>> LabeledSet::by_class() const {
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < y.size(); ++i) {
    groups[static_cast<std::size_t>(y[i])].push_back(static_cast<int>(i));
  }
  return groups;
}

void LabeledSet::check() const {
  if (x.rows() != static_cast<Eigen::Index>(y.size())) {
    throw ShapeError("data set has " + std::to_string(x.rows()) + " rows and " +
                     std::to_string(y.size()) + " labels");
  }
  if (num_classes < 2) throw InputError("data set needs at least 2 classes");
  for (int label : y) {
    if (label < 0 || label >= num_classes) throw InputError("label out of range");
  }
  if (!x.allFinite()) throw InputError("data set contains non-finite values");
}

}  // namespace ala::orchestrator
