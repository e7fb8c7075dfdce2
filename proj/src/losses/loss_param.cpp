#include "ala/losses/loss_param.hpp"

#include <algorithm>
#include <cmath>

namespace ala::losses {

std::string to_string(LossMode m) {
  switch (m) {
    case LossMode::kClassCorrelation:
      return "class-correlation";
    case LossMode::kDistanceMixture:
      return "distance-mixture";
    case LossMode::kFocalWeighting:
      return "focal-weighting";
  }
  return "?";
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "class-correlation") return LossMode::kClassCorrelation;
  if (s == "distance-mixture") return LossMode::kDistanceMixture;
  if (s == "focal-weighting") return LossMode::kFocalWeighting;
  throw UsageError("unknown loss mode '" + s + "'");
}

LossParameterization LossParameterization::identity(int num_classes) {
  if (num_classes < 2) throw UsageError("class-correlation needs at least 2 classes");
  return {LossMode::kClassCorrelation, Matrix::Identity(num_classes, num_classes)};
}

LossParameterization LossParameterization::default_mixture() {
  Matrix v = Matrix::Zero(kMixtureSize, 1);
  v(0, 0) = 1.0;  // d²
  v(5, 0) = 1.0;  // 0.5·d⁻¹
  return {LossMode::kDistanceMixture, std::move(v)};
}

LossParameterization LossParameterization::default_focal() {
  return {LossMode::kFocalWeighting, Matrix::Ones(2, 1)};
}

LossParameterization LossParameterization::initial(LossMode mode, int num_classes) {
  switch (mode) {
    case LossMode::kClassCorrelation:
      return identity(num_classes);
    case LossMode::kDistanceMixture:
      return default_mixture();
    case LossMode::kFocalWeighting:
      return default_focal();
  }
  throw UsageError("unknown loss mode");
}

int LossParameterization::num_parameters() const {
  switch (mode_) {
    case LossMode::kClassCorrelation: {
      const int n = num_classes();
      return n * (n - 1) / 2;
    }
    case LossMode::kDistanceMixture:
      return kMixtureSize;
    case LossMode::kFocalWeighting:
      return 2;
  }
  return 0;
}

void LossParameterization::check_id(int id) const {
  if (id < 0 || id >= num_parameters()) {
    throw UsageError("loss parameter id " + std::to_string(id) + " out of range for " +
                     to_string(mode_));
  }
}

std::pair<int, int> LossParameterization::pair(int id) const {
  if (mode_ != LossMode::kClassCorrelation) {
    throw UsageError("pair(): only defined in class-correlation mode");
  }
  check_id(id);
  const int n = num_classes();
  int i = 0;
  int remaining = id;
  while (remaining >= n - 1 - i) {
    remaining -= n - 1 - i;
    ++i;
  }
  return {i, i + 1 + remaining};
}

int LossParameterization::pair_id(int i, int j) const {
  if (mode_ != LossMode::kClassCorrelation) {
    throw UsageError("pair_id(): only defined in class-correlation mode");
  }
  const int n = num_classes();
  if (i == j) throw UsageError("diagonal entries of Φ are not controllable");
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n) throw UsageError("class index out of range");
  // Ids before row i: Σ_{r<i} (n−1−r).
  return i * (n - 1) - i * (i - 1) / 2 + (j - i - 1);
}

double LossParameterization::clip(double v) const {
  switch (mode_) {
    case LossMode::kClassCorrelation:
      return std::clamp(v, -1.0, 1.0);
    case LossMode::kDistanceMixture:
      return std::clamp(v, 0.0, 1.0);
    case LossMode::kFocalWeighting:
      return std::clamp(v, kFocalMin, kFocalMax);
  }
  return v;
}

double LossParameterization::parameter(int id) const {
  check_id(id);
  if (mode_ == LossMode::kClassCorrelation) {
    const auto [i, j] = pair(id);
    return values_(i, j);
  }
  return values_(id, 0);
}

void LossParameterization::set(int id, double value) {
  check_id(id);
  const double v = clip(value);
  if (mode_ == LossMode::kClassCorrelation) {
    const auto [i, j] = pair(id);
    values_(i, j) = v;
    values_(j, i) = v;
    return;
  }
  values_(id, 0) = v;
}

void LossParameterization::shift(int id, double delta) { set(id, parameter(id) + delta); }

std::string LossParameterization::invariant_violation() const {
  if (!values_.allFinite()) return "non-finite entry";
  switch (mode_) {
    case LossMode::kClassCorrelation: {
      const int n = num_classes();
      if (values_.cols() != n) return "matrix not square";
      for (int i = 0; i < n; ++i) {
        if (values_(i, i) != 1.0) return "diagonal entry " + std::to_string(i) + " != 1";
        for (int j = 0; j < n; ++j) {
          if (values_(i, j) != values_(j, i)) return "not symmetric";
          if (i != j && (values_(i, j) < -1.0 || values_(i, j) > 1.0)) {
            return "off-diagonal entry outside [-1, 1]";
          }
        }
      }
      return {};
    }
    case LossMode::kDistanceMixture:
      if (values_.size() != kMixtureSize) return "mixture must have 10 weights";
      if (values_.minCoeff() < 0.0 || values_.maxCoeff() > 1.0) {
        return "mixture weight outside [0, 1]";
      }
      return {};
    case LossMode::kFocalWeighting:
      if (values_.size() != 2) return "focal weighting must have 2 scales";
      if (values_.minCoeff() < kFocalMin || values_.maxCoeff() > kFocalMax) {
        return "focal scale outside [0.1, 10]";
      }
      return {};
  }
  return "unknown mode";
}

nlohmann::json LossParameterization::to_json() const {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(values_.size()));
  for (Eigen::Index r = 0; r < values_.rows(); ++r) {
    for (Eigen::Index c = 0; c < values_.cols(); ++c) flat.push_back(values_(r, c));
  }
  return {{"mode", to_string(mode_)},
          {"rows", values_.rows()},
          {"cols", values_.cols()},
          {"values", flat}};
}

LossParameterization LossParameterization::from_json(const nlohmann::json& j) {
  const LossMode mode = loss_mode_from_string(j.at("mode").get<std::string>());
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("values").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw InputError("loss parameterization: value count does not match shape");
  }
  Matrix v(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) v(r, c) = flat[k++];
  }
  LossParameterization phi(mode, std::move(v));
  if (const std::string why = phi.invariant_violation(); !why.empty()) {
    throw InputError("loss parameterization: " + why);
  }
  return phi;
}

}  // namespace ala::losses
