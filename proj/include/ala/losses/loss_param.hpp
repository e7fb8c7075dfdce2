#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "ala/core/types.hpp"

namespace ala::losses {

enum class LossMode {
  kClassCorrelation,  // Φ ∈ [−1,1]^{|Y|×|Y|}, symmetric, unit diagonal
  kDistanceMixture,   // Φ ∈ [0,1]^10
  kFocalWeighting,    // Φ ∈ [0.1,10]^2
};

std::string to_string(LossMode m);
LossMode loss_mode_from_string(const std::string& s);

inline constexpr int kMixtureSize = 10;
inline constexpr double kFocalMin = 0.1;
inline constexpr double kFocalMax = 10.0;

/// The adjustable loss parameters and the rules that keep them valid.
///
/// Controllable parameters are addressed by a flat id:
///   class-correlation: the off-diagonal pairs (i, j), i < j, enumerated
///     row-major over the upper triangle; |Y|(|Y|−1)/2 ids.
///   distance-mixture:  weight index 0..9.
///   focal-weighting:   scale index 0..1.
class LossParameterization {
 public:
  /// Φ₀ for each mode: identity, {d², 0.5/d} selection, (1, 1).
  static LossParameterization identity(int num_classes);
  static LossParameterization default_mixture();
  static LossParameterization default_focal();
  static LossParameterization initial(LossMode mode, int num_classes);

  LossMode mode() const { return mode_; }
  /// Class-correlation: |Y|×|Y| matrix. Other modes: column vector.
  const Matrix& values() const { return values_; }
  int num_classes() const { return static_cast<int>(values_.rows()); }

  int num_parameters() const;
  double parameter(int id) const;
  /// Adds `delta` to parameter `id` and clips it to the mode's bounds; in
  /// class-correlation mode both (i,j) and (j,i) receive the same value.
  void shift(int id, double delta);
  /// Overwrites parameter `id` (clipped as in shift()).
  void set(int id, double value);

  /// (i, j) with i < j for a class-correlation id.
  std::pair<int, int> pair(int id) const;
  int pair_id(int i, int j) const;

  /// Empty string if all invariants hold; otherwise a description.
  std::string invariant_violation() const;
  bool valid() const { return invariant_violation().empty(); }

  nlohmann::json to_json() const;
  static LossParameterization from_json(const nlohmann::json& j);

  bool operator==(const LossParameterization& other) const {
    return mode_ == other.mode_ && values_ == other.values_;
  }

 private:
  LossParameterization(LossMode mode, Matrix values)
      : mode_(mode), values_(std::move(values)) {}
  void check_id(int id) const;
  double clip(double v) const;

  LossMode mode_ = LossMode::kClassCorrelation;
  Matrix values_;
};

}  // namespace ala::losses
