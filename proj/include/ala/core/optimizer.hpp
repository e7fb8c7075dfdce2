#pragma once

#include <string>
#include <vector>

#include "ala/core/network.hpp"
#include "ala/core/types.hpp"

namespace ala::core {

enum class UpdateRule { kMomentumSgd, kRmsProp };

struct OptimizerConfig {
  UpdateRule rule = UpdateRule::kMomentumSgd;
  double learning_rate = 0.1;
  double momentum = 0.9;   // momentum-SGD
  double decay = 0.9;      // RMSProp squared-gradient EMA
  double epsilon = 1e-8;   // RMSProp
};

/// First-order optimizer with one buffer per parameter tensor.
///
/// Momentum-SGD:  v ← m·v + g;            w ← w − lr·v
/// RMSProp:       s ← ρ·s + (1−ρ)·g²;     w ← w − lr·g / (√s + ε)
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerConfig config, const std::vector<Tensor>& params);

  /// Throws ShapeError if the parameter/gradient lists or any tensor shapes
  /// disagree with the buffers.
  void step(std::vector<Tensor>& params, const std::vector<Matrix>& grads);

  const OptimizerConfig& config() const { return config_; }
  const std::vector<Matrix>& buffers() const { return buffers_; }
  std::vector<Matrix>& buffers() { return buffers_; }

 private:
  OptimizerConfig config_;
  std::vector<Matrix> buffers_;
};

std::string to_string(UpdateRule r);
UpdateRule update_rule_from_string(const std::string& s);

}  // namespace ala::core
