#pragma once

#include "ala/losses/loss_param.hpp"

namespace ala::controller {

/// Φ(id) ← clip(Φ(id) + delta). Class pairs stay symmetric, the diagonal is
/// never touched.
void apply_action(losses::LossParameterization& phi, int parameter_id, double delta);
/// Class-correlation form addressed by (i, j); UsageError when i == j.
void apply_action(losses::LossParameterization& phi, int i, int j, double delta);

}  // namespace ala::controller
