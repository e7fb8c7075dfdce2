#include "ala/controller/action.hpp"

namespace ala::controller {

void apply_action(losses::LossParameterization& phi, int parameter_id, double delta) {
  if (delta == 0.0) {
    (void)phi.parameter(parameter_id);  // still validates the id
    return;
  }
  phi.shift(parameter_id, delta);
}

void apply_action(losses::LossParameterization& phi, int i, int j, double delta) {
  if (phi.mode() != losses::LossMode::kClassCorrelation) {
    throw UsageError("pair-addressed actions need class-correlation mode");
  }
  apply_action(phi, phi.pair_id(i, j), delta);
}

}  // namespace ala::controller
