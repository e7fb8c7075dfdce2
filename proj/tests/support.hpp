#pragma once

// Shared helpers for the unit tests and the acceptance binary: seeded
// generators and a central-difference gradient check over graph builders.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ala/core/graph.hpp"
#include "ala/core/rng.hpp"

namespace ala::testing {

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, lo, hi);
  return m;
}

/// Same as random_matrix but every entry at least `gap` away from zero in
/// magnitude, for ops with a kink at 0.
inline Matrix random_away_from_zero(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                    double gap = 0.05) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double mag = uniform(rng, gap, 1.0);
    m.data()[i] = uniform01(rng) < 0.5 ? -mag : mag;
  }
  return m;
}

inline int random_int(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

using GraphBuilder = std::function<core::Var(core::Graph&, const std::vector<core::Var>&)>;

/// Relative error ‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖) over all
/// input entries, numeric gradients from central differences with step h.
/// Returns 0 when both gradients vanish.
inline double gradient_check(const GraphBuilder& build, const std::vector<Matrix>& inputs,
                             double h = 1e-5) {
  core::Graph g;
  std::vector<core::Var> vars;
  for (const auto& m : inputs) vars.push_back(g.variable(m));
  g.backward(build(g, vars));

  auto evaluate = [&](const std::vector<Matrix>& xs) {
    core::Graph eg;
    std::vector<core::Var> vs;
    for (const auto& m : xs) vs.push_back(eg.variable(m));
    return eg.scalar(build(eg, vs));
  };

  double diff2 = 0.0;
  double an2 = 0.0;
  double nu2 = 0.0;
  std::vector<Matrix> xs = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Matrix analytic = g.grad(vars[k]);
    for (Eigen::Index i = 0; i < xs[k].size(); ++i) {
      const double orig = xs[k].data()[i];
      xs[k].data()[i] = orig + h;
      const double up = evaluate(xs);
      xs[k].data()[i] = orig - h;
      const double down = evaluate(xs);
      xs[k].data()[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.data()[i];
      diff2 += (a - numeric) * (a - numeric);
      an2 += a * a;
      nu2 += numeric * numeric;
    }
  }
  const double scale = std::max(std::sqrt(an2), std::sqrt(nu2));
  return scale == 0.0 ? 0.0 : std::sqrt(diff2) / scale;
}

/// Σ out ⊙ weights, to turn a matrix-valued op into a scalar with a
/// non-trivial upstream gradient.
inline core::Var weighted_sum(core::Graph& g, core::Var out, const Matrix& weights) {
  return g.sum(g.mul(out, g.constant(weights)));
}

}  // namespace ala::testing
