#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ala/core/network.hpp"
#include "ala/core/rng.hpp"
#include "ala/kernels/kernels.hpp"

namespace ala::harness {

struct SurfaceConfig {
  int resolution = 21;  // points per axis, odd keeps (0,0) on the grid
  double span = 1.0;    // grid covers [−span, span]²
  int threads = 1;
};

/// Loss values over a 2D slice of parameter space and their Gaussian
/// curvature. values(i,j) is the loss at (xs[i], ys[j]); curvature holds the
/// interior points only, (resolution−2)².
struct SurfaceGrid {
  std::vector<Matrix> direction_x;  // per parameter tensor; empty for injected surfaces
  std::vector<Matrix> direction_y;
  std::vector<double> xs;
  std::vector<double> ys;
  Matrix values;
  Matrix curvature;
  double mean_curvature = 0.0;
};

/// Evenly spaced axis with an exact 0 at the centre for odd n.
std::vector<double> grid_axis(int resolution, double span);

/// Random direction with the shape of net's parameters. Each weight column
/// (the incoming weights of one unit) is rescaled to the norm of the matching
/// column of the network; bias directions are zero.
std::vector<Matrix> filter_normalized_direction(const core::Network& net, Rng& rng);

/// K = (LxxLyy − Lxy²) / (1 + Lx² + Ly²)² at every interior point, from
/// central differences with spacings hx (rows) and hy (columns). Second
/// differences below 16ε·max|values| count as rounding noise and become 0.
Matrix gaussian_curvature(const Matrix& values, double hx, double hy);

/// Injected surface: evaluates f on the grid directly.
SurfaceGrid surface_curvature(const std::function<double(double, double)>& f,
                              const SurfaceConfig& config = {});

/// Loss of `net` moved along two seeded filter-normalized directions.
/// `loss` must not keep state between calls; with threads > 1 it runs
/// concurrently.
SurfaceGrid loss_surface_curvature(const core::Network& net,
                                   const std::function<double(const core::Network&)>& loss,
                                   const SurfaceConfig& config, std::uint64_t seed);

}  // namespace ala::harness
