#include "ala/harness/surface.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ala::harness {

namespace {

bool is_bias(const core::Tensor& t) {
  const std::string suffix = ".bias";
  return t.name.size() >= suffix.size() &&
         t.name.compare(t.name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void check_resolution(const SurfaceConfig& config) {
  if (config.resolution < 3) throw UsageError("surface: grid resolution must be at least 3");
  if (!(config.span > 0.0) || !std::isfinite(config.span)) {
    throw UsageError("surface: span must be positive");
  }
}

SurfaceGrid finish_grid(SurfaceGrid grid) {
  const double hx = grid.xs[1] - grid.xs[0];
  const double hy = grid.ys[1] - grid.ys[0];
  grid.curvature = gaussian_curvature(grid.values, hx, hy);
  grid.mean_curvature = grid.curvature.mean();
  return grid;
}

}  // namespace

std::vector<double> grid_axis(int resolution, double span) {
  std::vector<double> axis(static_cast<std::size_t>(resolution));
  const double half = static_cast<double>(resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    axis[static_cast<std::size_t>(i)] = span * (2.0 * i - half) / half;
  }
  return axis;
}

std::vector<Matrix> filter_normalized_direction(const core::Network& net, Rng& rng) {
  std::vector<Matrix> dir;
  for (const auto& t : net.parameters()) {
    Matrix d = Matrix::Zero(t.value.rows(), t.value.cols());
    if (!is_bias(t)) {
      for (Eigen::Index c = 0; c < d.cols(); ++c) {
        for (Eigen::Index r = 0; r < d.rows(); ++r) d(r, c) = normal(rng);
        const double dn = d.col(c).norm();
        const double wn = t.value.col(c).norm();
        if (dn > 0.0) d.col(c) *= wn / dn;
      }
    }
    dir.push_back(std::move(d));
  }
  return dir;
}

Matrix gaussian_curvature(const Matrix& values, double hx, double hy) {
  if (values.rows() < 3 || values.cols() < 3) {
    throw UsageError("gaussian_curvature: need at least a 3x3 grid");
  }
  if (!(hx > 0.0) || !(hy > 0.0)) throw UsageError("gaussian_curvature: spacing must be positive");
  // Second differences smaller than the rounding noise of the grid values
  // are treated as 0, so affine surfaces come out exactly flat.
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * values.cwiseAbs().maxCoeff();
  auto denoise = [floor](double d) { return std::abs(d) <= floor ? 0.0 : d; };
  Matrix k(values.rows() - 2, values.cols() - 2);
  for (Eigen::Index i = 1; i + 1 < values.rows(); ++i) {
    for (Eigen::Index j = 1; j + 1 < values.cols(); ++j) {
      const double c = values(i, j);
      const double lx = (values(i + 1, j) - values(i - 1, j)) / (2.0 * hx);
      const double ly = (values(i, j + 1) - values(i, j - 1)) / (2.0 * hy);
      const double lxx = denoise(values(i + 1, j) - 2.0 * c + values(i - 1, j)) / (hx * hx);
      const double lyy = denoise(values(i, j + 1) - 2.0 * c + values(i, j - 1)) / (hy * hy);
      const double lxy = denoise(values(i + 1, j + 1) - values(i + 1, j - 1) -
                                 values(i - 1, j + 1) + values(i - 1, j - 1)) /
                         (4.0 * hx * hy);
      const double denom = 1.0 + lx * lx + ly * ly;
      k(i - 1, j - 1) = (lxx * lyy - lxy * lxy) / (denom * denom);
    }
  }
  return k;
}

SurfaceGrid surface_curvature(const std::function<double(double, double)>& f,
                              const SurfaceConfig& config) {
  check_resolution(config);
  SurfaceGrid grid;
  grid.xs = grid_axis(config.resolution, config.span);
  grid.ys = grid.xs;
  grid.values = kernels::evaluate_grid(f, grid.xs, grid.ys, {config.threads});
  return finish_grid(std::move(grid));
}

SurfaceGrid loss_surface_curvature(const core::Network& net,
                                   const std::function<double(const core::Network&)>& loss,
                                   const SurfaceConfig& config, std::uint64_t seed) {
  check_resolution(config);
  if (!net.all_finite()) throw InputError("loss_surface_curvature: non-finite parameters");
  SurfaceGrid grid;
  Rng rng(seed);
  grid.direction_x = filter_normalized_direction(net, rng);
  grid.direction_y = filter_normalized_direction(net, rng);
  grid.xs = grid_axis(config.resolution, config.span);
  grid.ys = grid.xs;

  const auto at = [&](double a, double b) {
    core::Network moved = net;
    auto& params = moved.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
      params[p].value += a * grid.direction_x[p] + b * grid.direction_y[p];
    }
    return loss(moved);
  };
  grid.values = kernels::evaluate_grid(at, grid.xs, grid.ys, {config.threads});
  return finish_grid(std::move(grid));
}

}  // namespace ala::harness
