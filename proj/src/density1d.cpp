#include "moequant/density1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace moequant::density1d {

namespace {

// Shared grid construction: sample raw values, normalize the piecewise
// linear interpolant to unit integral, and store its running trapezoid
// sums as the cumulative table. Using one interpolant for eval() and the
// table keeps the compander consistent with the density to rounding.
DensityFn build_density(const std::function<double(double)>& raw,
                        int grid_size, bool floor_applied, double floor_eps) {
  if (grid_size < 2) {
    fail(ErrorKind::InvalidParams, "density grid needs >= 2 nodes");
  }
  DensityFn density;
  density.floor_applied = floor_applied;
  density.floor_eps = floor_eps;
  density.xs.resize(grid_size);
  density.values.resize(grid_size);
  const int cells = grid_size - 1;
  for (int k = 0; k < grid_size; ++k) {
    const double x = static_cast<double>(k) / cells;
    const double v = raw(x);
    if (!std::isfinite(v)) {
      fail(ErrorKind::NonFinite, "density value at x=" + std::to_string(x));
    }
    if (v < 0.0) {
      fail(ErrorKind::NegativeDensity,
           "density value " + std::to_string(v) + " at x=" + std::to_string(x));
    }
    density.xs[k] = x;
    density.values[k] = v;
  }
  density.xs.back() = 1.0;

  std::vector<double> sums(grid_size);
  sums[0] = 0.0;
  for (int k = 0; k < cells; ++k) {
    sums[k + 1] = sums[k] + 0.5 * (density.values[k] + density.values[k + 1]) *
                                (density.xs[k + 1] - density.xs[k]);
  }
  const double total = sums.back();
  if (!(total > 0.0)) {
    fail(ErrorKind::DegenerateDensity, "density integrates to zero");
  }
  for (double& v : density.values) v /= total;
  for (double& s : sums) s /= total;
  sums.back() = 1.0;

  density.cumulative.xs = density.xs;
  density.cumulative.ys = std::move(sums);
  return density;
}

}  // namespace

double DensityFn::eval(double x) const {
  const double xc = std::clamp(x, 0.0, 1.0);
  const int cells = static_cast<int>(xs.size()) - 1;
  const double pos = xc * cells;
  int k = static_cast<int>(pos);
  if (k >= cells) k = cells - 1;
  const double t = pos - k;
  return values[k] + t * (values[k + 1] - values[k]);
}

void Segmentation1D::validate() const {
  if (breakpoints.size() < 2) {
    fail(ErrorKind::InvalidM, "segmentation needs >= 1 interval");
  }
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0) {
    fail(ErrorKind::NonMonotone, "segmentation must span [0,1] exactly");
  }
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) {
      fail(ErrorKind::NonMonotone,
           "breakpoints not strictly increasing at index " + std::to_string(i));
    }
  }
}

DensityFn optimal_density_1d(const model::TargetFunction& target,
                             const model::InputDistribution& dist,
                             const DensityOptions& opts) {
  if (target.dim != 1 || dist.dim != 1) {
    fail(ErrorKind::DimensionMismatch, "optimal_density_1d is one-dimensional");
  }
  if (!(opts.eps > 0.0)) {
    fail(ErrorKind::InvalidParams, "density floor eps must be positive");
  }
  bool floored = false;
  auto raw = [&target, &dist, &opts, &floored](double x) {
    const double deriv = target.deriv1(x);
    double product = dist.pdf1(x) * deriv * deriv;
    if (product < opts.eps) {
      product = opts.eps;
      floored = true;
    }
    return std::cbrt(product);
  };
  DensityFn density = build_density(raw, opts.grid_size, false, opts.eps);
  density.floor_applied = floored;  // set during grid sampling
  return density;
}

DensityFn quantizer_density(const model::InputDistribution& dist,
                            const DensityOptions& opts) {
  if (dist.dim != 1) {
    fail(ErrorKind::DimensionMismatch, "quantizer_density is one-dimensional");
  }
  auto raw = [&dist](double x) {
    const double p = dist.pdf1(x);
    if (p < 0.0) {
      fail(ErrorKind::NegativeDensity, "pdf negative at x=" + std::to_string(x));
    }
    return std::cbrt(p);
  };
  return build_density(raw, opts.grid_size, false, 0.0);
}

DensityFn density_from_function(const std::function<double(double)>& raw,
                                const DensityOptions& opts) {
  return build_density(raw, opts.grid_size, false, 0.0);
}

Segmentation1D segmentation_from_density(const DensityFn& density, int m) {
  if (m < 1) {
    fail(ErrorKind::InvalidM, "segment count must be >= 1, got " +
                                  std::to_string(m));
  }
  Segmentation1D seg;
  seg.breakpoints.resize(m + 1);
  seg.breakpoints[0] = 0.0;
  seg.breakpoints[m] = 1.0;
  const double total = density.cumulative.total();
  for (int i = 1; i < m; ++i) {
    seg.breakpoints[i] =
        numerics::invert_monotone(density.cumulative, total * i / m);
  }
  for (int i = 0; i < m; ++i) {
    if (!(seg.breakpoints[i] < seg.breakpoints[i + 1])) {
      fail(ErrorKind::NonMonotone,
           "expander produced non-increasing breakpoints at i=" +
               std::to_string(i) + "; increase the density grid size");
    }
  }
  return seg;
}

Segmentation1D uniform_segmentation(int m) {
  if (m < 1) {
    fail(ErrorKind::InvalidM,
         "segment count must be >= 1, got " + std::to_string(m));
  }
  Segmentation1D seg;
  seg.breakpoints.resize(m + 1);
  for (int i = 0; i <= m; ++i) {
    seg.breakpoints[i] = static_cast<double>(i) / m;
  }
  seg.breakpoints[0] = 0.0;
  seg.breakpoints[m] = 1.0;
  return seg;
}

}  // namespace moequant::density1d
