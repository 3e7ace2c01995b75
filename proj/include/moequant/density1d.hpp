#pragma once

#include <functional>
#include <vector>

#include "moequant/model.hpp"
#include "moequant/numerics.hpp"

namespace moequant::density1d {

struct DensityOptions {
  double eps = 1e-16;    // floor for p * beta'^2 before the cube root
  int grid_size = 10001;  // dense sampling grid on [0,1]
};

// Segment density on [0,1]: values on a uniform grid, normalized so the
// piecewise-linear interpolant integrates to exactly 1. `cumulative`
// holds the running trapezoid sums of the same interpolant, which keeps
// eval() and the compander in segmentation_from_density() consistent.
struct DensityFn {
  std::vector<double> xs;
  std::vector<double> values;
  numerics::MonotoneTable cumulative;
  bool floor_applied = false;
  double floor_eps = 0.0;

  double eval(double x) const;
};

// Partition of [0,1] into m intervals. Routing convention is half-open:
// a breakpoint belongs to the interval on its right, except the last
// interval which is closed at 1.
struct Segmentation1D {
  std::vector<double> breakpoints;  // size m+1, breakpoints[0]=0, back()=1

  int expert_count() const { return static_cast<int>(breakpoints.size()) - 1; }
  double lower(int i) const { return breakpoints[i]; }
  double upper(int i) const { return breakpoints[i + 1]; }
  double center(int i) const { return 0.5 * (lower(i) + upper(i)); }
  double length(int i) const { return upper(i) - lower(i); }

  void validate() const;
};

// Error-minimizing segment density: proportional to (p * beta'^2)^(1/3),
// with products below opts.eps raised to opts.eps before the cube root so
// flat stretches of beta keep the cumulative strictly increasing.
DensityFn optimal_density_1d(const model::TargetFunction& target,
                             const model::InputDistribution& dist,
                             const DensityOptions& opts = {});

// Density of the distortion-minimizing scalar quantizer for p: g ~ p^(1/3).
DensityFn quantizer_density(const model::InputDistribution& dist,
                            const DensityOptions& opts = {});

// Normalizes an arbitrary nonnegative function into a DensityFn on the
// same grid representation. Used for hand-built densities.
DensityFn density_from_function(const std::function<double(double)>& raw,
                                const DensityOptions& opts = {});

// Compander: a_i solves int_0^{a_i} lambda = i/m. Endpoints snap to 0, 1.
Segmentation1D segmentation_from_density(const DensityFn& density, int m);

Segmentation1D uniform_segmentation(int m);

}  // namespace moequant::density1d
