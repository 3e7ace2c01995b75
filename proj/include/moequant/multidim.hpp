#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "moequant/density1d.hpp"
#include "moequant/model.hpp"
#include "moequant/numerics.hpp"

namespace moequant::multidim {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  std::vector<double> center() const;
  bool contains(std::span<const double> x) const;
  void validate() const;
};

// Scale-free moments of a region. moment_k(A) =
// int_A ||x - center||^k dx / (d * V^(1+k/d)); dimensionless, so congruent
// scaled copies share the value. second() is the k=2 case used by the
// error bounds.
struct RegionGeometry {
  double volume = 0.0;
  std::vector<double> center;
  double second_moment_raw = 0.0;  // int ||x-c||^2 dx, unnormalized
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
};

// Boxes get closed-form volume/center/m2; m1 and m3 come from Monte Carlo
// with `mc_samples` uniform draws (standard error ~ spread/sqrt(samples),
// fixed internal stream so repeated calls agree).
RegionGeometry region_geometry(const Box& box, std::size_t mc_samples = 100000);

// Normalized second moment of the best-packing cell shape: interval 1/12
// for d=1, regular hexagon 5/(36 sqrt 3) for d=2, cube value 1/12 as a
// conservative stand-in for d >= 3.
double optimal_inertia_constant(int d);

// Axis-aligned grid partition of [0,1]^d. Region indices are row-major
// with axis 0 fastest. Routing per axis is half-open, last cell closed.
struct GridSegmentationMD {
  std::vector<std::vector<double>> axis_breakpoints;

  int dim() const { return static_cast<int>(axis_breakpoints.size()); }
  int region_count() const;
  std::vector<int> axis_counts() const;
  Box region(int flat_index) const;
  int route(std::span<const double> x) const;
  void validate() const;
};

// counts[j] cells along axis j; per_axis densities (when given) place the
// breakpoints through the 1-d compander, otherwise uniform.
GridSegmentationMD grid_segmentation(
    const std::vector<int>& counts,
    const std::vector<density1d::DensityFn>* per_axis = nullptr);

enum class ConstantsModeMD { Exact, Center };

struct MdQuadOptions {
  // 0 picks a per-axis panel count from the dimension (64 / 16 / 6);
  // quadrature handles d <= 6, higher dimensions go through Monte Carlo.
  int panels_per_axis = 0;
  std::size_t mc_samples = 100000;
  std::uint64_t mc_seed = 0x4d43u;  // internal stream for MC fallbacks
};

// Tensor-product composite Simpson over a box.
double integrate_box(const std::function<double(std::span<const double>)>& f,
                     const Box& box, const MdQuadOptions& opts = {});

// Exact mode: per-region ratio of tensor quadratures (product
// distributions). Non-product distributions fall back to a Monte Carlo
// ratio estimate over opts.mc_samples draws (standard error of each
// constant ~ sd_i / sqrt(hits in region i)). Center mode evaluates the
// target at region centers.
std::vector<double> optimal_constants_md(
    const GridSegmentationMD& seg, const model::TargetFunction& target,
    const model::InputDistribution& dist,
    ConstantsModeMD mode = ConstantsModeMD::Exact,
    const MdQuadOptions& opts = {});

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Monte Carlo test error of a routed piecewise-constant predictor on
// fresh draws x ~ dist, y = beta(x) + noise.
McEstimate test_error_md_mc(const GridSegmentationMD& seg,
                            const std::vector<double>& constants,
                            const model::TargetFunction& target,
                            const model::InputDistribution& dist,
                            const model::NoiseModel& noise, std::size_t n,
                            numerics::RngStream& rng);

// Region-sum error bound:
// sigma2 + d * sum_i ||grad beta(x_i)||^2 p(x_i) m2(A_i) V_i^(1+2/d),
// x_i the region centers.
double error_bound_sum_md(const GridSegmentationMD& seg,
                          const model::TargetFunction& target,
                          const model::InputDistribution& dist, double sigma2);

// Inertia profile mu(x): per-point normalized second moment of the cell
// shape at x. Constant profiles cover grids of congruent cells.
struct InertiaProfile {
  std::function<double(std::span<const double>)> fn;

  static InertiaProfile constant_profile(double value);
  double eval(std::span<const double> x) const { return fn(x); }
};

// Density on [0,1]^d stored as a normalized closure: eval divides the raw
// values by the normalization integral computed at construction.
struct DensityFnMD {
  int dim = 1;
  std::function<double(std::span<const double>)> raw;
  double normalization = 1.0;
  bool floor_applied = false;
  double floor_eps = 0.0;

  double eval(std::span<const double> x) const;
};

DensityFnMD density_md_from_function(
    int dim, const std::function<double(std::span<const double>)>& raw,
    const MdQuadOptions& opts = {});

// Density-form error bound for m regions drawn from lambda:
// sigma2 + (d / m^(2/d)) int ||grad beta||^2 p mu / lambda^(2/d).
// Quadrature for d <= 6; beyond that, importance sampling with x ~ dist.
double error_bound_integral_md(const DensityFnMD& lambda,
                               const InertiaProfile& mu, int m,
                               const model::TargetFunction& target,
                               const model::InputDistribution& dist,
                               double sigma2, const MdQuadOptions& opts = {});

// Bound-minimizing segment density: lambda ~ (p ||grad beta||^2)^(d/(d+2)),
// floored at eps before the exponent as in the 1-d case.
DensityFnMD ubm_density_md(const model::TargetFunction& target,
                           const model::InputDistribution& dist, int d,
                           double eps = 1e-16,
                           const MdQuadOptions& opts = {});

// Bound value at the minimizing density:
// sigma2 + (d * m_opt / m^(2/d)) (int (p ||grad beta||^2)^(d/(d+2)))^(1+2/d).
double min_bound_md(int m, int d, double m_opt,
                    const model::TargetFunction& target,
                    const model::InputDistribution& dist, double sigma2,
                    double eps = 1e-16, const MdQuadOptions& opts = {});

}  // namespace moequant::multidim
