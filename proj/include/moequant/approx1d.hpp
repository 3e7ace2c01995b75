#pragma once

#include <string>
#include <vector>

#include "moequant/density1d.hpp"
#include "moequant/model.hpp"
#include "moequant/numerics.hpp"

namespace moequant::approx1d {

enum class ConstantsMode { Exact, Midpoint };

// Piecewise-constant predictor: one constant per segment.
struct MoEModel1D {
  density1d::Segmentation1D segmentation;
  std::vector<double> constants;
  std::string provenance;  // "optimal-exact", "optimal-midpoint", "learned"

  double predict(double x) const;
};

// Test-error breakdown. total = noise_floor + excess always; per_region
// is filled only by the per-segment evaluators.
struct ErrorReport {
  double total = 0.0;
  double noise_floor = 0.0;
  double excess = 0.0;
  std::string method;
  int m = 0;
  std::vector<double> per_region;
};

// Exact error minimizers per segment: c_i = int_i beta p / int_i beta
// mass. Midpoint mode evaluates beta at segment centers instead, which
// matches the exact constants to first order in the segment length.
std::vector<double> optimal_constants_1d(
    const density1d::Segmentation1D& seg, const model::TargetFunction& target,
    const model::InputDistribution& dist,
    ConstantsMode mode = ConstantsMode::Exact,
    const numerics::QuadratureSpec& spec = {});

// sigma2 + sum_i int_i (c_i - beta)^2 p, integrated per segment.
ErrorReport test_error_exact_1d(const MoEModel1D& moe,
                                const model::TargetFunction& target,
                                const model::InputDistribution& dist,
                                double sigma2,
                                const numerics::QuadratureSpec& spec = {});

// Small-segment expansion: sigma2 + (1/12) sum_i beta'(x_i)^2 p(x_i) len_i^3
// with x_i the segment centers.
ErrorReport test_error_sum_1d(const density1d::Segmentation1D& seg,
                              const model::TargetFunction& target,
                              const model::InputDistribution& dist,
                              double sigma2);

// Density-form error for m segments drawn from lambda:
// sigma2 + (1/(12 m^2)) int beta'^2 p / lambda^2.
ErrorReport test_error_integral_1d(const density1d::DensityFn& lambda, int m,
                                   const model::TargetFunction& target,
                                   const model::InputDistribution& dist,
                                   double sigma2,
                                   const numerics::QuadratureSpec& spec = {});

// Error at the optimal density, closed form:
// sigma2 + (1/(12 m^2)) (int (p beta'^2)^(1/3))^3, flooring as in
// optimal_density_1d so both sides of the comparison agree.
ErrorReport optimal_error_1d(int m, const model::TargetFunction& target,
                             const model::InputDistribution& dist,
                             double sigma2,
                             const density1d::DensityOptions& opts = {},
                             const numerics::QuadratureSpec& spec = {});

// Distortion of the m-level optimal scalar quantizer of p:
// (1/(12 m^2)) (int p^(1/3))^3. No noise term, no regression target.
double quantizer_error_optimal(int m, const model::InputDistribution& dist,
                               const numerics::QuadratureSpec& spec = {});

}  // namespace moequant::approx1d
