#pragma once

#include <cstdint>
#include <vector>

#include "moequant/approx1d.hpp"
#include "moequant/density1d.hpp"
#include "moequant/model.hpp"
#include "moequant/multidim.hpp"

namespace moequant::learning {

// Index of the segment x falls in (half-open, last closed).
int route(const density1d::Segmentation1D& seg, double x);

struct RoutedCounts {
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  std::vector<int> empty_regions;
};

RoutedCounts count_routed(const density1d::Segmentation1D& seg,
                          const model::Dataset& data);

// Per-segment least squares: each constant is the mean of the outputs
// routed to it. Segments that received no data fall back to the global
// output mean.
struct LearnedMoE {
  approx1d::MoEModel1D moe;
  RoutedCounts counts;
  double fallback_value = 0.0;
};

LearnedMoE fit_constants(const density1d::Segmentation1D& seg,
                         const model::Dataset& data);

// Multi-d variant; constants indexed like the grid's flat regions.
std::vector<double> fit_constants_md(const multidim::GridSegmentationMD& seg,
                                     const model::Dataset& data,
                                     RoutedCounts* counts_out = nullptr);

// rho_i = P(x in A_i) under dist.
std::vector<double> region_mass(const density1d::Segmentation1D& seg,
                                const model::InputDistribution& dist,
                                const numerics::QuadratureSpec& spec = {});

// Split of a fitted model's error into the part its segmentation cannot
// avoid and the part caused by estimating the constants from data:
// test = approximation + estimation, estimation = sum_i (c~_i - c*_i)^2 rho_i.
// The identity is exact because c*_i minimizes each segment integral.
struct DecompositionReport {
  double test_error = 0.0;
  double approximation_error = 0.0;
  double estimation_error = 0.0;
  std::vector<double> region_masses;
};

DecompositionReport decompose(const LearnedMoE& learned,
                              const model::TargetFunction& target,
                              const model::InputDistribution& dist,
                              double sigma2,
                              const numerics::QuadratureSpec& spec = {});

// Smallest n with P(n_i < n rho_i / 2) <= delta for a region of mass rho:
// ceil((8 / rho) ln(1 / delta)).
std::size_t chernoff_min_n(double rho, double delta);

// Deviation radius gamma (r_beta + r_eps) / sqrt(n rho): holds for the
// fitted constant of a mass-rho region with probability at least
// 1 - 2 exp(-gamma^2) - delta once n >= chernoff_min_n(rho, delta).
double hoeffding_radius(std::size_t n, double rho, double gamma,
                        double r_beta, double r_eps);

// (m / n) gamma^2 max_range^2: estimation-error bound that holds with
// probability at least 1 - 2 m exp(-gamma^2) - m delta.
double estimation_bound(int m, std::size_t n, double gamma, double max_range);

// max - min of the target over [lo, hi], dense sampling.
double target_range_1d(const model::TargetFunction& target, double lo,
                       double hi, int points = 1001);

struct BoundCheckConfig {
  density1d::Segmentation1D segmentation;
  model::TargetFunction target;
  model::InputDistribution dist;
  model::NoiseModel noise;
  std::size_t n = 0;
  double gamma = 3.0;
  double delta = 1e-3;
  std::size_t repeats = 1000;
  double sigma2 = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t base_stream = 0;
};

struct RegionBoundStats {
  double rho = 0.0;
  double opt_constant = 0.0;
  double radius = 0.0;
  std::size_t chernoff_n = 0;  // radius needs n >= this to apply
  double mean_constant = 0.0;
  double mean_std_error = 0.0;
  std::size_t radius_violations = 0;
};

struct BoundCheckReport {
  int m = 0;
  std::size_t n = 0;
  std::size_t repeats = 0;
  double gamma = 0.0;
  double delta = 0.0;
  std::vector<RegionBoundStats> per_region;
  double radius_failure_allowance = 0.0;  // 2 exp(-gamma^2) + delta
  double estimation_bound_value = 0.0;
  std::size_t estimation_violations = 0;
  double estimation_failure_allowance = 0.0;  // m * radius allowance, capped at 1
};

// Repeated-fit check of the deviation radius and the estimation bound.
// Bounded noise only; each repeat draws its own stream
// (seed, base_stream + r) so the loop parallelizes deterministically.
BoundCheckReport empirical_bound_check(const BoundCheckConfig& cfg);

}  // namespace moequant::learning
