#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "doctest.h"
#include "moequant/multidim.hpp"
#include "support.hpp"

using moequant::ErrorKind;
using namespace moequant::multidim;
using moequant::model::InputDistribution;
using moequant::model::make_input_dist;
using moequant::model::make_target;
using moequant::model::NoiseModel;
using testsupport::rel_err;
using testsupport::throws_kind;

namespace {

Box unit_square() {
  Box box;
  box.lo = {0.0, 0.0};
  box.hi = {1.0, 1.0};
  return box;
}

// uniform on the square but deliberately without per-axis marginals, to
// force the Monte Carlo constants path
InputDistribution opaque_uniform_2d() {
  InputDistribution dist;
  dist.dim = 2;
  dist.name = "opaque-uniform";
  dist.pdf_fn = [](std::span<const double>) { return 1.0; };
  dist.sample_fn = [](moequant::numerics::RngStream& rng,
                      std::span<double> out) {
    for (double& v : out) v = rng.next_double();
  };
  return dist;
}

}  // namespace

// ===================== boxes and moments =====================

TEST_CASE("box accessors") {
  Box box;
  box.lo = {0.0, 0.5};
  box.hi = {0.5, 1.0};
  CHECK(box.dim() == 2);
  CHECK(std::fabs(box.volume() - 0.25) < 1e-15);
  CHECK(box.center()[1] == 0.75);
  const std::array<double, 2> in{0.25, 0.75};
  const std::array<double, 2> out{0.75, 0.75};
  CHECK(box.contains(in));
  CHECK(!box.contains(out));

  Box bad;
  bad.lo = {0.0, 0.5};
  bad.hi = {0.5, 0.5};
  CHECK(throws_kind([&] { bad.validate(); }, ErrorKind::DegenerateRegion));
}

TEST_CASE("normalized second moment of boxes in closed form") {
  const RegionGeometry sq = region_geometry(unit_square(), 1000);
  CHECK(std::fabs(sq.m2 - 1.0 / 12.0) < 1e-15);
  CHECK(std::fabs(sq.second_moment_raw - 2.0 / 12.0) < 1e-15);

  Box rect;
  rect.lo = {0.0, 0.0};
  rect.hi = {1.0, 2.0};
  const RegionGeometry rg = region_geometry(rect, 1000);
  CHECK(std::fabs(rg.m2 - 5.0 / 48.0) < 1e-15);

  // scale invariance: a shrunken square has the same normalized moment
  Box small;
  small.lo = {0.25, 0.25};
  small.hi = {0.5, 0.5};
  CHECK(std::fabs(region_geometry(small, 1000).m2 - 1.0 / 12.0) < 1e-15);
}

TEST_CASE("first moment of the unit square matches the known mean distance") {
  // mean distance from the center is (sqrt(2) + asinh(1)) / 6
  const double mean_dist = (std::sqrt(2.0) + std::asinh(1.0)) / 6.0;
  const RegionGeometry sq = region_geometry(unit_square(), 200000);
  CHECK(std::fabs(sq.m1 - mean_dist / 2.0) < 2e-3);
  CHECK(sq.m3 > 0.0);
}

TEST_CASE("hexagon inertia constant agrees with a direct Monte Carlo oracle") {
  const double claimed = optimal_inertia_constant(2);
  CHECK(std::fabs(claimed - 0.08018753738744802) < 1e-15);  // 5/(36 sqrt 3)
  const testsupport::McValue oracle = testsupport::hexagon_moment_mc(4000000, 77);
  CHECK(std::fabs(oracle.value - claimed) < 4.0 * oracle.std_error);
  CHECK(oracle.std_error < 2e-4);

  CHECK(optimal_inertia_constant(1) == 1.0 / 12.0);
  CHECK(optimal_inertia_constant(3) == 1.0 / 12.0);  // cube stand-in
  CHECK(throws_kind([] { optimal_inertia_constant(0); },
                    ErrorKind::InvalidParams));
}

// ===================== grids =====================

TEST_CASE("grid regions index with axis zero fastest") {
  const GridSegmentationMD grid = grid_segmentation({4, 4});
  CHECK(grid.region_count() == 16);
  CHECK(grid.axis_counts() == std::vector<int>{4, 4});

  const std::array<double, 2> x{0.3, 0.7};
  CHECK(grid.route(x) == 9);  // cell (1, 2): 1 + 2*4
  const Box box = grid.region(9);
  CHECK(std::fabs(box.lo[0] - 0.25) < 1e-15);
  CHECK(std::fabs(box.hi[0] - 0.5) < 1e-15);
  CHECK(std::fabs(box.lo[1] - 0.5) < 1e-15);

  const std::array<double, 2> corner{1.0, 1.0};
  CHECK(grid.route(corner) == 15);  // outer boundary owned by last cells
  const std::array<double, 2> edge{0.25, 0.0};
  CHECK(grid.route(edge) == 1);  // interior breakpoint belongs right

  const std::array<double, 2> outside{1.1, 0.5};
  CHECK(throws_kind([&] { grid.route(outside); }, ErrorKind::OutOfDomain));
  const std::array<double, 3> wrong{0.1, 0.2, 0.3};
  CHECK(throws_kind([&] { grid.route(wrong); }, ErrorKind::DimensionMismatch));
  CHECK(throws_kind([&] { grid.region(16); }, ErrorKind::OutOfRange));
}

TEST_CASE("grid construction guards") {
  CHECK(throws_kind([] { grid_segmentation({}); }, ErrorKind::InvalidCounts));
  CHECK(throws_kind([] { grid_segmentation({2, 0}); },
                    ErrorKind::InvalidCounts));
  const std::vector<moequant::density1d::DensityFn> one = {
      moequant::density1d::density_from_function([](double) { return 1.0; })};
  CHECK(throws_kind([&] { grid_segmentation({2, 2}, &one); },
                    ErrorKind::InvalidCounts));

  GridSegmentationMD off;
  off.axis_breakpoints = {{0.0, 0.5, 1.0}, {0.1, 1.0}};
  CHECK(throws_kind([&] { off.validate(); }, ErrorKind::NonMonotone));
}

TEST_CASE("per-axis densities drive the grid breakpoints") {
  // ramp density on axis 0: cumulative x^2, so the 2-cell split lands at
  // sqrt(1/2)
  const auto ramp =
      moequant::density1d::density_from_function([](double x) { return 2.0 * x; });
  const auto flat =
      moequant::density1d::density_from_function([](double) { return 1.0; });
  const std::vector<moequant::density1d::DensityFn> densities = {ramp, flat};
  const GridSegmentationMD grid = grid_segmentation({2, 2}, &densities);
  CHECK(std::fabs(grid.axis_breakpoints[0][1] - std::sqrt(0.5)) < 1e-6);
  CHECK(std::fabs(grid.axis_breakpoints[1][1] - 0.5) < 1e-12);
}

// ===================== integration and constants =====================

TEST_CASE("tensor quadrature is exact for low-degree polynomials") {
  const double bilinear = integrate_box(
      [](std::span<const double> x) { return x[0] * x[1]; }, unit_square());
  CHECK(std::fabs(bilinear - 0.25) < 1e-13);

  const double quad = integrate_box(
      [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; },
      unit_square());
  CHECK(std::fabs(quad - 2.0 / 3.0) < 1e-13);

  Box cube3;
  cube3.lo = {0.0, 0.0, 0.0};
  cube3.hi = {1.0, 1.0, 1.0};
  const double tri = integrate_box(
      [](std::span<const double> x) { return x[0] * x[1] * x[2]; }, cube3);
  CHECK(std::fabs(tri - 0.125) < 1e-13);

  Box cube7;
  cube7.lo.assign(7, 0.0);
  cube7.hi.assign(7, 1.0);
  CHECK(throws_kind(
      [&] {
        integrate_box([](std::span<const double>) { return 1.0; }, cube7);
      },
      ErrorKind::InvalidParams));
}

TEST_CASE("region constants: quadrature route vs Monte Carlo route") {
  const GridSegmentationMD grid = grid_segmentation({2, 2});
  const auto target = make_target("quadratic", 2);

  const std::vector<double> exact =
      optimal_constants_md(grid, target, make_input_dist("uniform", 2));
  REQUIRE(exact.size() == 4);
  CHECK(rel_err(exact[0], 0.25 / 3.0) < 1e-10);   // mean of x1^2 on [0, 1/2]
  CHECK(rel_err(exact[1], 0.875 / 1.5) < 1e-10);  // mean on [1/2, 1]
  CHECK(exact[0] == exact[2]);  // independent of the x2 cell

  const std::vector<double> centered = optimal_constants_md(
      grid, target, make_input_dist("uniform", 2), ConstantsModeMD::Center);
  CHECK(centered[0] == 0.0625);
  CHECK(centered[1] == 0.5625);

  MdQuadOptions opts;
  opts.mc_samples = 400000;
  const std::vector<double> mc =
      optimal_constants_md(grid, target, opaque_uniform_2d(),
                           ConstantsModeMD::Exact, opts);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::fabs(mc[i] - exact[i]) < 3e-3);  // ~4 sigma at 1e5 hits/region
  }
}

TEST_CASE("monte carlo test error agrees with the closed-form excess") {
  const GridSegmentationMD grid = grid_segmentation({2, 2});
  const auto target = make_target("sum-coords", 2);
  const auto dist = make_input_dist("uniform", 2);
  const std::vector<double> constants = optimal_constants_md(grid, target, dist);

  moequant::numerics::RngStream rng(31, 0);
  const McEstimate est = test_error_md_mc(grid, constants, target, dist,
                                          NoiseModel::none(), 200000, rng);
  const double want = 1.0 / 24.0;  // two axes, each len^2/12 = 1/48
  CHECK(std::fabs(est.mean - want) < 4.0 * est.std_error);
  CHECK(est.std_error < 2e-4);
}

// ===================== bounds =====================

TEST_CASE("region-sum bound for the planar ramp target") {
  const auto target = make_target("sum-coords", 2);
  const auto dist = make_input_dist("uniform", 2);
  for (int k : {2, 4, 8}) {
    const GridSegmentationMD grid = grid_segmentation({k, k});
    const double bound = error_bound_sum_md(grid, target, dist, 0.0);
    CHECK(rel_err(bound, (1.0 / 3.0) / (k * k)) < 1e-12);
  }
  const GridSegmentationMD g4 = grid_segmentation({4, 4});
  const double with_noise = error_bound_sum_md(g4, target, dist, 0.01);
  CHECK(rel_err(with_noise, 0.01 + 1.0 / 48.0) < 1e-12);
}

TEST_CASE("density-form bound matches the region sum on a uniform grid") {
  const auto target = make_target("sum-coords", 2);
  const auto dist = make_input_dist("uniform", 2);
  const DensityFnMD flat = density_md_from_function(
      2, [](std::span<const double>) { return 1.0; });
  const InertiaProfile mu = InertiaProfile::constant_profile(1.0 / 12.0);
  const double integral_form =
      error_bound_integral_md(flat, mu, 16, target, dist, 0.0);
  const GridSegmentationMD g4 = grid_segmentation({4, 4});
  const double sum_form = error_bound_sum_md(g4, target, dist, 0.0);
  CHECK(rel_err(integral_form, sum_form) < 1e-10);
}

TEST_CASE("bound-minimizing density for a one-axis quadratic") {
  // p ||grad beta||^2 = 4 x1^2; d/(d+2) power is 1/2, so lambda = 2 x1
  const auto target = make_target("quadratic", 2);
  const auto dist = make_input_dist("uniform", 2);
  const DensityFnMD lambda = ubm_density_md(target, dist, 2);
  CHECK(lambda.floor_applied);
  const std::array<double, 2> mid{0.5, 0.3};
  CHECK(std::fabs(lambda.eval(mid) - 1.0) < 1e-7);
  const std::array<double, 2> quarter{0.25, 0.9};
  CHECK(std::fabs(lambda.eval(quarter) - 0.5) < 1e-7);

  // at the minimizer the density-form bound equals the closed-form
  // minimum: excess 1/(6m) with the square inertia 1/12
  const InertiaProfile mu = InertiaProfile::constant_profile(1.0 / 12.0);
  const double at_min =
      error_bound_integral_md(lambda, mu, 16, target, dist, 0.0);
  const double closed = min_bound_md(16, 2, 1.0 / 12.0, target, dist, 0.0);
  CHECK(rel_err(at_min, closed) < 1e-6);
  CHECK(rel_err(closed, 1.0 / 96.0) < 1e-7);
}

TEST_CASE("closed-form minimum bound for the planar ramp") {
  // inner integral sqrt(2), squared: 2; with the square cell constant:
  // 2 * (1/12) / 16 * 2 = 1/48
  const auto target = make_target("sum-coords", 2);
  const auto dist = make_input_dist("uniform", 2);
  const double bound = min_bound_md(16, 2, 1.0 / 12.0, target, dist, 0.0);
  CHECK(rel_err(bound, 1.0 / 48.0) < 1e-12);
  const double hex = min_bound_md(16, 2, optimal_inertia_constant(2), target,
                                  dist, 0.0);
  CHECK(hex < bound);  // hexagonal cells beat squares
}

TEST_CASE("multidimensional validation errors") {
  const auto target = make_target("sum-coords", 2);
  const auto dist = make_input_dist("uniform", 2);
  CHECK(throws_kind(
      [&] {
        const DensityFnMD flat = density_md_from_function(
            2, [](std::span<const double>) { return 1.0; });
        error_bound_integral_md(flat, InertiaProfile::constant_profile(0.1), 0,
                                target, dist, 0.0);
      },
      ErrorKind::InvalidM));
  CHECK(throws_kind(
      [] {
        density_md_from_function(2,
                                 [](std::span<const double>) { return 0.0; });
      },
      ErrorKind::DegenerateDensity));
  CHECK(throws_kind([] { InertiaProfile::constant_profile(0.0); },
                    ErrorKind::InvalidParams));
  CHECK(throws_kind([&] { ubm_density_md(target, dist, 3); },
                    ErrorKind::DimensionMismatch));
}
