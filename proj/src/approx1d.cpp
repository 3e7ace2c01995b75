#include "moequant/approx1d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace moequant::approx1d {

namespace {

// half-open routing; the last interval owns its right endpoint
int route_1d(const density1d::Segmentation1D& seg, double x) {
  const auto& bp = seg.breakpoints;
  auto it = std::upper_bound(bp.begin(), bp.end(), x);
  int idx = static_cast<int>(it - bp.begin()) - 1;
  const int m = seg.expert_count();
  return std::clamp(idx, 0, m - 1);
}

}  // namespace

double MoEModel1D::predict(double x) const {
  if (x < 0.0 || x > 1.0) {
    fail(ErrorKind::OutOfDomain, "x = " + std::to_string(x));
  }
  return constants[route_1d(segmentation, x)];
}

std::vector<double> optimal_constants_1d(const density1d::Segmentation1D& seg,
                                         const model::TargetFunction& target,
                                         const model::InputDistribution& dist,
                                         ConstantsMode mode,
                                         const numerics::QuadratureSpec& spec) {
  seg.validate();
  const int m = seg.expert_count();
  std::vector<double> constants(m);
  if (mode == ConstantsMode::Midpoint) {
    for (int i = 0; i < m; ++i) {
      constants[i] = target.eval1(seg.center(i));
    }
    return constants;
  }
  for (int i = 0; i < m; ++i) {
    const double mass = numerics::integrate(
        [&dist](double x) { return dist.pdf1(x); }, seg.lower(i), seg.upper(i),
        spec);
    if (mass < 1e-14) {
      fail(ErrorKind::ZeroMassRegion,
           "region " + std::to_string(i) + " has mass " + std::to_string(mass));
    }
    const double weighted = numerics::integrate(
        [&dist, &target](double x) { return target.eval1(x) * dist.pdf1(x); },
        seg.lower(i), seg.upper(i), spec);
    constants[i] = weighted / mass;
  }
  return constants;
}

ErrorReport test_error_exact_1d(const MoEModel1D& moe,
                                const model::TargetFunction& target,
                                const model::InputDistribution& dist,
                                double sigma2,
                                const numerics::QuadratureSpec& spec) {
  moe.segmentation.validate();
  const int m = moe.segmentation.expert_count();
  if (static_cast<int>(moe.constants.size()) != m) {
    fail(ErrorKind::InvalidParams, "constants/segmentation size mismatch");
  }
  ErrorReport report;
  report.method = "exact-integral";
  report.m = m;
  report.noise_floor = sigma2;
  report.per_region.resize(m);
  double excess = 0.0;
  for (int i = 0; i < m; ++i) {
    const double c = moe.constants[i];
    const double contribution = numerics::integrate(
        [&target, &dist, c](double x) {
          const double r = c - target.eval1(x);
          return r * r * dist.pdf1(x);
        },
        moe.segmentation.lower(i), moe.segmentation.upper(i), spec);
    report.per_region[i] = contribution;
    excess += contribution;
  }
  report.excess = excess;
  report.total = sigma2 + excess;
  return report;
}

ErrorReport test_error_sum_1d(const density1d::Segmentation1D& seg,
                              const model::TargetFunction& target,
                              const model::InputDistribution& dist,
                              double sigma2) {
  seg.validate();
  const int m = seg.expert_count();
  ErrorReport report;
  report.method = "midpoint-sum";
  report.m = m;
  report.noise_floor = sigma2;
  report.per_region.resize(m);
  double excess = 0.0;
  for (int i = 0; i < m; ++i) {
    const double xc = seg.center(i);
    const double deriv = target.deriv1(xc);
    const double len = seg.length(i);
    const double contribution =
        deriv * deriv * dist.pdf1(xc) * len * len * len / 12.0;
    report.per_region[i] = contribution;
    excess += contribution;
  }
  report.excess = excess;
  report.total = sigma2 + excess;
  return report;
}

ErrorReport test_error_integral_1d(const density1d::DensityFn& lambda, int m,
                                   const model::TargetFunction& target,
                                   const model::InputDistribution& dist,
                                   double sigma2,
                                   const numerics::QuadratureSpec& spec) {
  if (m < 1) {
    fail(ErrorKind::InvalidM, "m must be >= 1");
  }
  const double integral = numerics::integrate(
      [&](double x) {
        const double lam = lambda.eval(x);
        if (!(lam > 0.0)) {
          fail(ErrorKind::DegenerateDensity,
               "segment density vanishes at x=" + std::to_string(x));
        }
        const double deriv = target.deriv1(x);
        return deriv * deriv * dist.pdf1(x) / (lam * lam);
      },
      0.0, 1.0, spec);
  ErrorReport report;
  report.method = "density-integral";
  report.m = m;
  report.noise_floor = sigma2;
  report.excess = integral / (12.0 * m * m);
  report.total = sigma2 + report.excess;
  return report;
}

ErrorReport optimal_error_1d(int m, const model::TargetFunction& target,
                             const model::InputDistribution& dist,
                             double sigma2,
                             const density1d::DensityOptions& opts,
                             const numerics::QuadratureSpec& spec) {
  if (m < 1) {
    fail(ErrorKind::InvalidM, "m must be >= 1");
  }
  if (!(opts.eps > 0.0)) {
    fail(ErrorKind::InvalidParams, "density floor eps must be positive");
  }
  const double integral = numerics::integrate(
      [&](double x) {
        const double deriv = target.deriv1(x);
        const double product =
            std::max(dist.pdf1(x) * deriv * deriv, opts.eps);
        return std::cbrt(product);
      },
      0.0, 1.0, spec);
  ErrorReport report;
  report.method = "optimal-closed-form";
  report.m = m;
  report.noise_floor = sigma2;
  report.excess = integral * integral * integral / (12.0 * m * m);
  report.total = sigma2 + report.excess;
  return report;
}

double quantizer_error_optimal(int m, const model::InputDistribution& dist,
                               const numerics::QuadratureSpec& spec) {
  if (m < 1) {
    fail(ErrorKind::InvalidM, "m must be >= 1");
  }
  const double integral = numerics::integrate(
      [&dist](double x) { return std::cbrt(dist.pdf1(x)); }, 0.0, 1.0, spec);
  return integral * integral * integral / (12.0 * m * m);
}

}  // namespace moequant::approx1d
