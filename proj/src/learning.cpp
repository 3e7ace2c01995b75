#include "moequant/learning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moequant/parallel.hpp"

namespace moequant::learning {

int route(const density1d::Segmentation1D& seg, double x) {
  if (x < 0.0 || x > 1.0) {
    fail(ErrorKind::OutOfDomain, "x = " + std::to_string(x));
  }
  const auto& bp = seg.breakpoints;
  auto it = std::upper_bound(bp.begin(), bp.end(), x);
  int idx = static_cast<int>(it - bp.begin()) - 1;
  return std::clamp(idx, 0, seg.expert_count() - 1);
}

RoutedCounts count_routed(const density1d::Segmentation1D& seg,
                          const model::Dataset& data) {
  if (data.dim != 1) {
    fail(ErrorKind::DimensionMismatch, "1-d segmentation, dataset dim " +
                                           std::to_string(data.dim));
  }
  RoutedCounts rc;
  rc.counts.assign(seg.expert_count(), 0);
  for (std::size_t j = 0; j < data.size(); ++j) {
    rc.counts[route(seg, data.input1(j))] += 1;
  }
  rc.total = data.size();
  for (int i = 0; i < seg.expert_count(); ++i) {
    if (rc.counts[i] == 0) rc.empty_regions.push_back(i);
  }
  return rc;
}

LearnedMoE fit_constants(const density1d::Segmentation1D& seg,
                         const model::Dataset& data) {
  seg.validate();
  if (data.size() == 0) {
    fail(ErrorKind::EmptyDataset, "fitting needs at least one sample");
  }
  if (data.dim != 1) {
    fail(ErrorKind::DimensionMismatch, "1-d segmentation, dataset dim " +
                                           std::to_string(data.dim));
  }
  const int m = seg.expert_count();
  LearnedMoE learned;
  learned.counts.counts.assign(m, 0);
  learned.counts.total = data.size();
  std::vector<double> sums(m, 0.0);
  double global_sum = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const int i = route(seg, data.input1(j));
    sums[i] += data.outputs[j];
    learned.counts.counts[i] += 1;
    global_sum += data.outputs[j];
  }
  learned.fallback_value = global_sum / static_cast<double>(data.size());
  learned.moe.segmentation = seg;
  learned.moe.provenance = "learned";
  learned.moe.constants.resize(m);
  for (int i = 0; i < m; ++i) {
    if (learned.counts.counts[i] == 0) {
      learned.moe.constants[i] = learned.fallback_value;
      learned.counts.empty_regions.push_back(i);
    } else {
      learned.moe.constants[i] =
          sums[i] / static_cast<double>(learned.counts.counts[i]);
    }
  }
  return learned;
}

std::vector<double> fit_constants_md(const multidim::GridSegmentationMD& seg,
                                     const model::Dataset& data,
                                     RoutedCounts* counts_out) {
  seg.validate();
  if (data.size() == 0) {
    fail(ErrorKind::EmptyDataset, "fitting needs at least one sample");
  }
  if (data.dim != seg.dim()) {
    fail(ErrorKind::DimensionMismatch, "segmentation dim " +
                                           std::to_string(seg.dim()) +
                                           ", dataset dim " +
                                           std::to_string(data.dim));
  }
  const int m = seg.region_count();
  std::vector<double> sums(m, 0.0);
  std::vector<std::size_t> counts(m, 0);
  double global_sum = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const int i = seg.route(data.input(j));
    sums[i] += data.outputs[j];
    counts[i] += 1;
    global_sum += data.outputs[j];
  }
  const double fallback = global_sum / static_cast<double>(data.size());
  std::vector<double> constants(m);
  RoutedCounts rc;
  rc.counts = counts;
  rc.total = data.size();
  for (int i = 0; i < m; ++i) {
    if (counts[i] == 0) {
      constants[i] = fallback;
      rc.empty_regions.push_back(i);
    } else {
      constants[i] = sums[i] / static_cast<double>(counts[i]);
    }
  }
  if (counts_out != nullptr) *counts_out = std::move(rc);
  return constants;
}

std::vector<double> region_mass(const density1d::Segmentation1D& seg,
                                const model::InputDistribution& dist,
                                const numerics::QuadratureSpec& spec) {
  seg.validate();
  const int m = seg.expert_count();
  std::vector<double> rho(m);
  for (int i = 0; i < m; ++i) {
    rho[i] = numerics::integrate(
        [&dist](double x) { return dist.pdf1(x); }, seg.lower(i), seg.upper(i),
        spec);
  }
  return rho;
}

DecompositionReport decompose(const LearnedMoE& learned,
                              const model::TargetFunction& target,
                              const model::InputDistribution& dist,
                              double sigma2,
                              const numerics::QuadratureSpec& spec) {
  const density1d::Segmentation1D& seg = learned.moe.segmentation;
  const std::vector<double> opt = approx1d::optimal_constants_1d(
      seg, target, dist, approx1d::ConstantsMode::Exact, spec);

  approx1d::MoEModel1D best;
  best.segmentation = seg;
  best.constants = opt;
  best.provenance = "optimal-exact";
  const approx1d::ErrorReport app =
      approx1d::test_error_exact_1d(best, target, dist, sigma2, spec);

  DecompositionReport report;
  report.region_masses = region_mass(seg, dist, spec);
  report.approximation_error = app.total;
  double est = 0.0;
  for (int i = 0; i < seg.expert_count(); ++i) {
    const double gap = learned.moe.constants[i] - opt[i];
    est += gap * gap * report.region_masses[i];
  }
  report.estimation_error = est;
  report.test_error = report.approximation_error + report.estimation_error;
  return report;
}

std::size_t chernoff_min_n(double rho, double delta) {
  if (!(rho > 0.0) || rho > 1.0) {
    fail(ErrorKind::InvalidParams, "rho must be in (0,1]");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    fail(ErrorKind::InvalidParams, "delta must be in (0,1)");
  }
  return static_cast<std::size_t>(std::ceil(8.0 / rho * (-std::log(delta))));
}

double hoeffding_radius(std::size_t n, double rho, double gamma, double r_beta,
                        double r_eps) {
  if (n < 1 || !(rho > 0.0) || rho > 1.0 || !(gamma >= 0.0) ||
      !(r_beta >= 0.0) || !(r_eps >= 0.0)) {
    fail(ErrorKind::InvalidParams, "radius needs n>=1, rho in (0,1], "
                                   "gamma, ranges >= 0");
  }
  return gamma * (r_beta + r_eps) / std::sqrt(static_cast<double>(n) * rho);
}

double estimation_bound(int m, std::size_t n, double gamma, double max_range) {
  if (m < 1 || n < 1 || !(gamma >= 0.0) || !(max_range >= 0.0)) {
    fail(ErrorKind::InvalidParams, "bound needs m,n >= 1 and gamma, range >= 0");
  }
  return static_cast<double>(m) / static_cast<double>(n) * gamma * gamma *
         max_range * max_range;
}

double target_range_1d(const model::TargetFunction& target, double lo,
                       double hi, int points) {
  if (points < 2 || !(lo <= hi)) {
    fail(ErrorKind::InvalidParams, "range scan needs points >= 2 and lo <= hi");
  }
  double min_v = target.eval1(lo);
  double max_v = min_v;
  for (int k = 1; k < points; ++k) {
    const double x = lo + (hi - lo) * k / (points - 1);
    const double v = target.eval1(x);
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
  }
  return max_v - min_v;
}

BoundCheckReport empirical_bound_check(const BoundCheckConfig& cfg) {
  cfg.segmentation.validate();
  if (!cfg.noise.bounded()) {
    fail(ErrorKind::UnboundedNoise,
         "the deviation radius requires bounded noise");
  }
  if (cfg.n < 1 || cfg.repeats < 1) {
    fail(ErrorKind::InvalidParams, "need n >= 1 and repeats >= 1");
  }
  if (!(cfg.delta > 0.0) || !(cfg.delta < 1.0) || !(cfg.gamma >= 0.0)) {
    fail(ErrorKind::InvalidParams, "need delta in (0,1) and gamma >= 0");
  }

  const int m = cfg.segmentation.expert_count();
  const std::vector<double> rho = region_mass(cfg.segmentation, cfg.dist);
  const std::vector<double> opt = approx1d::optimal_constants_1d(
      cfg.segmentation, cfg.target, cfg.dist);
  const double r_eps = cfg.noise.range_size();

  BoundCheckReport report;
  report.m = m;
  report.n = cfg.n;
  report.repeats = cfg.repeats;
  report.gamma = cfg.gamma;
  report.delta = cfg.delta;
  report.radius_failure_allowance =
      2.0 * std::exp(-cfg.gamma * cfg.gamma) + cfg.delta;
  report.estimation_failure_allowance =
      std::min(1.0, m * report.radius_failure_allowance);

  double max_range = 0.0;
  report.per_region.resize(m);
  for (int i = 0; i < m; ++i) {
    RegionBoundStats& stats = report.per_region[i];
    stats.rho = rho[i];
    stats.opt_constant = opt[i];
    const double r_beta = target_range_1d(
        cfg.target, cfg.segmentation.lower(i), cfg.segmentation.upper(i));
    stats.radius = hoeffding_radius(cfg.n, rho[i], cfg.gamma, r_beta, r_eps);
    stats.chernoff_n = chernoff_min_n(rho[i], cfg.delta);
    max_range = std::max(max_range, r_beta + r_eps);
  }
  report.estimation_bound_value =
      estimation_bound(m, cfg.n, cfg.gamma, max_range);

  // one fitted row per repeat; reductions below run in index order so the
  // report is identical at any thread count
  std::vector<double> fitted(cfg.repeats * static_cast<std::size_t>(m));
  parallel_for(cfg.repeats, [&](std::size_t r) {
    numerics::RngStream rng(cfg.seed, cfg.base_stream + r);
    const model::Dataset data =
        model::sample_dataset(cfg.dist, cfg.target, cfg.noise, cfg.n, rng);
    const LearnedMoE learned = fit_constants(cfg.segmentation, data);
    for (int i = 0; i < m; ++i) {
      fitted[r * m + i] = learned.moe.constants[i];
    }
  });

  for (int i = 0; i < m; ++i) {
    RegionBoundStats& stats = report.per_region[i];
    double sum = 0.0;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      const double c = fitted[r * m + i];
      sum += c;
      if (std::fabs(c - opt[i]) >= stats.radius) {
        stats.radius_violations += 1;
      }
    }
    stats.mean_constant = sum / static_cast<double>(cfg.repeats);
    double sq = 0.0;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      const double gap = fitted[r * m + i] - stats.mean_constant;
      sq += gap * gap;
    }
    if (cfg.repeats > 1) {
      stats.mean_std_error = std::sqrt(
          sq / (static_cast<double>(cfg.repeats - 1) * cfg.repeats));
    }
  }

  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    double est = 0.0;
    for (int i = 0; i < m; ++i) {
      const double gap = fitted[r * m + i] - opt[i];
      est += gap * gap * rho[i];
    }
    if (est > report.estimation_bound_value) {
      report.estimation_violations += 1;
    }
  }
  return report;
}

}  // namespace moequant::learning
