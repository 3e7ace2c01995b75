#include "moequant/multidim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace moequant::multidim {

namespace {

int auto_panels(int d) {
  if (d <= 2) return 64;
  if (d == 3) return 16;
  if (d <= 6) return 6;
  fail(ErrorKind::InvalidParams,
       "tensor quadrature supports d <= 6; use the Monte Carlo paths");
}

double grad_norm_sq(const model::TargetFunction& target,
                    std::span<const double> x) {
  const std::vector<double> g = target.grad(x);
  double s = 0.0;
  for (double v : g) s += v * v;
  return s;
}

}  // namespace

double Box::volume() const {
  double v = 1.0;
  for (int j = 0; j < dim(); ++j) v *= hi[j] - lo[j];
  return v;
}

std::vector<double> Box::center() const {
  std::vector<double> c(lo.size());
  for (std::size_t j = 0; j < lo.size(); ++j) c[j] = 0.5 * (lo[j] + hi[j]);
  return c;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (x[j] < lo[j] || x[j] > hi[j]) return false;
  }
  return true;
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size()) {
    fail(ErrorKind::DegenerateRegion, "box needs matched lo/hi per axis");
  }
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (!(lo[j] < hi[j])) {
      fail(ErrorKind::DegenerateRegion,
           "box side " + std::to_string(j) + " has nonpositive length");
    }
  }
}

RegionGeometry region_geometry(const Box& box, std::size_t mc_samples) {
  box.validate();
  const int d = box.dim();
  RegionGeometry geo;
  geo.volume = box.volume();
  geo.center = box.center();
  double side_sq = 0.0;
  for (int j = 0; j < d; ++j) {
    const double side = box.hi[j] - box.lo[j];
    side_sq += side * side;
  }
  geo.second_moment_raw = geo.volume * side_sq / 12.0;
  geo.m2 = geo.second_moment_raw /
           (d * std::pow(geo.volume, 1.0 + 2.0 / d));

  // odd moments have no closed form here; estimate E||x-c||^k over the box
  numerics::RngStream rng(0x4d43u, static_cast<std::uint64_t>(d));
  double sum1 = 0.0;
  double sum3 = 0.0;
  std::vector<double> x(d);
  for (std::size_t s = 0; s < mc_samples; ++s) {
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) {
      x[j] = rng.uniform(box.lo[j], box.hi[j]);
      const double diff = x[j] - geo.center[j];
      r2 += diff * diff;
    }
    const double r = std::sqrt(r2);
    sum1 += r;
    sum3 += r2 * r;
  }
  const double inv = 1.0 / static_cast<double>(mc_samples);
  geo.m1 = geo.volume * (sum1 * inv) / (d * std::pow(geo.volume, 1.0 + 1.0 / d));
  geo.m3 = geo.volume * (sum3 * inv) / (d * std::pow(geo.volume, 1.0 + 3.0 / d));
  return geo;
}

double optimal_inertia_constant(int d) {
  if (d < 1) {
    fail(ErrorKind::InvalidParams, "dimension must be >= 1");
  }
  if (d == 1) return 1.0 / 12.0;
  if (d == 2) return 5.0 / (36.0 * std::sqrt(3.0));  // regular hexagon
  return 1.0 / 12.0;  // cube fallback, conservative for d >= 3
}

int GridSegmentationMD::region_count() const {
  int m = 1;
  for (const auto& bp : axis_breakpoints) {
    m *= static_cast<int>(bp.size()) - 1;
  }
  return m;
}

std::vector<int> GridSegmentationMD::axis_counts() const {
  std::vector<int> counts;
  counts.reserve(axis_breakpoints.size());
  for (const auto& bp : axis_breakpoints) {
    counts.push_back(static_cast<int>(bp.size()) - 1);
  }
  return counts;
}

Box GridSegmentationMD::region(int flat_index) const {
  if (flat_index < 0 || flat_index >= region_count()) {
    fail(ErrorKind::OutOfRange, "region index " + std::to_string(flat_index));
  }
  const int d = dim();
  Box box;
  box.lo.resize(d);
  box.hi.resize(d);
  int rest = flat_index;  // axis 0 varies fastest
  for (int j = 0; j < d; ++j) {
    const int k = static_cast<int>(axis_breakpoints[j].size()) - 1;
    const int idx = rest % k;
    rest /= k;
    box.lo[j] = axis_breakpoints[j][idx];
    box.hi[j] = axis_breakpoints[j][idx + 1];
  }
  return box;
}

int GridSegmentationMD::route(std::span<const double> x) const {
  const int d = dim();
  if (static_cast<int>(x.size()) != d) {
    fail(ErrorKind::DimensionMismatch, "route got wrong input dimension");
  }
  int flat = 0;
  int stride = 1;
  for (int j = 0; j < d; ++j) {
    if (x[j] < 0.0 || x[j] > 1.0) {
      fail(ErrorKind::OutOfDomain,
           "coordinate " + std::to_string(j) + " = " + std::to_string(x[j]));
    }
    const auto& bp = axis_breakpoints[j];
    auto it = std::upper_bound(bp.begin(), bp.end(), x[j]);
    int idx = static_cast<int>(it - bp.begin()) - 1;
    idx = std::clamp(idx, 0, static_cast<int>(bp.size()) - 2);
    flat += stride * idx;
    stride *= static_cast<int>(bp.size()) - 1;
  }
  return flat;
}

void GridSegmentationMD::validate() const {
  if (axis_breakpoints.empty()) {
    fail(ErrorKind::InvalidCounts, "grid needs at least one axis");
  }
  for (const auto& bp : axis_breakpoints) {
    if (bp.size() < 2 || bp.front() != 0.0 || bp.back() != 1.0) {
      fail(ErrorKind::NonMonotone, "axis breakpoints must span [0,1]");
    }
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
      if (!(bp[i] < bp[i + 1])) {
        fail(ErrorKind::NonMonotone, "axis breakpoints must increase strictly");
      }
    }
  }
}

GridSegmentationMD grid_segmentation(
    const std::vector<int>& counts,
    const std::vector<density1d::DensityFn>* per_axis) {
  if (counts.empty()) {
    fail(ErrorKind::InvalidCounts, "grid needs at least one axis");
  }
  if (per_axis != nullptr && per_axis->size() != counts.size()) {
    fail(ErrorKind::InvalidCounts, "one density per axis required");
  }
  GridSegmentationMD grid;
  grid.axis_breakpoints.reserve(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < 1) {
      fail(ErrorKind::InvalidCounts, "axis counts must be >= 1");
    }
    density1d::Segmentation1D seg =
        (per_axis != nullptr)
            ? density1d::segmentation_from_density((*per_axis)[j], counts[j])
            : density1d::uniform_segmentation(counts[j]);
    grid.axis_breakpoints.push_back(std::move(seg.breakpoints));
  }
  return grid;
}

double integrate_box(const std::function<double(std::span<const double>)>& f,
                     const Box& box, const MdQuadOptions& opts) {
  box.validate();
  const int d = box.dim();
  int panels = opts.panels_per_axis > 0 ? opts.panels_per_axis : auto_panels(d);
  if (panels % 2 != 0) panels += 1;
  const int nodes = panels + 1;

  std::vector<std::vector<double>> axis_nodes(d);
  std::vector<std::vector<double>> axis_weights(d);
  for (int j = 0; j < d; ++j) {
    const double h = (box.hi[j] - box.lo[j]) / panels;
    axis_nodes[j].resize(nodes);
    axis_weights[j].resize(nodes);
    for (int k = 0; k < nodes; ++k) {
      axis_nodes[j][k] = box.lo[j] + h * k;
      double w = (k == 0 || k == nodes - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      axis_weights[j][k] = w * h / 3.0;
    }
    axis_nodes[j].back() = box.hi[j];
  }

  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  for (int j = 0; j < d; ++j) x[j] = axis_nodes[j][0];
  double sum = 0.0;
  for (;;) {
    double w = 1.0;
    for (int j = 0; j < d; ++j) w *= axis_weights[j][idx[j]];
    const double v = f(x);
    if (!std::isfinite(v)) {
      fail(ErrorKind::NonFinite, "integrand non-finite in tensor quadrature");
    }
    sum += w * v;
    int j = 0;
    while (j < d) {
      if (++idx[j] < nodes) {
        x[j] = axis_nodes[j][idx[j]];
        break;
      }
      idx[j] = 0;
      x[j] = axis_nodes[j][0];
      ++j;
    }
    if (j == d) break;
  }
  return sum;
}

std::vector<double> optimal_constants_md(const GridSegmentationMD& seg,
                                         const model::TargetFunction& target,
                                         const model::InputDistribution& dist,
                                         ConstantsModeMD mode,
                                         const MdQuadOptions& opts) {
  seg.validate();
  const int m = seg.region_count();
  if (target.dim != seg.dim() || dist.dim != seg.dim()) {
    fail(ErrorKind::DimensionMismatch, "segmentation/target/dist dims differ");
  }
  std::vector<double> constants(m);
  if (mode == ConstantsModeMD::Center) {
    for (int i = 0; i < m; ++i) {
      const std::vector<double> c = seg.region(i).center();
      constants[i] = target.eval(c);
    }
    return constants;
  }

  if (dist.is_product() && seg.dim() <= 6) {
    for (int i = 0; i < m; ++i) {
      const Box box = seg.region(i);
      const double mass = integrate_box(
          [&dist](std::span<const double> x) { return dist.pdf(x); }, box,
          opts);
      if (mass < 1e-14) {
        fail(ErrorKind::ZeroMassRegion,
             "region " + std::to_string(i) + " has mass " +
                 std::to_string(mass));
      }
      const double weighted = integrate_box(
          [&dist, &target](std::span<const double> x) {
            return target.eval(x) * dist.pdf(x);
          },
          box, opts);
      constants[i] = weighted / mass;
    }
    return constants;
  }

  // self-normalizing Monte Carlo ratio; per-region standard error is
  // sd(beta on region) / sqrt(hits), so mc_samples caps the worst region
  numerics::RngStream rng(opts.mc_seed, 1);
  std::vector<double> sums(m, 0.0);
  std::vector<std::size_t> hits(m, 0);
  std::vector<double> x(seg.dim());
  for (std::size_t s = 0; s < opts.mc_samples; ++s) {
    dist.sample_into(rng, x);
    const int i = seg.route(x);
    sums[i] += target.eval(x);
    hits[i] += 1;
  }
  for (int i = 0; i < m; ++i) {
    if (hits[i] == 0) {
      fail(ErrorKind::ZeroMassRegion,
           "region " + std::to_string(i) + " received no Monte Carlo hits");
    }
    constants[i] = sums[i] / static_cast<double>(hits[i]);
  }
  return constants;
}

McEstimate test_error_md_mc(const GridSegmentationMD& seg,
                            const std::vector<double>& constants,
                            const model::TargetFunction& target,
                            const model::InputDistribution& dist,
                            const model::NoiseModel& noise, std::size_t n,
                            numerics::RngStream& rng) {
  seg.validate();
  if (static_cast<int>(constants.size()) != seg.region_count()) {
    fail(ErrorKind::InvalidParams, "constants/segmentation size mismatch");
  }
  if (n < 1) {
    fail(ErrorKind::InvalidParams, "Monte Carlo needs n >= 1");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> x(seg.dim());
  for (std::size_t s = 0; s < n; ++s) {
    dist.sample_into(rng, x);
    const double y = target.eval(x) + noise.draw(rng);
    const double r = constants[seg.route(x)] - y;
    const double sq = r * r;
    sum += sq;
    sum_sq += sq * sq;
  }
  McEstimate est;
  est.samples = n;
  est.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double var =
        std::max(0.0, (sum_sq / n - est.mean * est.mean) * n / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

double error_bound_sum_md(const GridSegmentationMD& seg,
                          const model::TargetFunction& target,
                          const model::InputDistribution& dist, double sigma2) {
  seg.validate();
  const int d = seg.dim();
  const int m = seg.region_count();
  double excess = 0.0;
  for (int i = 0; i < m; ++i) {
    const Box box = seg.region(i);
    const std::vector<double> center = box.center();
    const double volume = box.volume();
    double side_sq = 0.0;
    for (int j = 0; j < d; ++j) {
      const double side = box.hi[j] - box.lo[j];
      side_sq += side * side;
    }
    const double m2 =
        (volume * side_sq / 12.0) / (d * std::pow(volume, 1.0 + 2.0 / d));
    excess += grad_norm_sq(target, center) * dist.pdf(center) * m2 *
              std::pow(volume, 1.0 + 2.0 / d);
  }
  return sigma2 + d * excess;
}

InertiaProfile InertiaProfile::constant_profile(double value) {
  if (!(value > 0.0)) {
    fail(ErrorKind::InvalidParams, "inertia profile must be positive");
  }
  InertiaProfile profile;
  profile.fn = [value](std::span<const double>) { return value; };
  return profile;
}

double DensityFnMD::eval(std::span<const double> x) const {
  const double v = raw(x) / normalization;
  if (!std::isfinite(v) || v < 0.0) {
    fail(ErrorKind::DegenerateDensity, "segment density invalid at query point");
  }
  return v;
}

DensityFnMD density_md_from_function(
    int dim, const std::function<double(std::span<const double>)>& raw,
    const MdQuadOptions& opts) {
  if (dim < 1) {
    fail(ErrorKind::InvalidParams, "dimension must be >= 1");
  }
  Box cube;
  cube.lo.assign(dim, 0.0);
  cube.hi.assign(dim, 1.0);
  const double z = integrate_box(raw, cube, opts);
  if (!(z > 0.0)) {
    fail(ErrorKind::DegenerateDensity, "density integrates to zero");
  }
  DensityFnMD density;
  density.dim = dim;
  density.raw = raw;
  density.normalization = z;
  return density;
}

double error_bound_integral_md(const DensityFnMD& lambda,
                               const InertiaProfile& mu, int m,
                               const model::TargetFunction& target,
                               const model::InputDistribution& dist,
                               double sigma2, const MdQuadOptions& opts) {
  if (m < 1) {
    fail(ErrorKind::InvalidM, "m must be >= 1");
  }
  const int d = lambda.dim;
  if (target.dim != d || dist.dim != d) {
    fail(ErrorKind::DimensionMismatch, "density/target/dist dims differ");
  }
  const double exponent = 2.0 / d;
  auto local = [&](std::span<const double> x, double pdf_value) {
    const double lam = lambda.eval(x);
    if (!(lam > 0.0)) {
      fail(ErrorKind::DegenerateDensity, "segment density vanishes");
    }
    return grad_norm_sq(target, x) * pdf_value * mu.eval(x) /
           std::pow(lam, exponent);
  };

  double integral = 0.0;
  if (d <= 6) {
    Box cube;
    cube.lo.assign(d, 0.0);
    cube.hi.assign(d, 1.0);
    integral = integrate_box(
        [&](std::span<const double> x) { return local(x, dist.pdf(x)); }, cube,
        opts);
  } else {
    // importance sampling with x ~ dist: pdf cancels out of the integrand
    numerics::RngStream rng(opts.mc_seed, 2);
    std::vector<double> x(d);
    double sum = 0.0;
    for (std::size_t s = 0; s < opts.mc_samples; ++s) {
      dist.sample_into(rng, x);
      sum += local(x, 1.0);
    }
    integral = sum / static_cast<double>(opts.mc_samples);
  }
  return sigma2 + d / std::pow(static_cast<double>(m), exponent) * integral;
}

DensityFnMD ubm_density_md(const model::TargetFunction& target,
                           const model::InputDistribution& dist, int d,
                           double eps, const MdQuadOptions& opts) {
  if (target.dim != d || dist.dim != d) {
    fail(ErrorKind::DimensionMismatch, "density/target/dist dims differ");
  }
  if (!(eps > 0.0)) {
    fail(ErrorKind::InvalidParams, "density floor eps must be positive");
  }
  const double exponent = d / (d + 2.0);
  auto floored = std::make_shared<bool>(false);
  auto target_c = target;
  auto dist_c = dist;
  auto raw = [target_c, dist_c, eps, exponent,
              floored](std::span<const double> x) {
    double product = dist_c.pdf(x) * grad_norm_sq(target_c, x);
    if (product < eps) {
      product = eps;
      *floored = true;
    }
    return std::pow(product, exponent);
  };
  DensityFnMD density = density_md_from_function(d, raw, opts);
  density.floor_applied = *floored;  // observed on the normalization grid
  density.floor_eps = eps;
  return density;
}

double min_bound_md(int m, int d, double m_opt,
                    const model::TargetFunction& target,
                    const model::InputDistribution& dist, double sigma2,
                    double eps, const MdQuadOptions& opts) {
  if (m < 1) {
    fail(ErrorKind::InvalidM, "m must be >= 1");
  }
  if (!(m_opt > 0.0)) {
    fail(ErrorKind::InvalidParams, "inertia constant must be positive");
  }
  if (target.dim != d || dist.dim != d) {
    fail(ErrorKind::DimensionMismatch, "target/dist dims differ");
  }
  const double exponent = d / (d + 2.0);
  Box cube;
  cube.lo.assign(d, 0.0);
  cube.hi.assign(d, 1.0);
  const double inner = integrate_box(
      [&](std::span<const double> x) {
        return std::pow(std::max(dist.pdf(x) * grad_norm_sq(target, x), eps),
                        exponent);
      },
      cube, opts);
  return sigma2 + d * m_opt / std::pow(static_cast<double>(m), 2.0 / d) *
                      std::pow(inner, 1.0 / exponent);
}

}  // namespace moequant::multidim
