#include "moequant/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace moequant::model {

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_phi(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void check_dim(int expected, std::size_t got, const char* who) {
  if (static_cast<std::size_t>(expected) != got) {
    fail(ErrorKind::DimensionMismatch,
         std::string(who) + " expects dim " + std::to_string(expected) +
             ", got " + std::to_string(got));
  }
}

// "x,value" CSV with a header row; x strictly increasing and spanning [0,1]
std::pair<std::vector<double>, std::vector<double>> load_xy_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorKind::ConfigError, "cannot open table file " + path);
  }
  std::vector<double> xs, vs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.find_first_not_of("0123456789.+-eE, \t\r") != std::string::npos) {
        continue;  // header row
      }
    }
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      fail(ErrorKind::InvalidParams, "malformed table row '" + line + "'");
    }
    xs.push_back(std::stod(a));
    vs.push_back(std::stod(b));
  }
  if (xs.size() < 2) {
    fail(ErrorKind::InvalidParams, "table needs at least 2 rows: " + path);
  }
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    if (!(xs[k] < xs[k + 1])) {
      fail(ErrorKind::InvalidParams,
           "table x values must be strictly increasing: " + path);
    }
  }
  if (std::fabs(xs.front()) > 1e-9 || std::fabs(xs.back() - 1.0) > 1e-9) {
    fail(ErrorKind::InvalidParams, "table grid must span [0,1]: " + path);
  }
  xs.front() = 0.0;
  xs.back() = 1.0;
  return {std::move(xs), std::move(vs)};
}

double interp_table(const std::vector<double>& xs, const std::vector<double>& vs,
                    double x) {
  const double xc = std::clamp(x, 0.0, 1.0);
  auto it = std::upper_bound(xs.begin(), xs.end(), xc);
  std::size_t k = (it == xs.begin()) ? 0 : (it - xs.begin() - 1);
  if (k + 1 >= xs.size()) k = xs.size() - 2;
  const double t = (xc - xs[k]) / (xs[k + 1] - xs[k]);
  return vs[k] + t * (vs[k + 1] - vs[k]);
}

}  // namespace

double TargetFunction::eval(std::span<const double> x) const {
  check_dim(dim, x.size(), "target eval");
  return eval_fn(x);
}

std::vector<double> TargetFunction::grad(std::span<const double> x) const {
  check_dim(dim, x.size(), "target grad");
  return grad_fn(x);
}

double TargetFunction::eval1(double x) const {
  return eval(std::span<const double>(&x, 1));
}

double TargetFunction::deriv1(double x) const {
  return grad(std::span<const double>(&x, 1))[0];
}

TargetFunction make_target(const std::string& name, int dim) {
  TargetSpec spec;
  spec.name = name;
  spec.dim = dim;
  return make_target(spec);
}

TargetFunction make_target(const TargetSpec& spec) {
  if (spec.dim < 1) {
    fail(ErrorKind::InvalidParams, "target dim must be >= 1");
  }
  TargetFunction t;
  t.dim = spec.dim;
  t.name = spec.name;
  const int d = spec.dim;

  if (spec.name == "linear") {
    t.eval_fn = [](std::span<const double> x) { return x[0]; };
    t.grad_fn = [d](std::span<const double>) {
      std::vector<double> g(d, 0.0);
      g[0] = 1.0;
      return g;
    };
  } else if (spec.name == "quadratic") {
    t.eval_fn = [](std::span<const double> x) { return x[0] * x[0]; };
    t.grad_fn = [d](std::span<const double> x) {
      std::vector<double> g(d, 0.0);
      g[0] = 2.0 * x[0];
      return g;
    };
  } else if (spec.name == "cosine10pi") {
    if (d != 1) {
      fail(ErrorKind::DimensionMismatch, "cosine10pi is one-dimensional");
    }
    t.eval_fn = [](std::span<const double> x) {
      return std::cos(10.0 * kPi * x[0]);
    };
    t.grad_fn = [](std::span<const double> x) {
      return std::vector<double>{-10.0 * kPi * std::sin(10.0 * kPi * x[0])};
    };
  } else if (spec.name == "cosine-plateau") {
    // cos(10 pi x) clamped to 1 on (0.4, 0.6); continuous since
    // cos(4 pi) = 1, and the derivative vanishes at both joins
    if (d != 1) {
      fail(ErrorKind::DimensionMismatch, "cosine-plateau is one-dimensional");
    }
    t.eval_fn = [](std::span<const double> x) {
      if (x[0] > 0.4 && x[0] < 0.6) return 1.0;
      return std::cos(10.0 * kPi * x[0]);
    };
    t.grad_fn = [](std::span<const double> x) {
      if (x[0] > 0.4 && x[0] < 0.6) return std::vector<double>{0.0};
      return std::vector<double>{-10.0 * kPi * std::sin(10.0 * kPi * x[0])};
    };
  } else if (spec.name == "sum-coords") {
    t.eval_fn = [](std::span<const double> x) {
      double s = 0.0;
      for (double v : x) s += v;
      return s;
    };
    t.grad_fn = [d](std::span<const double>) {
      return std::vector<double>(d, 1.0);
    };
  } else if (spec.name == "custom-polynomial") {
    if (d != 1) {
      fail(ErrorKind::DimensionMismatch, "custom-polynomial is one-dimensional");
    }
    if (spec.coefficients.empty()) {
      fail(ErrorKind::InvalidParams, "custom-polynomial needs coefficients");
    }
    const std::vector<double> c = spec.coefficients;
    t.eval_fn = [c](std::span<const double> x) {
      double v = 0.0;
      for (std::size_t k = c.size(); k-- > 0;) v = v * x[0] + c[k];
      return v;
    };
    t.grad_fn = [c](std::span<const double> x) {
      double v = 0.0;
      for (std::size_t k = c.size(); k-- > 1;) {
        v = v * x[0] + static_cast<double>(k) * c[k];
      }
      return std::vector<double>{v};
    };
  } else if (spec.name == "tabulated") {
    if (d != 1) {
      fail(ErrorKind::DimensionMismatch, "tabulated targets are one-dimensional");
    }
    auto [xs, vs] = load_xy_csv(spec.table_path);
    auto eval = [xs, vs](double x) { return interp_table(xs, vs, x); };
    t.eval_fn = [eval](std::span<const double> x) { return eval(x[0]); };
    const double h = 1e-6;
    t.fd_step = h;
    // central differences inside, one-sided at the grid ends
    t.grad_fn = [eval, h](std::span<const double> x) {
      const double x0 = x[0];
      if (x0 < h) {
        return std::vector<double>{(eval(x0 + h) - eval(x0)) / h};
      }
      if (x0 > 1.0 - h) {
        return std::vector<double>{(eval(x0) - eval(x0 - h)) / h};
      }
      return std::vector<double>{(eval(x0 + h) - eval(x0 - h)) / (2.0 * h)};
    };
  } else {
    fail(ErrorKind::UnknownTarget, "no target named '" + spec.name + "'");
  }
  return t;
}

double InputDistribution::pdf(std::span<const double> x) const {
  check_dim(dim, x.size(), "pdf");
  return pdf_fn(x);
}

double InputDistribution::pdf1(double x) const {
  return pdf(std::span<const double>(&x, 1));
}

void InputDistribution::sample_into(numerics::RngStream& rng,
                                    std::span<double> out) const {
  check_dim(dim, out.size(), "sample");
  sample_fn(rng, out);
}

std::vector<double> InputDistribution::sample(numerics::RngStream& rng) const {
  std::vector<double> x(dim);
  sample_into(rng, x);
  return x;
}

namespace {

InputDistribution make_uniform_1d() {
  InputDistribution dist;
  dist.dim = 1;
  dist.name = "uniform";
  dist.pdf_fn = [](std::span<const double>) { return 1.0; };
  dist.sample_fn = [](numerics::RngStream& rng, std::span<double> out) {
    out[0] = rng.next_double();
  };
  return dist;
}

InputDistribution make_truncated_gaussian(double mu, double s) {
  if (!(s > 0.0)) {
    fail(ErrorKind::InvalidParams,
         "truncated-gaussian scale must be positive, got " + std::to_string(s));
  }
  const double mass = normal_cdf((1.0 - mu) / s) - normal_cdf((0.0 - mu) / s);
  if (!(mass > 1e-12)) {
    fail(ErrorKind::InvalidParams,
         "truncated-gaussian has no mass inside [0,1]");
  }
  InputDistribution dist;
  dist.dim = 1;
  dist.name = "truncated-gaussian(" + std::to_string(mu) + "," +
              std::to_string(s) + ")";
  dist.pdf_fn = [mu, s, mass](std::span<const double> x) {
    if (x[0] < 0.0 || x[0] > 1.0) return 0.0;
    return normal_phi((x[0] - mu) / s) / (s * mass);
  };
  dist.sample_fn = [mu, s](numerics::RngStream& rng, std::span<double> out) {
    for (;;) {
      const double x = mu + s * rng.normal();
      if (x >= 0.0 && x <= 1.0) {
        out[0] = x;
        return;
      }
    }
  };

  const double integral =
      numerics::integrate([&dist](double x) { return dist.pdf1(x); }, 0.0, 1.0);
  if (std::fabs(integral - 1.0) > 1e-6) {
    fail(ErrorKind::NormalizationFailure,
         "truncated-gaussian pdf integrates to " + std::to_string(integral));
  }
  return dist;
}

InputDistribution make_tabulated_pdf(const std::string& path) {
  auto [xs, vs] = load_xy_csv(path);
  for (double v : vs) {
    if (v < 0.0) {
      fail(ErrorKind::NegativeDensity, "tabulated pdf has negative values");
    }
  }
  // exact integral of the interpolant
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    integral += 0.5 * (vs[k] + vs[k + 1]) * (xs[k + 1] - xs[k]);
  }
  if (std::fabs(integral - 1.0) > 1e-6) {
    fail(ErrorKind::NormalizationFailure,
         "tabulated pdf integrates to " + std::to_string(integral) +
             "; normalize the file");
  }
  auto xs_c = xs;
  auto vs_c = vs;
  InputDistribution dist;
  dist.dim = 1;
  dist.name = "custom-tabulated(" + path + ")";
  dist.pdf_fn = [xs_c, vs_c](std::span<const double> x) {
    return interp_table(xs_c, vs_c, x[0]);
  };
  auto cdf = numerics::cumulative_table(
      [xs_c, vs_c](double x) { return interp_table(xs_c, vs_c, x); }, 10001,
      /*normalize=*/true);
  dist.sample_fn = [cdf](numerics::RngStream& rng, std::span<double> out) {
    out[0] = numerics::invert_monotone(cdf, rng.next_double());
  };
  return dist;
}

}  // namespace

InputDistribution make_input_dist(const std::string& kind, int dim) {
  DistSpec spec;
  spec.kind = kind;
  spec.dim = dim;
  return make_input_dist(spec);
}

InputDistribution make_input_dist(const DistSpec& spec) {
  if (spec.dim < 1) {
    fail(ErrorKind::InvalidParams, "distribution dim must be >= 1");
  }
  if (spec.kind == "uniform") {
    if (spec.dim == 1) return make_uniform_1d();
    InputDistribution dist;
    dist.dim = spec.dim;
    dist.name = "uniform";
    dist.pdf_fn = [](std::span<const double>) { return 1.0; };
    dist.sample_fn = [](numerics::RngStream& rng, std::span<double> out) {
      for (double& v : out) v = rng.next_double();
    };
    dist.axes.assign(spec.dim, make_uniform_1d());
    return dist;
  }
  if (spec.kind == "truncated-gaussian") {
    if (spec.dim != 1) {
      fail(ErrorKind::DimensionMismatch,
           "truncated-gaussian is one-dimensional; use product-of-1d");
    }
    return make_truncated_gaussian(spec.mu, spec.s);
  }
  if (spec.kind == "custom-tabulated") {
    if (spec.dim != 1) {
      fail(ErrorKind::DimensionMismatch, "custom-tabulated is one-dimensional");
    }
    return make_tabulated_pdf(spec.table_path);
  }
  if (spec.kind == "product-of-1d") {
    if (spec.axes.empty()) {
      fail(ErrorKind::InvalidParams, "product-of-1d needs axis specs");
    }
    InputDistribution dist;
    dist.dim = static_cast<int>(spec.axes.size());
    dist.name = "product-of-1d";
    for (const DistSpec& axis_spec : spec.axes) {
      if (axis_spec.dim != 1) {
        fail(ErrorKind::DimensionMismatch, "product axes must be 1-dimensional");
      }
      dist.axes.push_back(make_input_dist(axis_spec));
    }
    const auto axes = dist.axes;  // value capture keeps dist copyable
    dist.pdf_fn = [axes](std::span<const double> x) {
      double p = 1.0;
      for (std::size_t j = 0; j < axes.size(); ++j) {
        p *= axes[j].pdf1(x[j]);
      }
      return p;
    };
    dist.sample_fn = [axes](numerics::RngStream& rng, std::span<double> out) {
      for (std::size_t j = 0; j < axes.size(); ++j) {
        axes[j].sample_fn(rng, out.subspan(j, 1));
      }
    };
    return dist;
  }
  fail(ErrorKind::InvalidParams, "unknown distribution kind '" + spec.kind + "'");
}

NoiseModel NoiseModel::none() { return NoiseModel{}; }

NoiseModel NoiseModel::uniform_range(double lo, double hi) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorKind::InvalidParams, "noise range must be finite with lo <= hi");
  }
  const double scale = std::max({1.0, std::fabs(lo), std::fabs(hi)});
  if (std::fabs(lo + hi) > 1e-12 * scale) {
    fail(ErrorKind::InvalidParams, "uniform noise must be zero-mean");
  }
  NoiseModel n;
  n.kind = Kind::UniformRange;
  n.lo = lo;
  n.hi = hi;
  return n;
}

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    fail(ErrorKind::InvalidParams, "noise sigma must be >= 0");
  }
  NoiseModel n;
  n.kind = Kind::Gaussian;
  n.sigma = sigma;
  return n;
}

double NoiseModel::variance() const {
  switch (kind) {
    case Kind::None: return 0.0;
    case Kind::UniformRange: return (hi - lo) * (hi - lo) / 12.0;
    case Kind::Gaussian: return sigma * sigma;
  }
  return 0.0;
}

double NoiseModel::range_size() const {
  switch (kind) {
    case Kind::None: return 0.0;
    case Kind::UniformRange: return hi - lo;
    case Kind::Gaussian:
      fail(ErrorKind::UnboundedNoise, "gaussian noise has no finite range");
  }
  return 0.0;
}

double NoiseModel::draw(numerics::RngStream& rng) const {
  switch (kind) {
    case Kind::None: return 0.0;
    case Kind::UniformRange: return rng.uniform(lo, hi);
    case Kind::Gaussian: return sigma * rng.normal();
  }
  return 0.0;
}

std::string NoiseModel::describe() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::UniformRange:
      return "uniform[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
    case Kind::Gaussian: return "gaussian(sigma=" + std::to_string(sigma) + ")";
  }
  return "?";
}

Dataset sample_dataset(const InputDistribution& dist,
                       const TargetFunction& target, const NoiseModel& noise,
                       std::size_t n, numerics::RngStream& rng) {
  if (dist.dim != target.dim) {
    fail(ErrorKind::DimensionMismatch,
         "distribution dim " + std::to_string(dist.dim) +
             " != target dim " + std::to_string(target.dim));
  }
  Dataset data;
  data.dim = dist.dim;
  data.seed = rng.seed();
  data.stream_id = rng.stream_id();
  data.inputs.resize(n * static_cast<std::size_t>(dist.dim));
  data.outputs.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::span<double> x(data.inputs.data() + j * dist.dim,
                        static_cast<std::size_t>(dist.dim));
    dist.sample_into(rng, x);
    data.outputs[j] = target.eval(x) + noise.draw(rng);
  }
  return data;
}

}  // namespace moequant::model
