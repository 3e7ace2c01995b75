#include "moequant/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace moequant::numerics {

namespace {

// One composite Simpson sweep. abs_estimate accumulates int |f| on the
// same nodes; integrate() uses it as the convergence scale so integrals
// that cancel to ~0 still converge under a relative test.
double simpson_sweep(const Fn1D& f, double lo, double hi, int panels,
                     double* abs_estimate) {
  const double h = (hi - lo) / panels;
  double sum = 0.0;
  double abs_sum = 0.0;
  double f_left = f(lo);
  if (!std::isfinite(f_left)) {
    fail(ErrorKind::NonFinite, "integrand at x=" + std::to_string(lo));
  }
  for (int k = 0; k < panels; ++k) {
    const double a = lo + k * h;
    const double b = (k + 1 == panels) ? hi : lo + (k + 1) * h;
    const double mid = 0.5 * (a + b);
    const double f_mid = f(mid);
    const double f_right = f(b);
    if (!std::isfinite(f_mid) || !std::isfinite(f_right)) {
      fail(ErrorKind::NonFinite,
           "integrand near x=" + std::to_string(mid));
    }
    sum += (b - a) / 6.0 * (f_left + 4.0 * f_mid + f_right);
    abs_sum += (b - a) / 6.0 *
               (std::fabs(f_left) + 4.0 * std::fabs(f_mid) + std::fabs(f_right));
    f_left = f_right;
  }
  if (abs_estimate != nullptr) *abs_estimate = abs_sum;
  return sum;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (panels < 2 || panels % 2 != 0) {
    fail(ErrorKind::InvalidParams,
         "quadrature panels must be even and >= 2, got " +
             std::to_string(panels));
  }
  if (!(refine_tol > 0.0) || !std::isfinite(refine_tol)) {
    fail(ErrorKind::InvalidParams, "refine_tol must be positive");
  }
  if (max_depth < 1) {
    fail(ErrorKind::InvalidParams, "max_depth must be >= 1");
  }
}

double simpson_fixed(const Fn1D& f, double lo, double hi, int panels) {
  if (panels < 1) {
    fail(ErrorKind::InvalidParams, "panels must be >= 1");
  }
  if (lo == hi) return 0.0;
  return simpson_sweep(f, lo, hi, panels, nullptr);
}

double integrate(const Fn1D& f, double lo, double hi,
                 const QuadratureSpec& spec) {
  spec.validate();
  if (!(lo <= hi)) {
    fail(ErrorKind::InvalidParams, "integration bounds must satisfy lo <= hi");
  }
  if (lo == hi) return 0.0;

  int panels = spec.panels;
  double abs_scale = 0.0;
  double prev = simpson_sweep(f, lo, hi, panels, &abs_scale);
  for (int depth = 0; depth < spec.max_depth; ++depth) {
    panels *= 2;
    double cur = simpson_sweep(f, lo, hi, panels, &abs_scale);
    const double scale =
        std::max({std::fabs(cur), std::fabs(prev), abs_scale});
    if (std::fabs(cur - prev) <= spec.refine_tol * scale || scale == 0.0) {
      return cur;
    }
    prev = cur;
  }
  fail(ErrorKind::DepthExceeded,
       "no convergence after " + std::to_string(spec.max_depth) +
           " halvings (tol " + std::to_string(spec.refine_tol) + ")");
}

MonotoneTable cumulative_table(const Fn1D& f, int grid_size, bool normalize) {
  if (grid_size < 2) {
    fail(ErrorKind::InvalidParams, "cumulative grid needs >= 2 nodes");
  }
  MonotoneTable table;
  table.xs.resize(grid_size);
  table.ys.resize(grid_size);
  const int cells = grid_size - 1;
  for (int k = 0; k < grid_size; ++k) {
    table.xs[k] = static_cast<double>(k) / cells;
  }
  table.xs.back() = 1.0;

  auto checked = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
      fail(ErrorKind::NonFinite, "density at x=" + std::to_string(x));
    }
    if (v < 0.0) {
      fail(ErrorKind::NegativeDensity,
           "f(" + std::to_string(x) + ") = " + std::to_string(v));
    }
    return v;
  };

  table.ys[0] = 0.0;
  double f_left = checked(table.xs[0]);
  for (int k = 0; k < cells; ++k) {
    const double a = table.xs[k];
    const double b = table.xs[k + 1];
    const double f_mid = checked(0.5 * (a + b));
    const double f_right = checked(b);
    table.ys[k + 1] =
        table.ys[k] + (b - a) / 6.0 * (f_left + 4.0 * f_mid + f_right);
    f_left = f_right;
  }

  if (table.ys.back() <= 0.0) {
    fail(ErrorKind::DegenerateTable, "cumulative integral is zero");
  }
  if (normalize) {
    const double total = table.ys.back();
    for (double& y : table.ys) y /= total;
    table.ys.back() = 1.0;
  }
  return table;
}

double invert_monotone(const MonotoneTable& table, double y) {
  if (table.xs.size() < 2 || table.xs.size() != table.ys.size()) {
    fail(ErrorKind::DegenerateTable, "table needs >= 2 matched nodes");
  }
  const double total = table.ys.back();
  if (!(y >= 0.0) || y > total) {
    fail(ErrorKind::OutOfRange,
         "y = " + std::to_string(y) + " outside [0, " + std::to_string(total) +
             "]");
  }
  if (y >= total) return table.xs.back();

  // first node strictly above y; the cell left of it brackets y
  auto it = std::upper_bound(table.ys.begin(), table.ys.end(), y);
  const auto k = static_cast<std::size_t>(it - table.ys.begin()) - 1;
  const double y0 = table.ys[k];
  const double y1 = table.ys[k + 1];
  const double t = (y1 > y0) ? (y - y0) / (y1 - y0) : 0.0;
  return table.xs[k] + t * (table.xs[k + 1] - table.xs[k]);
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  // keying the splitmix sequence on an odd multiple of the stream id keeps
  // distinct streams on distinct splitmix trajectories
  std::uint64_t key = seed ^ (0x9E3779B97F4A7C15ULL * (2 * stream_id + 1));
  for (auto& word : state_) word = splitmix64(key);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
    state_[0] = 1;  // all-zero state is the one fixed point to avoid
  }
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (!(lo <= hi)) {
    fail(ErrorKind::InvalidParams, "uniform range must satisfy lo <= hi");
  }
  return lo + (hi - lo) * next_double();
}

double RngStream::normal() {
  // Box-Muller, cosine branch; 1 - u keeps the log argument positive
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace moequant::numerics
