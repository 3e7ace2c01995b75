#pragma once

// Shared helpers for the test suite. The oracle integrator here is kept
// deliberately primitive (composite midpoint rule, fixed fine grid) and
// the oracle RNG is std::mt19937_64, so no code path under test is used
// to produce its own expected values.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>

#include "moequant/errors.hpp"

namespace testsupport {

inline double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}

// Composite midpoint rule on a fixed fine grid. Second-order accurate;
// with 2e6 cells the error on the smooth integrands used below is far
// under the tolerances the tests assert.
inline double oracle_integrate(const std::function<double(double)>& f,
                               double lo, double hi,
                               std::size_t cells = 2000000) {
  const double h = (hi - lo) / static_cast<double>(cells);
  double acc = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    acc += f(lo + (static_cast<double>(k) + 0.5) * h);
  }
  return acc * h;
}

// Monte Carlo estimate of the normalized second moment
// int_A ||x-c||^2 dx / (d V^(1+2/d)) of a regular hexagon (d=2), with the
// standard error of the estimate. Circumradius-1 hexagon centered at the
// origin: area 3 sqrt(3) / 2, inside iff |y| <= sqrt(3)/2 and
// |sqrt(3) x| + |y| <= sqrt(3).
struct McValue {
  double value = 0.0;
  double std_error = 0.0;
};

inline McValue hexagon_moment_mc(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  std::uniform_real_distribution<double> uy(-1.0, 1.0);
  const double root3 = std::sqrt(3.0);
  const double box_area = 4.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double x = ux(gen);
    const double y = uy(gen);
    const bool inside =
        std::fabs(y) <= 0.5 * root3 && root3 * std::fabs(x) + std::fabs(y) <= root3;
    const double v = inside ? (x * x + y * y) : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(samples);
  const double var =
      (sum_sq / static_cast<double>(samples) - mean * mean) /
      static_cast<double>(samples - 1) * static_cast<double>(samples);
  const double integral = box_area * mean;
  const double integral_se =
      box_area * std::sqrt(var / static_cast<double>(samples));
  const double area = 1.5 * root3;
  const double denom = 2.0 * area * area;
  return {integral / denom, integral_se / denom};
}

// RAII temp file for the tabulated target / density tests.
class TempFile {
 public:
  explicit TempFile(const std::string& stem, const std::string& contents) {
    path_ = (std::filesystem::temp_directory_path() /
             (stem + "-" + std::to_string(counter_++) + ".csv"))
                .string();
    std::ofstream out(path_);
    out << contents;
  }
  ~TempFile() { std::remove(path_.c_str()); }

  const std::string& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::string path_;
};

// True when fn() throws a moequant::Error of exactly the given kind.
template <typename Fn>
bool throws_kind(Fn&& fn, moequant::ErrorKind kind) {
  try {
    fn();
  } catch (const moequant::Error& e) {
    return e.kind() == kind;
  } catch (...) {
    return false;
  }
  return false;
}

}  // namespace testsupport
