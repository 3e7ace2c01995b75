#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "moequant/errors.hpp"

namespace moequant::numerics {

using Fn1D = std::function<double(double)>;

// Composite Simpson settings. `panels` is the initial subdivision count;
// refinement doubles it until two consecutive estimates agree to
// `refine_tol` (relative, with the absolute integral as scale floor).
struct QuadratureSpec {
  int panels = 256;
  double refine_tol = 1e-10;
  int max_depth = 20;

  void validate() const;
};

double integrate(const Fn1D& f, double lo, double hi,
                 const QuadratureSpec& spec = {});

// Single composite Simpson pass with a fixed panel count, no refinement.
// Exact for polynomials up to degree 3 on each panel.
double simpson_fixed(const Fn1D& f, double lo, double hi, int panels);

// Sampled cumulative integral F(x) = int_0^x f. xs is a uniform grid on
// [0,1]; ys[k] accumulates per-cell Simpson integrals, so ys is exact for
// piecewise-cubic f. ys[0] == 0 always.
struct MonotoneTable {
  std::vector<double> xs;
  std::vector<double> ys;

  double total() const { return ys.back(); }
};

MonotoneTable cumulative_table(const Fn1D& f, int grid_size,
                               bool normalize = false);

// Inverse lookup x with F(x) = y by bracketing + linear interpolation.
// y == ys.back() returns xs.back() exactly.
double invert_monotone(const MonotoneTable& table, double y);

// Deterministic stream of pseudo-random draws. Distinct (seed, stream_id)
// pairs give decorrelated sequences; equal pairs reproduce bit-identical
// draws on every platform (no libm in the integer path).
//
// Generator: xoshiro256++ with state expanded from (seed, stream_id) via
// splitmix64. Report this name next to any published random output.
class RngStream {
 public:
  static constexpr const char* kAlgorithm = "xoshiro256++/splitmix64";

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  // uniform on [0,1) with 53 random bits
  double next_double();

  double uniform(double lo, double hi);

  // standard normal via Box-Muller; consumes exactly two uniforms
  double normal();

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

}  // namespace moequant::numerics
