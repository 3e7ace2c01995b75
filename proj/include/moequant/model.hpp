#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "moequant/errors.hpp"
#include "moequant/numerics.hpp"

namespace moequant::model {

// Smooth regression target on [0,1]^dim with an evaluable gradient.
struct TargetFunction {
  int dim = 1;
  std::string name;
  std::function<double(std::span<const double>)> eval_fn;
  std::function<std::vector<double>(std::span<const double>)> grad_fn;
  double fd_step = 0.0;  // > 0 when the gradient is finite-differenced

  double eval(std::span<const double> x) const;
  std::vector<double> grad(std::span<const double> x) const;

  // one-dimensional conveniences
  double eval1(double x) const;
  double deriv1(double x) const;
};

struct TargetSpec {
  std::string name;
  int dim = 1;
  std::vector<double> coefficients;  // custom-polynomial: c0 + c1 x + ...
  std::string table_path;           // tabulated: CSV "x,value"
};

// Registry: linear, quadratic, cosine10pi, cosine-plateau, sum-coords,
// custom-polynomial, tabulated. linear/quadratic act on the first
// coordinate, sum-coords adds all of them.
TargetFunction make_target(const TargetSpec& spec);
TargetFunction make_target(const std::string& name, int dim = 1);

// Probability density on [0,1]^dim plus a sampler driven by an RngStream.
// `axes` is non-empty when the distribution factorizes per coordinate;
// the per-axis marginals then enable tensor-product quadrature.
struct InputDistribution {
  int dim = 1;
  std::string name;
  std::function<double(std::span<const double>)> pdf_fn;
  std::function<void(numerics::RngStream&, std::span<double>)> sample_fn;
  std::vector<InputDistribution> axes;

  double pdf(std::span<const double> x) const;
  double pdf1(double x) const;
  void sample_into(numerics::RngStream& rng, std::span<double> out) const;
  std::vector<double> sample(numerics::RngStream& rng) const;
  bool is_product() const { return dim == 1 || !axes.empty(); }
};

struct DistSpec {
  std::string kind;  // uniform, truncated-gaussian, product-of-1d, custom-tabulated
  int dim = 1;
  double mu = 0.5;  // truncated-gaussian location
  double s = 0.2;   // truncated-gaussian scale
  std::string table_path;
  std::vector<DistSpec> axes;  // product-of-1d
};

// Construction validates normalization: the pdf must integrate to 1 over
// the domain within 1e-6 (checked per axis for products).
InputDistribution make_input_dist(const DistSpec& spec);
InputDistribution make_input_dist(const std::string& kind, int dim = 1);

// Additive observation noise, always zero-mean.
struct NoiseModel {
  enum class Kind { None, UniformRange, Gaussian };

  Kind kind = Kind::None;
  double lo = 0.0;
  double hi = 0.0;
  double sigma = 0.0;

  static NoiseModel none();
  static NoiseModel uniform_range(double lo, double hi);
  static NoiseModel gaussian(double sigma);

  double variance() const;
  bool bounded() const { return kind != Kind::Gaussian; }
  // width of the support; 0 for none, undefined (throws) for gaussian
  double range_size() const;
  double draw(numerics::RngStream& rng) const;
  std::string describe() const;
};

// Row-major sample matrix plus noisy outputs. Keeps the (seed, stream)
// pair used to draw it so exports can reproduce the data.
struct Dataset {
  int dim = 1;
  std::vector<double> inputs;   // size() * dim
  std::vector<double> outputs;  // size()
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  std::size_t size() const { return outputs.size(); }
  std::span<const double> input(std::size_t j) const {
    return {inputs.data() + j * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  double input1(std::size_t j) const { return inputs[j]; }
};

Dataset sample_dataset(const InputDistribution& dist,
                       const TargetFunction& target, const NoiseModel& noise,
                       std::size_t n, numerics::RngStream& rng);

}  // namespace moequant::model
