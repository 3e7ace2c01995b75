// moequant: batch experiment driver for the piecewise-constant regression
// library. Subcommands map one-to-one onto library capabilities; every
// output file carries a metadata header so a result can be traced back to
// the exact configuration and seed that produced it.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "moequant/approx1d.hpp"
#include "moequant/density1d.hpp"
#include "moequant/errors.hpp"
#include "moequant/learning.hpp"
#include "moequant/model.hpp"
#include "moequant/multidim.hpp"
#include "moequant/numerics.hpp"
#include "moequant/parallel.hpp"
#include "moequant/version.hpp"

using json = nlohmann::json;
namespace mq = moequant;

namespace {

// ===================== formatting =====================

// full-precision scientific: 17 significant digits, round-trips exactly
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

// ===================== configuration =====================

// Wraps the merged configuration document and remembers every key that
// was filled from a default, so the output metadata can list them.
class Config {
 public:
  explicit Config(json doc) : doc_(std::move(doc)) {}

  const json& doc() const { return doc_; }

  bool has(const std::string& key) const { return doc_.contains(key); }

  template <typename T>
  T get_or(const std::string& key, const T& fallback) {
    if (doc_.contains(key)) {
      return read<T>(doc_, key);
    }
    note_default(key, json(fallback));
    return fallback;
  }

  // nested lookup "object.key" with default tracking
  template <typename T>
  T get_nested_or(const std::string& object, const std::string& key,
                  const T& fallback) {
    if (doc_.contains(object) && doc_[object].contains(key)) {
      return read<T>(doc_[object], key);
    }
    note_default(object + "." + key, json(fallback));
    return fallback;
  }

  const json* section(const std::string& key) const {
    if (!doc_.contains(key)) return nullptr;
    return &doc_.at(key);
  }

  void note_default(const std::string& key, const json& value) {
    defaulted_.push_back(key + "=" + value.dump());
  }

  const std::vector<std::string>& defaulted() const { return defaulted_; }

  std::string hash() const { return "fnv1a-" + hex64(fnv1a(doc_.dump())); }

 private:
  template <typename T>
  static T read(const json& obj, const std::string& key) {
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception& e) {
      mq::fail(mq::ErrorKind::ConfigError,
               "config key '" + key + "': " + e.what());
    }
  }

  json doc_;
  std::vector<std::string> defaulted_;
};

mq::model::TargetFunction target_from(Config& cfg) {
  mq::model::TargetSpec spec;
  spec.name = cfg.get_nested_or<std::string>("target", "name", "cosine10pi");
  spec.dim = cfg.get_nested_or<int>("target", "dim", 1);
  if (const json* t = cfg.section("target"); t != nullptr) {
    if (t->contains("coefficients")) {
      spec.coefficients = t->at("coefficients").get<std::vector<double>>();
    }
    if (t->contains("table")) {
      spec.table_path = t->at("table").get<std::string>();
    }
  }
  return mq::model::make_target(spec);
}

mq::model::InputDistribution dist_from(Config& cfg, int dim) {
  mq::model::DistSpec spec;
  spec.kind = cfg.get_nested_or<std::string>("distribution", "kind", "uniform");
  spec.dim = dim;
  if (spec.kind == "truncated-gaussian") {
    spec.mu = cfg.get_nested_or<double>("distribution", "mu", 0.5);
    spec.s = cfg.get_nested_or<double>("distribution", "s", 0.2);
  }
  if (const json* d = cfg.section("distribution"); d != nullptr) {
    if (d->contains("table")) {
      spec.table_path = d->at("table").get<std::string>();
    }
    if (d->contains("axes")) {
      for (const json& axis : d->at("axes")) {
        mq::model::DistSpec ax;
        ax.kind = axis.value("kind", std::string("uniform"));
        ax.mu = axis.value("mu", 0.5);
        ax.s = axis.value("s", 0.2);
        if (axis.contains("table")) ax.table_path = axis.at("table");
        spec.axes.push_back(std::move(ax));
      }
    }
  }
  return mq::model::make_input_dist(spec);
}

mq::model::NoiseModel noise_from(Config& cfg) {
  const std::string kind =
      cfg.get_nested_or<std::string>("noise", "kind", "uniform");
  if (kind == "none") return mq::model::NoiseModel::none();
  if (kind == "uniform") {
    const double lo = cfg.get_nested_or<double>("noise", "lo", -0.1);
    const double hi = cfg.get_nested_or<double>("noise", "hi", 0.1);
    return mq::model::NoiseModel::uniform_range(lo, hi);
  }
  if (kind == "gaussian") {
    const double sigma = cfg.get_nested_or<double>("noise", "sigma", 0.1);
    return mq::model::NoiseModel::gaussian(sigma);
  }
  mq::fail(mq::ErrorKind::ConfigError, "unknown noise kind '" + kind + "'");
}

// ===================== output =====================

struct OutputTarget {
  std::string path;
  std::string format;  // "csv" or "json"
};

std::string metadata_block(const Config& cfg, const std::string& command,
                           std::uint64_t seed) {
  std::ostringstream out;
  out << "# moequant " << mq::kVersion << "\n";
  out << "# command: " << command << "\n";
  out << "# config-hash: " << cfg.hash() << "\n";
  out << "# seed: " << seed << "\n";
  out << "# rng: " << mq::numerics::RngStream::kAlgorithm << "\n";
  out << "# defaulted:";
  if (cfg.defaulted().empty()) {
    out << " none";
  } else {
    for (const std::string& d : cfg.defaulted()) out << " " << d << ";";
  }
  out << "\n";
  return out.str();
}

json metadata_json(const Config& cfg, const std::string& command,
                   std::uint64_t seed) {
  return json{{"version", mq::kVersion},
              {"command", command},
              {"config_hash", cfg.hash()},
              {"seed", seed},
              {"rng", mq::numerics::RngStream::kAlgorithm},
              {"defaulted", cfg.defaulted()}};
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    mq::fail(mq::ErrorKind::ConfigError, "cannot open output file " + path);
  }
  out << contents;
  if (!out) {
    mq::fail(mq::ErrorKind::ConfigError, "failed writing " + path);
  }
}

// rows as already-formatted cells; header names the columns
void write_table(const OutputTarget& out, const Config& cfg,
                 const std::string& command, std::uint64_t seed,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows) {
  if (out.format == "json") {
    json arr = json::array();
    for (const auto& row : rows) {
      json obj;
      for (std::size_t c = 0; c < columns.size(); ++c) {
        obj[columns[c]] = row[c];
      }
      arr.push_back(std::move(obj));
    }
    const json doc = {{"meta", metadata_json(cfg, command, seed)},
                      {"rows", std::move(arr)}};
    write_file(out.path, doc.dump(2) + "\n");
    return;
  }
  std::ostringstream text;
  text << metadata_block(cfg, command, seed);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    text << (c == 0 ? "" : ",") << columns[c];
  }
  text << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      text << (c == 0 ? "" : ",") << row[c];
    }
    text << "\n";
  }
  write_file(out.path, text.str());
}

void write_report(const OutputTarget& out, const Config& cfg,
                  const std::string& command, std::uint64_t seed,
                  const json& body) {
  if (out.format != "json") {
    mq::fail(mq::ErrorKind::ConfigError,
             command + " emits a json report; pass --format json");
  }
  const json doc = {{"meta", metadata_json(cfg, command, seed)},
                    {"report", body}};
  write_file(out.path, doc.dump(2) + "\n");
}

std::string sibling_path(const std::string& path, const std::string& tag) {
  const std::filesystem::path p(path);
  std::filesystem::path q = p.parent_path() / p.stem();
  return q.string() + "_" + tag + p.extension().string();
}

// ===================== shared experiment pieces =====================

mq::density1d::Segmentation1D build_segmentation(
    Config& cfg, int m, const mq::model::TargetFunction& target,
    const mq::model::InputDistribution& dist, const std::string& fallback) {
  const std::string kind =
      cfg.get_or<std::string>("segmentation", fallback);
  if (kind == "uniform") {
    return mq::density1d::uniform_segmentation(m);
  }
  if (kind == "optimal") {
    mq::density1d::DensityOptions opts;
    opts.eps = cfg.get_or<double>("eps", 1e-16);
    opts.grid_size = cfg.get_or<int>("grid_size", 10001);
    const mq::density1d::DensityFn lambda =
        mq::density1d::optimal_density_1d(target, dist, opts);
    return mq::density1d::segmentation_from_density(lambda, m);
  }
  mq::fail(mq::ErrorKind::ConfigError,
           "segmentation must be 'uniform' or 'optimal', got '" + kind + "'");
}

// ===================== subcommands =====================

int run_density(Config& cfg, const OutputTarget& out, std::uint64_t seed) {
  const auto target = target_from(cfg);
  const auto dist = dist_from(cfg, 1);
  const int m = cfg.get_or<int>("m", 10);
  const std::string which = cfg.get_or<std::string>("density", "optimal");
  mq::density1d::DensityOptions opts;
  opts.eps = cfg.get_or<double>("eps", 1e-16);
  opts.grid_size = cfg.get_or<int>("grid_size", 10001);

  mq::density1d::DensityFn lambda;
  if (which == "optimal") {
    lambda = mq::density1d::optimal_density_1d(target, dist, opts);
  } else if (which == "quantizer") {
    lambda = mq::density1d::quantizer_density(dist, opts);
  } else {
    mq::fail(mq::ErrorKind::ConfigError,
             "density must be 'optimal' or 'quantizer', got '" + which + "'");
  }
  const mq::density1d::Segmentation1D seg =
      mq::density1d::segmentation_from_density(lambda, m);

  const int points = cfg.get_or<int>("export_points", 1001);
  if (points < 2) {
    mq::fail(mq::ErrorKind::ConfigError, "export_points must be >= 2");
  }
  std::vector<std::vector<std::string>> density_rows;
  density_rows.reserve(points);
  for (int k = 0; k < points; ++k) {
    const double x = static_cast<double>(k) / (points - 1);
    density_rows.push_back({fmt(x), fmt(lambda.eval(x))});
  }
  std::vector<std::vector<std::string>> seg_rows;
  for (int i = 0; i <= m; ++i) {
    seg_rows.push_back({std::to_string(i), fmt(seg.breakpoints[i])});
  }

  if (out.format == "json") {
    json body;
    body["density"] = json::array();
    for (auto& row : density_rows) {
      body["density"].push_back({{"x", row[0]}, {"lambda", row[1]}});
    }
    body["segmentation"] = json::array();
    for (auto& row : seg_rows) {
      body["segmentation"].push_back({{"i", row[0]}, {"a_i", row[1]}});
    }
    body["floor_applied"] = lambda.floor_applied;
    const json doc = {{"meta", metadata_json(cfg, "density", seed)},
                      {"report", body}};
    write_file(out.path, doc.dump(2) + "\n");
    return 0;
  }
  write_table(out, cfg, "density", seed, {"x", "lambda"}, density_rows);
  OutputTarget seg_out{sibling_path(out.path, "segments"), "csv"};
  write_table(seg_out, cfg, "density", seed, {"i", "a_i"}, seg_rows);
  return 0;
}

int run_segment(Config& cfg, const OutputTarget& out, std::uint64_t seed) {
  const auto target = target_from(cfg);
  const auto dist = dist_from(cfg, 1);
  const int m = cfg.get_or<int>("m", 10);
  const mq::density1d::Segmentation1D seg =
      build_segmentation(cfg, m, target, dist, "optimal");
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i <= m; ++i) {
    rows.push_back({std::to_string(i), fmt(seg.breakpoints[i])});
  }
  write_table(out, cfg, "segment", seed, {"i", "a_i"}, rows);
  return 0;
}

int run_approx_error(Config& cfg, const OutputTarget& out,
                     std::uint64_t seed) {
  const auto target = target_from(cfg);
  const auto dist = dist_from(cfg, 1);
  const auto noise = noise_from(cfg);
  const double sigma2 = noise.variance();
  const std::vector<int> m_grid = cfg.get_or<std::vector<int>>(
      "m_grid", std::vector<int>{2, 4, 6, 8, 10, 12});
  const int test_samples = cfg.get_or<int>("test_samples", 5000);
  const std::string seg_kind = cfg.get_or<std::string>("segmentation", "optimal");
  mq::density1d::DensityOptions dopts;
  dopts.eps = cfg.get_or<double>("eps", 1e-16);
  dopts.grid_size = cfg.get_or<int>("grid_size", 10001);
  if (test_samples < 1) {
    mq::fail(mq::ErrorKind::ConfigError, "test_samples must be >= 1");
  }

  struct Row {
    double empirical = 0.0;
    double theoretical = 0.0;
  };
  std::vector<Row> results(m_grid.size());
  mq::parallel_for(m_grid.size(), [&](std::size_t k) {
    const int m = m_grid[k];
    mq::density1d::Segmentation1D seg;
    double theory = 0.0;
    if (seg_kind == "optimal") {
      const auto lambda = mq::density1d::optimal_density_1d(target, dist, dopts);
      seg = mq::density1d::segmentation_from_density(lambda, m);
      theory = mq::approx1d::optimal_error_1d(m, target, dist, sigma2, dopts)
                   .total;
    } else if (seg_kind == "uniform") {
      seg = mq::density1d::uniform_segmentation(m);
      const auto flat =
          mq::density1d::density_from_function([](double) { return 1.0; });
      theory =
          mq::approx1d::test_error_integral_1d(flat, m, target, dist, sigma2)
              .total;
    } else {
      mq::fail(mq::ErrorKind::ConfigError,
               "segmentation must be 'uniform' or 'optimal'");
    }
    mq::approx1d::MoEModel1D moe;
    moe.segmentation = seg;
    moe.constants = mq::approx1d::optimal_constants_1d(seg, target, dist);
    moe.provenance = "optimal-exact";

    // fresh draws, one stream per grid point
    mq::numerics::RngStream rng(seed, static_cast<std::uint64_t>(m));
    double sum = 0.0;
    std::vector<double> x(1);
    for (int s = 0; s < test_samples; ++s) {
      dist.sample_into(rng, x);
      const double y = target.eval(x) + noise.draw(rng);
      const double r = y - moe.predict(x[0]);
      sum += r * r;
    }
    results[k] = {sum / test_samples, theory};
  });

  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < m_grid.size(); ++k) {
    rows.push_back({std::to_string(m_grid[k]), fmt(results[k].empirical),
                    fmt(results[k].theoretical)});
  }
  write_table(out, cfg, "approx-error", seed, {"m", "empirical", "theoretical"},
              rows);
  return 0;
}

int run_learn(Config& cfg, const OutputTarget& out, std::uint64_t seed) {
  const auto target = target_from(cfg);
  const auto dist = dist_from(cfg, 1);
  const auto noise = noise_from(cfg);
  const int m = cfg.get_or<int>("m", 10);
  const std::size_t n = cfg.get_or<std::size_t>("n", 500);
  const mq::density1d::Segmentation1D seg =
      build_segmentation(cfg, m, target, dist, "uniform");
  const std::string mode = cfg.get_or<std::string>("mode", "fit");

  if (mode == "bound-check") {
    mq::learning::BoundCheckConfig bc;
    bc.segmentation = seg;
    bc.target = target;
    bc.dist = dist;
    bc.noise = noise;
    bc.n = n;
    bc.gamma = cfg.get_or<double>("gamma", 3.0);
    bc.delta = cfg.get_or<double>("delta", 1e-3);
    bc.repeats = cfg.get_or<std::size_t>("repeats", 1000);
    bc.seed = seed;
    const mq::learning::BoundCheckReport report =
        mq::learning::empirical_bound_check(bc);
    json per_region = json::array();
    for (const auto& s : report.per_region) {
      per_region.push_back({{"rho", s.rho},
                            {"violations", s.radius_violations},
                            {"radius", s.radius},
                            {"chernoff_n", s.chernoff_n}});
    }
    write_report(out, cfg, "learn", seed,
                 json{{"gamma", report.gamma},
                      {"delta_tilde", report.delta},
                      {"n", report.n},
                      {"m", report.m},
                      {"repeats", report.repeats},
                      {"per_region", std::move(per_region)},
                      {"estimation_violations", report.estimation_violations},
                      {"bound", report.estimation_bound_value}});
    return 0;
  }
  if (mode != "fit") {
    mq::fail(mq::ErrorKind::ConfigError,
             "mode must be 'fit' or 'bound-check', got '" + mode + "'");
  }

  mq::numerics::RngStream rng(seed, 0);
  const mq::model::Dataset data =
      mq::model::sample_dataset(dist, target, noise, n, rng);
  const mq::learning::LearnedMoE learned =
      mq::learning::fit_constants(seg, data);
  const mq::learning::DecompositionReport dec =
      mq::learning::decompose(learned, target, dist, noise.variance());
  const std::vector<double> opt =
      mq::approx1d::optimal_constants_1d(seg, target, dist);

  json per_region = json::array();
  for (int i = 0; i < m; ++i) {
    per_region.push_back({{"rho", dec.region_masses[i]},
                          {"count", learned.counts.counts[i]},
                          {"constant", learned.moe.constants[i]},
                          {"opt_constant", opt[i]}});
  }
  write_report(out, cfg, "learn", seed,
               json{{"m", m},
                    {"n", n},
                    {"test_error", dec.test_error},
                    {"approximation_error", dec.approximation_error},
                    {"estimation_error", dec.estimation_error},
                    {"empty_regions", learned.counts.empty_regions},
                    {"fallback_value", learned.fallback_value},
                    {"per_region", std::move(per_region)}});
  return 0;
}

int run_tradeoff(Config& cfg, const OutputTarget& out, std::uint64_t seed) {
  const auto target = target_from(cfg);
  const auto dist = dist_from(cfg, 1);
  const auto noise = noise_from(cfg);
  const double sigma2 = noise.variance();

  std::vector<int> m_grid;
  if (cfg.has("m_grid")) {
    m_grid = cfg.get_or<std::vector<int>>("m_grid", {});
  } else {
    for (int m = 2; m <= 120; ++m) m_grid.push_back(m);
    cfg.note_default("m_grid", "2..120");
  }
  const std::vector<std::size_t> n_list = cfg.get_or<std::vector<std::size_t>>(
      "n_list", std::vector<std::size_t>{50, 200, 800});
  const std::size_t repeats = cfg.get_or<std::size_t>("repeats", 300);
  if (m_grid.empty() || n_list.empty() || repeats < 1) {
    mq::fail(mq::ErrorKind::ConfigError,
             "tradeoff needs nonempty m_grid, n_list and repeats >= 1");
  }
  const std::string seg_kind = cfg.get_or<std::string>("segmentation", "uniform");

  // Mean test error of the fitted model, averaged over repeats. Per m the
  // segment masses, best constants and approximation error are integrals
  // that do not depend on the draw, so they are computed once; each repeat
  // then only needs the fitted constants and the mass-weighted gap sum.
  struct Cell {
    double mean = 0.0;
  };
  std::vector<Cell> cells(m_grid.size() * n_list.size());

  struct PerM {
    mq::density1d::Segmentation1D seg;
    std::vector<double> rho;
    std::vector<double> opt;
    double app_excess = 0.0;
  };
  std::vector<PerM> per_m(m_grid.size());
  mq::parallel_for(m_grid.size(), [&](std::size_t k) {
    PerM& slot = per_m[k];
    slot.seg = build_segmentation(cfg, m_grid[k], target, dist, seg_kind);
    slot.rho = mq::learning::region_mass(slot.seg, dist);
    slot.opt = mq::approx1d::optimal_constants_1d(slot.seg, target, dist);
    mq::approx1d::MoEModel1D best;
    best.segmentation = slot.seg;
    best.constants = slot.opt;
    slot.app_excess =
        mq::approx1d::test_error_exact_1d(best, target, dist, 0.0).excess;
  });

  mq::parallel_for(cells.size(), [&](std::size_t cell_idx) {
    const std::size_t k = cell_idx % m_grid.size();
    const std::size_t j = cell_idx / m_grid.size();
    const PerM& pm = per_m[k];
    const int m = m_grid[k];
    const std::size_t n = n_list[j];
    double acc = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      // one stream per (cell, repeat): reduction order is fixed below
      mq::numerics::RngStream rng(seed, cell_idx * repeats + r + 1);
      const mq::model::Dataset data =
          mq::model::sample_dataset(dist, target, noise, n, rng);
      const mq::learning::LearnedMoE learned =
          mq::learning::fit_constants(pm.seg, data);
      double est = 0.0;
      for (int i = 0; i < m; ++i) {
        const double gap = learned.moe.constants[i] - pm.opt[i];
        est += gap * gap * pm.rho[i];
      }
      acc += sigma2 + pm.app_excess + est;
    }
    cells[cell_idx].mean = acc / static_cast<double>(repeats);
  });

  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    for (std::size_t k = 0; k < m_grid.size(); ++k) {
      rows.push_back({std::to_string(m_grid[k]), std::to_string(n_list[j]),
                      fmt(cells[j * m_grid.size() + k].mean)});
    }
  }
  write_table(out, cfg, "tradeoff", seed, {"m", "n", "mean_test_error"}, rows);
  return 0;
}

int run_quantizer(Config& cfg, const OutputTarget& out, std::uint64_t seed) {
  const auto dist = dist_from(cfg, 1);
  const int m = cfg.get_or<int>("m", 10);
  const double distortion = mq::approx1d::quantizer_error_optimal(m, dist);
  if (out.format == "json") {
    write_report(out, cfg, "quantizer", seed,
                 json{{"m", m}, {"distortion", distortion}});
    return 0;
  }
  write_table(out, cfg, "quantizer", seed, {"m", "distortion"},
              {{std::to_string(m), fmt(distortion)}});
  return 0;
}

int run_mdbound(Config& cfg, const OutputTarget& out, std::uint64_t seed) {
  const int d = cfg.get_or<int>("d", 2);
  if (d < 1) {
    mq::fail(mq::ErrorKind::ConfigError, "d must be >= 1");
  }
  mq::model::TargetSpec tspec;
  tspec.name = cfg.get_nested_or<std::string>("target", "name", "sum-coords");
  tspec.dim = d;
  const auto target = mq::model::make_target(tspec);
  const auto dist = dist_from(cfg, d);
  const auto noise = noise_from(cfg);
  const double sigma2 = noise.variance();

  const std::vector<int> counts =
      cfg.get_or<std::vector<int>>("counts", std::vector<int>(d, 4));
  if (static_cast<int>(counts.size()) != d) {
    mq::fail(mq::ErrorKind::ConfigError, "counts needs one entry per axis");
  }
  const auto grid = mq::multidim::grid_segmentation(counts);
  const int m = grid.region_count();
  const double m_opt =
      cfg.get_or<double>("m_opt", mq::multidim::optimal_inertia_constant(d));

  const double bound_sum =
      mq::multidim::error_bound_sum_md(grid, target, dist, sigma2);
  const double bound_min =
      mq::multidim::min_bound_md(m, d, m_opt, target, dist, sigma2,
                                 cfg.get_or<double>("eps", 1e-16));

  const int test_samples = cfg.get_or<int>("test_samples", 200000);
  const std::vector<double> constants =
      mq::multidim::optimal_constants_md(grid, target, dist);
  mq::numerics::RngStream rng(seed, 1);
  const mq::multidim::McEstimate mc = mq::multidim::test_error_md_mc(
      grid, constants, target, dist, noise, test_samples, rng);

  write_report(out, cfg, "mdbound", seed,
               json{{"d", d},
                    {"m", m},
                    {"m_opt", m_opt},
                    {"sigma2", sigma2},
                    {"bound_sum", bound_sum},
                    {"bound_min", bound_min},
                    {"mc_estimate", mc.mean},
                    {"mc_stderr", mc.std_error},
                    {"mc_samples", mc.samples}});
  return 0;
}

// ===================== driver =====================

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    mq::fail(mq::ErrorKind::ConfigError, "cannot open config file " + path);
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    mq::fail(mq::ErrorKind::ConfigError,
             "config file " + path + " is not valid json: " + e.what());
  }
  if (!doc.is_object()) {
    mq::fail(mq::ErrorKind::ConfigError,
             "config root must be a json object: " + path);
  }
  return doc;
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "json configuration file; flags override its keys");
  cmd->add_option("--seed", flags.seed, "rng seed (overrides config)");
  cmd->add_option("--out", flags.out_path, "output file path");
  cmd->add_option("--format", flags.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

int dispatch(const std::string& command, CommonFlags& flags) {
  json doc = flags.config_path.empty() ? json::object()
                                       : load_config_file(flags.config_path);
  if (flags.seed) doc["seed"] = *flags.seed;
  if (!flags.out_path.empty()) doc["out"] = flags.out_path;
  if (!flags.format.empty()) doc["format"] = flags.format;

  Config cfg(std::move(doc));
  const std::uint64_t seed = cfg.get_or<std::uint64_t>("seed", 1);

  const bool json_by_default = (command == "learn" || command == "mdbound");
  OutputTarget out;
  out.format = cfg.get_or<std::string>("format",
                                       json_by_default ? "json" : "csv");
  if (out.format != "csv" && out.format != "json") {
    mq::fail(mq::ErrorKind::ConfigError,
             "format must be 'csv' or 'json', got '" + out.format + "'");
  }
  out.path = cfg.get_or<std::string>("out", command + "." + out.format);

  if (command == "density") return run_density(cfg, out, seed);
  if (command == "segment") return run_segment(cfg, out, seed);
  if (command == "approx-error") return run_approx_error(cfg, out, seed);
  if (command == "learn") return run_learn(cfg, out, seed);
  if (command == "tradeoff") return run_tradeoff(cfg, out, seed);
  if (command == "quantizer") return run_quantizer(cfg, out, seed);
  if (command == "mdbound") return run_mdbound(cfg, out, seed);
  mq::fail(mq::ErrorKind::ConfigError, "unknown command " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise-constant regression experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("moequant ") + mq::kVersion);

  const std::vector<std::string> commands = {
      "density", "segment", "approx-error", "learn",
      "tradeoff", "quantizer", "mdbound"};
  const std::vector<std::string> blurbs = {
      "export a segment density curve and its segmentation",
      "export segmentation breakpoints",
      "theory vs empirical test error over an m grid",
      "fit constants on one dataset, or run a repeated bound check",
      "mean test error over (m, n) grid, repeats averaged",
      "optimal scalar quantizer distortion",
      "multidimensional error bounds vs Monte Carlo"};
  std::vector<CommonFlags> flags(commands.size());
  for (std::size_t k = 0; k < commands.size(); ++k) {
    CLI::App* cmd = app.add_subcommand(commands[k], blurbs[k]);
    add_common_flags(cmd, flags[k]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit clean, bad usage is config
  }

  for (std::size_t k = 0; k < commands.size(); ++k) {
    if (!app.get_subcommand(commands[k])->parsed()) continue;
    try {
      return dispatch(commands[k], flags[k]);
    } catch (const mq::Error& e) {
      std::cerr << "error (" << mq::to_string(e.kind()) << "): " << e.what()
                << "\n";
      return mq::is_config_error(e.kind()) ? 2 : 3;
    } catch (const json::exception& e) {
      std::cerr << "error (config): " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
  }
  return 2;
}
