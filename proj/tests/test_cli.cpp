// End-to-end checks of the command line tool. Each case spawns the real
// binary, so these cover flag parsing, config merging, exit codes and the
// output file contracts rather than library math (the module tests own
// that).

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "support.hpp"

#ifndef CLI_BINARY_PATH
#error "CLI_BINARY_PATH must point at the moequant binary"
#endif

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("moequant_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

// runs the binary through the shell; env_prefix lets a case pin
// MOEQUANT_THREADS
int run_cli(const std::string& args, const std::string& env_prefix = "") {
  const fs::path log = work_dir() / "last_run.log";
  std::string cmd = env_prefix.empty() ? std::string() : env_prefix + " ";
  cmd += std::string(CLI_BINARY_PATH) + " " + args + " > " + log.string() +
         " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

// non-comment lines after the column header, split on commas
std::vector<std::vector<std::string>> data_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string column_header(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') return line;
  }
  return "";
}

fs::path write_config(const std::string& name, const nlohmann::json& doc) {
  const fs::path path = work_dir() / name;
  write_text(path, doc.dump(2) + "\n");
  return path;
}

}  // namespace

TEST_CASE("cli: help, version and usage errors") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("density --help") == 0);
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("density --bogus-flag") == 2);
  CHECK(run_cli("density --config /no/such/file.json") == 2);
  CHECK(run_cli("segment --format yaml") == 2);
}

TEST_CASE("cli: segment emits flat-density breakpoints for linear target") {
  const fs::path cfg = write_config(
      "segment_linear.json",
      nlohmann::json{{"target", {{"name", "linear"}}}, {"m", 4}});
  const fs::path out = work_dir() / "seg_linear.csv";
  REQUIRE(run_cli("segment --config " + cfg.string() + " --out " +
                  out.string() + " --seed 3") == 0);
  const std::string text = slurp(out);
  CHECK(column_header(text) == "i,a_i");
  const auto rows = data_rows(text);
  REQUIRE(rows.size() == 5);
  for (int i = 0; i <= 4; ++i) {
    CHECK(rows[i][0] == std::to_string(i));
    CHECK(std::fabs(std::strtod(rows[i][1].c_str(), nullptr) - 0.25 * i) <
          1e-9);
  }
}

TEST_CASE("cli: density output carries the metadata header block") {
  const fs::path cfg = write_config(
      "density_meta.json",
      nlohmann::json{{"target", {{"name", "cosine10pi"}}},
                     {"distribution", {{"kind", "truncated-gaussian"}}},
                     {"m", 20}});
  const fs::path out = work_dir() / "density_meta.csv";
  REQUIRE(run_cli("density --config " + cfg.string() + " --out " +
                  out.string() + " --seed 9") == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("# moequant ", 0) == 0);
  CHECK(text.find("# command: density") != std::string::npos);
  CHECK(text.find("# config-hash: fnv1a-") != std::string::npos);
  CHECK(text.find("# seed: 9") != std::string::npos);
  CHECK(text.find("# rng: xoshiro256++/splitmix64") != std::string::npos);
  // unset parameters are recorded with the values that were filled in
  CHECK(text.find("distribution.mu=0.5") != std::string::npos);
  CHECK(text.find("distribution.s=0.2") != std::string::npos);
  CHECK(text.find("eps=1e-16") != std::string::npos);
  CHECK(column_header(text) == "x,lambda");
  REQUIRE(data_rows(text).size() == 1001);

  const fs::path seg_out = work_dir() / "density_meta_segments.csv";
  const std::string seg_text = slurp(seg_out);
  CHECK(column_header(seg_text) == "i,a_i");
  CHECK(data_rows(seg_text).size() == 21);
}

TEST_CASE("cli: identical config and seed reproduce files byte for byte") {
  const fs::path cfg = write_config(
      "repro.json", nlohmann::json{{"target", {{"name", "cosine10pi"}}},
                                   {"m", 12},
                                   {"export_points", 301}});
  const fs::path out = work_dir() / "repro.csv";
  REQUIRE(run_cli("density --config " + cfg.string() + " --out " +
                  out.string() + " --seed 42") == 0);
  const std::string first = slurp(out);
  REQUIRE(run_cli("density --config " + cfg.string() + " --out " +
                  out.string() + " --seed 42") == 0);
  CHECK(first == slurp(out));
}

TEST_CASE("cli: tradeoff output does not depend on the thread count") {
  const fs::path cfg = write_config(
      "tradeoff_small.json",
      nlohmann::json{{"m_grid", {2, 3, 5}},
                     {"n_list", {20}},
                     {"repeats", 4}});
  const fs::path out = work_dir() / "tradeoff_small.csv";
  REQUIRE(run_cli("tradeoff --config " + cfg.string() + " --out " +
                      out.string() + " --seed 11",
                  "MOEQUANT_THREADS=1") == 0);
  const std::string serial = slurp(out);
  REQUIRE(run_cli("tradeoff --config " + cfg.string() + " --out " +
                      out.string() + " --seed 11",
                  "MOEQUANT_THREADS=4") == 0);
  CHECK(serial == slurp(out));
  CHECK(column_header(serial) == "m,n,mean_test_error");
  CHECK(data_rows(serial).size() == 3);
}

TEST_CASE("cli: quantizer distortion for uniform input is 1/(12 m^2)") {
  const fs::path out = work_dir() / "quantizer.csv";
  REQUIRE(run_cli("quantizer --out " + out.string() + " --seed 1") == 0);
  const auto rows = data_rows(slurp(out));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0][0] == "10");
  const double value = std::strtod(rows[0][1].c_str(), nullptr);
  CHECK(testsupport::rel_err(value, 1.0 / 1200.0) < 1e-9);
}

TEST_CASE("cli: learn fit report is valid json with an exact split") {
  const fs::path cfg = write_config(
      "learn_fit.json",
      nlohmann::json{{"target", {{"name", "cosine10pi"}}},
                     {"m", 5},
                     {"n", 300},
                     {"segmentation", "uniform"},
                     {"noise", {{"kind", "uniform"}, {"lo", -0.1}, {"hi", 0.1}}}});
  const fs::path out = work_dir() / "learn_fit.json";
  REQUIRE(run_cli("learn --config " + cfg.string() + " --out " + out.string() +
                  " --seed 4") == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(out));
  CHECK(doc.at("meta").at("command") == "learn");
  CHECK(doc.at("meta").at("rng") == "xoshiro256++/splitmix64");
  const nlohmann::json& rep = doc.at("report");
  const double test = rep.at("test_error").get<double>();
  const double app = rep.at("approximation_error").get<double>();
  const double est = rep.at("estimation_error").get<double>();
  CHECK(std::fabs(test - (app + est)) < 1e-10);
  CHECK(est >= 0.0);
  REQUIRE(rep.at("per_region").size() == 5);
  for (const auto& region : rep.at("per_region")) {
    CHECK(region.contains("rho"));
    CHECK(region.contains("count"));
    CHECK(region.contains("constant"));
    CHECK(region.contains("opt_constant"));
  }
}

TEST_CASE("cli: learn bound-check report has the contract shape") {
  const fs::path cfg = write_config(
      "learn_bc.json",
      nlohmann::json{{"target", {{"name", "cosine10pi"}}},
                     {"m", 3},
                     {"n", 400},
                     {"segmentation", "uniform"},
                     {"mode", "bound-check"},
                     {"gamma", 3.0},
                     {"delta", 0.01},
                     {"repeats", 30},
                     {"noise", {{"kind", "uniform"}, {"lo", -0.1}, {"hi", 0.1}}}});
  const fs::path out = work_dir() / "learn_bc.json";
  REQUIRE(run_cli("learn --config " + cfg.string() + " --out " + out.string() +
                  " --seed 6") == 0);
  const nlohmann::json rep =
      nlohmann::json::parse(slurp(out)).at("report");
  CHECK(rep.at("gamma").get<double>() == 3.0);
  CHECK(rep.at("delta_tilde").get<double>() == 0.01);
  CHECK(rep.at("n").get<std::size_t>() == 400);
  CHECK(rep.at("m").get<int>() == 3);
  CHECK(rep.at("repeats").get<std::size_t>() == 30);
  CHECK(rep.contains("estimation_violations"));
  CHECK(rep.at("bound").get<double>() > 0.0);
  REQUIRE(rep.at("per_region").size() == 3);
  double mass = 0.0;
  for (const auto& region : rep.at("per_region")) {
    CHECK(region.at("radius").get<double>() > 0.0);
    CHECK(region.contains("violations"));
    mass += region.at("rho").get<double>();
  }
  CHECK(std::fabs(mass - 1.0) < 1e-9);
}

TEST_CASE("cli: mdbound report reproduces the separable-target bound") {
  const fs::path cfg = write_config(
      "mdbound.json", nlohmann::json{{"d", 2},
                                     {"counts", {4, 4}},
                                     {"noise", {{"kind", "none"}}},
                                     {"test_samples", 50000}});
  const fs::path out = work_dir() / "mdbound.json";
  REQUIRE(run_cli("mdbound --config " + cfg.string() + " --out " +
                  out.string() + " --seed 7") == 0);
  const nlohmann::json rep =
      nlohmann::json::parse(slurp(out)).at("report");
  CHECK(rep.at("m").get<int>() == 16);
  CHECK(testsupport::rel_err(rep.at("bound_sum").get<double>(), 1.0 / 48.0) <
        1e-9);
  CHECK(testsupport::rel_err(rep.at("m_opt").get<double>(),
                             0.08018753738744802) < 1e-12);
  const double mc = rep.at("mc_estimate").get<double>();
  const double se = rep.at("mc_stderr").get<double>();
  CHECK(mc <= rep.at("bound_sum").get<double>() + 4.0 * se);
  CHECK(mc > 0.0);
}

TEST_CASE("cli: config and numerical failures map to distinct exit codes") {
  const fs::path bad_target = write_config(
      "bad_target.json", nlohmann::json{{"target", {{"name", "warble"}}}});
  CHECK(run_cli("segment --config " + bad_target.string()) == 2);

  const fs::path gaussian_bc = write_config(
      "gaussian_bc.json",
      nlohmann::json{{"mode", "bound-check"},
                     {"m", 3},
                     {"repeats", 5},
                     {"noise", {{"kind", "gaussian"}, {"sigma", 0.1}}}});
  CHECK(run_cli("learn --config " + gaussian_bc.string()) == 2);

  // a tabulated pdf that integrates to 1/2 fails normalization: that is a
  // numerical rejection, not a parse problem
  std::ostringstream table;
  table << "x,y\n";
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    table << x << "," << x << "\n";
  }
  const fs::path table_path = work_dir() / "halfmass.csv";
  write_text(table_path, table.str());
  const fs::path bad_pdf = write_config(
      "bad_pdf.json",
      nlohmann::json{{"distribution",
                      {{"kind", "custom-tabulated"},
                       {"table", table_path.string()}}}});
  CHECK(run_cli("quantizer --config " + bad_pdf.string()) == 3);

  const fs::path bad_counts = write_config(
      "bad_counts.json", nlohmann::json{{"d", 2}, {"counts", {2}}});
  CHECK(run_cli("mdbound --config " + bad_counts.string()) == 2);
}

TEST_CASE("cli: table commands honor --format json") {
  const fs::path cfg = write_config(
      "approx_json.json", nlohmann::json{{"m_grid", {2, 4}},
                                         {"test_samples", 200}});
  const fs::path out = work_dir() / "approx.json";
  REQUIRE(run_cli("approx-error --config " + cfg.string() + " --out " +
                  out.string() + " --seed 2 --format json") == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(out));
  CHECK(doc.at("meta").at("config_hash").get<std::string>().rfind("fnv1a-",
                                                                  0) == 0);
  REQUIRE(doc.at("rows").size() == 2);
  CHECK(doc.at("rows")[0].at("m") == "2");
  CHECK(doc.at("rows")[0].contains("empirical"));
  CHECK(doc.at("rows")[0].contains("theoretical"));
}
