#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "lambda4wm/cli.hpp"
#include "lambda4wm/dataset.hpp"
#include "lambda4wm/sweep.hpp"

using namespace lambda4wm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = fs::path(LAMBDA4WM_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "lambda4wm_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

struct Run {
  int code;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lambda4wm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err, out;
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  const int code = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cerr.rdbuf(old_err);
  std::cout.rdbuf(old_out);
  return {code, err.str() + out.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

fs::path write_config(const std::string& name, const json& cfg) {
  const auto dir = fs::temp_directory_path() / "lambda4wm_test_cli";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << cfg.dump(2);
  return p;
}

const json kAngle = {{"omega_rabi_gamma", 60},   {"delta1_gamma", 140}, {"gamma_c_gamma", 0.2},
                    {"gamma_hz", 6e6},          {"density_cm3", 2.8e12}, {"epsilon_pump", 6.5e-6},
                    {"length_m", 0.012}};

}  // namespace

TEST_CASE("chi writes the documented columns and a manifest") {
  const auto out = scratch("chi");
  const auto r = cli({"chi", "--config", (kConfigs / "baseline.json").string(), "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto csv = slurp(out / "chi.csv");
  CHECK(csv.substr(0, csv.find('\n')) ==
        "delta,re_chi_pp,im_chi_pp,re_chi_cc,im_chi_cc,re_chi_pc,im_chi_pc,re_chi_cp,im_chi_cp");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 402);
  const auto m = load(out / "manifest.json");
  CHECK(m["subcommand"] == "chi");
  CHECK(m["version"] == kVersion);
  CHECK(m["outputs"] == json::array({"chi.csv"}));
  CHECK(m["config"]["omega_rabi_gamma"] == 60);
  CHECK(m["duration_s"].get<double>() >= 0.0);
}

TEST_CASE("outputs are byte-identical across reruns and thread counts") {
  const auto cfg = (kConfigs / "mismatch_map.json").string();
  const auto a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(cli({"gainmap", "--config", cfg, "--out", a.string(), "--threads", "1", "--set",
               "delta_points=40", "--set", "axis_points=30"})
              .code == 0);
  REQUIRE(cli({"gainmap", "--config", cfg, "--out", b.string(), "--threads", "4", "--set",
               "delta_points=40", "--set", "axis_points=30"})
              .code == 0);
  CHECK(slurp(a / "gainmap.csv") == slurp(b / "gainmap.csv"));
  CHECK(slurp(a / "gainmap.json") == slurp(b / "gainmap.json"));

  const auto meta = load(a / "gainmap.json");
  CHECK(meta["axis"] == "dkz_rad_m");
  CHECK(meta["missing_cells"] == 0);
  CHECK(meta["peak_g_c"]["value"].get<double>() > 1.0);
  const auto m = load(a / "manifest.json");
  CHECK(m["config"]["delta_points"] == 40);
  CHECK(m["threads"] == 1);

  const auto c = scratch("det_c");
  setenv("LAMBDA4WM_THREADS", "3", 1);
  REQUIRE(cli({"chi", "--config", (kConfigs / "baseline.json").string(), "--out", c.string()}).code == 0);
  unsetenv("LAMBDA4WM_THREADS");
  CHECK(load(c / "manifest.json")["threads"] == 3);
}

TEST_CASE("propagate, doppler-gain and oracle") {
  const auto cfg = write_config("angle.json", kAngle);
  const auto p = scratch("prop");
  REQUIRE(cli({"propagate", "--config", cfg.string(), "--out", p.string(), "--set", "delta_gamma=-4.8",
               "--set", "theta_deg=0.3"})
              .code == 0);
  const auto j = load(p / "propagate.json");
  CHECK(j["g_p"].get<double>() > 0.0);
  CHECK(j["g_c"].get<double>() > 0.0);

  CHECK(cli({"propagate", "--config", cfg.string(), "--out", p.string(), "--set", "delta_gamma=-4.8",
             "--set", "theta_deg=0.3", "--set", "dkz_rad_m=0"})
            .code == 1);

  const auto d = scratch("dop");
  REQUIRE(cli({"doppler-gain", "--config", cfg.string(), "--out", d.string(), "--set",
               "delta_points=5", "--set", "theta_deg=0.1"})
              .code == 0);
  const auto csv = slurp(d / "doppler_gain.csv");
  CHECK(csv.substr(0, csv.find('\n')) == "delta_gamma,g_p,g_c,g_p_doppler,g_c_doppler");

  const auto o = scratch("oracle");
  REQUIRE(cli({"oracle", "--config", (kConfigs / "baseline.json").string(), "--out", o.string(), "--set",
               "delta_gamma=-5"})
              .code == 0);
  const auto rel = load(o / "oracle.json")["relative_difference"];
  for (const auto& [k, v] : rel.items()) CHECK(v.get<double>() < 1e-6);
}

TEST_CASE("fit reads data relative to the config") {
  const auto data = dataset_from_map(gain_map(build_params(kAngle), linspace(-15, 10, 51),
                                              {AxisKind::theta_deg, linspace(0.0, 1.0, 11)}));
  const auto dir = fs::temp_directory_path() / "lambda4wm_test_cli";
  write_gain_data(data, dir / "gains.csv");
  json cfg = kAngle;
  cfg["omega_rabi_gamma"] = 63;
  cfg["data"] = "gains.csv";
  cfg["free"] = {"omega_rabi"};
  const auto path = write_config("fit.json", cfg);
  const auto out = scratch("fit");
  REQUIRE(cli({"fit", "--config", path.string(), "--out", out.string()}).code == 0);
  const auto j = load(out / "fit.json");
  CHECK(j["status"] == "converged");
  CHECK(j["fitted"]["omega_rabi"].get<double>() == doctest::Approx(60.0).epsilon(1e-6));

  // non-finite model at the start is a numerical failure
  cfg["omega_rabi_gamma"] = 0;
  cfg["free"] = {"density"};
  const auto bad = write_config("fit_bad.json", cfg);
  const auto r = cli({"fit", "--config", bad.string(), "--out", out.string()});
  CHECK(r.code == 2);
}

TEST_CASE("input errors exit with status 1") {
  const auto out = scratch("errors");
  SUBCASE("missing config names the path") {
    const auto r = cli({"chi", "--config", "/nonexistent/cfg.json", "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("/nonexistent/cfg.json") != std::string::npos);
  }
  SUBCASE("unknown subcommand") {
    CHECK(cli({"plot", "--config", "x", "--out", out.string()}).code == 1);
  }
  SUBCASE("unknown key") {
    const auto r = cli({"chi", "--config", (kConfigs / "baseline.json").string(), "--out", out.string(),
                        "--set", "omega=3"});
    CHECK(r.code == 1);
    CHECK(r.err.find("unknown config key 'omega'") != std::string::npos);
  }
  SUBCASE("unwritable output") {
    const auto file = fs::temp_directory_path() / "lambda4wm_test_cli" / "plain_file";
    std::ofstream(file) << "x";
    const auto r = cli({"chi", "--config", (kConfigs / "baseline.json").string(), "--out",
                        (file / "sub").string()});
    CHECK(r.code == 1);
  }
  SUBCASE("missing required parameter") {
    const auto r = cli({"chi", "--config", (kConfigs / "baseline.json").string(), "--out", out.string(),
                        "--set", "gamma_c_gamma=\"x\""});
    CHECK(r.code == 1);
  }
}
