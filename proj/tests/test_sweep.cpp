#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lambda4wm/dataset.hpp"
#include "lambda4wm/errors.hpp"
#include "lambda4wm/propagation.hpp"
#include "lambda4wm/sweep.hpp"

using namespace lambda4wm;
namespace fs = std::filesystem;

namespace {

ModelParams mismatch_params() {
  return build_params({{"omega_rabi_gamma", 60},
                       {"delta1_gamma", 140},
                       {"gamma_c_gamma", 0.5},
                       {"density_cm3", 3e12},
                       {"length_m", 0.0125}});
}

ModelParams angle_params() {
  return build_params({{"omega_rabi_gamma", 60},
                       {"delta1_gamma", 140},
                       {"gamma_c_gamma", 0.2},
                       {"density_cm3", 2.8e12},
                       {"epsilon_pump", 6.5e-6},
                       {"length_m", 0.012}});
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "lambda4wm_test_sweep";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string load_error(const fs::path& p) {
  try {
    load_gain_data(p);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("1x1 map equals a direct solve") {
  const auto p = angle_params();
  const auto m = gain_map(p, {-4.5}, {AxisKind::theta_deg, {0.35}});
  const auto f = solve_twin_beam(p, -4.5, deg_to_rad(0.35));
  CHECK(m.gp(0, 0) == f.g_p);
  CHECK(m.gc(0, 0) == f.g_c);

  const auto md = gain_map(p, {-4.5}, {AxisKind::dkz, {700.0}});
  const auto fd = solve_twin_beam_dkz(p, -4.5, 700.0);
  CHECK(md.gp(0, 0) == fd.g_p);
  CHECK(md.gc(0, 0) == fd.g_c);
}

TEST_CASE("maps are identical for any thread count") {
  const auto p = angle_params();
  const auto d = linspace(-15, 10, 37);
  const AxisSpec ax{AxisKind::theta_deg, linspace(0.0, 1.0, 23)};
  const auto a = gain_map(p, d, ax, {}, 1);
  const auto b = gain_map(p, d, ax, {}, 4);
  CHECK(a.gp == b.gp);
  CHECK(a.gc == b.gc);
  CHECK(a.missing == 0);
  CHECK((a.gp.array() >= 0).all());
}

TEST_CASE("failed cells become NaN") {
  const auto p = angle_params();
  const auto m = gain_map(p, {-5, 0, 5}, {AxisKind::theta_deg, {0.2, 95.0}});
  CHECK(m.missing == 3);
  CHECK(std::isnan(m.gp(1, 1)));
  CHECK(std::isfinite(m.gp(1, 0)));
}

TEST_CASE("axis validation") {
  const auto p = angle_params();
  CHECK_THROWS_AS(gain_map(p, {}, {AxisKind::theta_deg, {0.1}}), ValidationError);
  CHECK_THROWS_AS(gain_map(p, {0, 1, 1}, {AxisKind::theta_deg, {0.1}}), ValidationError);
  CHECK_THROWS_AS(gain_map(p, {0}, {AxisKind::dkz, {3, 1, 2}}), ValidationError);
  CHECK(linspace(0, 1, 5).back() == 1.0);
}

TEST_CASE("gain resonance walks towards the 4WM resonance") {
  const auto p = mismatch_params();
  const auto d = linspace(-20, 20, 161);
  const auto m = gain_map(p, d, {AxisKind::dkz, linspace(0, 15000, 16)}, {}, 2);
  double last = 1e9;
  for (Eigen::Index j = 0; j < m.gc.cols(); ++j) {
    Eigen::Index i = 0;
    m.gc.col(j).maxCoeff(&i);
    CHECK(d[i] <= last);
    last = d[i];
  }
}

TEST_CASE("dataset loading") {
  SUBCASE("well formed") {
    const auto f = scratch("ok.csv");
    write(f, "delta_gamma,theta_deg,g_p,g_c\n-5,0.1,10,9\n-4,0.1,20,19.5\n-5,0.2,3,2\n");
    const auto d = load_gain_data(f);
    REQUIRE(d.records.size() == 3);
    CHECK(d.records[1].g_c == 19.5);
    CHECK_FALSE(d.has_weight);
  }
  SUBCASE("weights") {
    const auto f = scratch("w.csv");
    write(f, "delta_gamma,theta_deg,g_p,g_c,weight\r\n-5,0.1,10,9,0.5\r\n");
    const auto d = load_gain_data(f);
    CHECK(d.has_weight);
    CHECK(d.records[0].weight == 0.5);
  }
  SUBCASE("duplicate key names both lines") {
    const auto f = scratch("dup.csv");
    write(f, "delta_gamma,theta_deg,g_p,g_c\n-5,0.1,10,9\n-4,0.1,20,19\n-5,0.1,3,2\n");
    const auto e = load_error(f);
    CHECK(e.find("lines 2 and 4") != std::string::npos);
  }
  SUBCASE("non-positive gain names its line") {
    const auto f = scratch("neg.csv");
    write(f, "delta_gamma,theta_deg,g_p,g_c\n-5,0.1,10,9\n-4,0.1,0,19\n");
    CHECK(load_error(f).find("line 3") != std::string::npos);
  }
  SUBCASE("malformed") {
    const auto f = scratch("bad.csv");
    write(f, "delta_gamma,theta_deg,g_p,g_c\n-5,0.1,ten,9\n");
    CHECK(load_error(f).find("line 2") != std::string::npos);
    write(f, "delta_gamma,theta_deg,g_p,g_c\n-5,0.1,10\n");
    CHECK(load_error(f).find("line 2") != std::string::npos);
    write(f, "delta,theta,g_p,g_c\n-5,0.1,10,9\n");
    CHECK(load_error(f).find("header") != std::string::npos);
  }
  SUBCASE("empty") {
    const auto f = scratch("empty.csv");
    write(f, "");
    CHECK(load_error(f).find("empty") != std::string::npos);
    write(f, "delta_gamma,theta_deg,g_p,g_c\n");
    CHECK(load_error(f).find("no data") != std::string::npos);
  }
  SUBCASE("missing file") {
    CHECK(load_error(scratch("nope.csv")).find("nope.csv") != std::string::npos);
  }
}

TEST_CASE("map export round-trips through CSV") {
  const auto p = angle_params();
  const auto m = gain_map(p, linspace(-15, 10, 26), {AxisKind::theta_deg, linspace(0.1, 0.5, 5)});
  const auto data = dataset_from_map(m);
  CHECK(data.records.size() == 130);
  const auto f = scratch("roundtrip.csv");
  write_gain_data(data, f);
  CHECK(load_gain_data(f) == data);

  const auto md = gain_map(p, {0.0}, {AxisKind::dkz, {0.0}});
  CHECK_THROWS_AS(dataset_from_map(md), ValidationError);
}
