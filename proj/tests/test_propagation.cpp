#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "lambda4wm/errors.hpp"
#include "lambda4wm/propagation.hpp"

using namespace lambda4wm;
using cd = std::complex<double>;

namespace {

const cd I(0.0, 1.0);

ModelParams mismatch_params() {
  return build_params({{"omega_rabi_gamma", 60},
                       {"delta1_gamma", 140},
                       {"gamma_c_gamma", 0.5},
                       {"density_cm3", 3e12},
                       {"length_m", 0.0125}});
}

double rel(cd a, cd b, double scale) { return std::abs(a - b) / scale; }

cd rand_c(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {r * u(rng), r * u(rng)};
}

}  // namespace

TEST_CASE("phase mismatch") {
  const auto p = mismatch_params();
  CHECK(std::abs(phase_mismatch(kinematics(p, 0.0, 0.0), 1.0)) < 1e-6);
  CHECK(std::abs(phase_mismatch(kinematics(p, -7.0, 0.0), 1.0)) < 1e-6);

  const auto k = kinematics(p, 0.0, 0.0);
  CHECK(phase_mismatch(k, 1.0 - 6.5e-6) == doctest::Approx(-102.7).epsilon(1e-3));
  CHECK(phase_mismatch(k, 1.0 - 6.5e-6) == doctest::Approx(-2 * 6.5e-6 * k.k0).epsilon(1e-9));

  const auto k3 = kinematics(p, 0.0, deg_to_rad(0.3));
  CHECK(phase_mismatch(k3, 1.0) == doctest::Approx(216.7).epsilon(1e-3));
}

TEST_CASE("coupling coefficients") {
  const auto p = mismatch_params();
  const auto k = kinematics(p, 0.0, 0.0);

  const auto zero = coupling_at(SusceptibilitySet{}, k, 0.0);
  CHECK(zero.a_pp == cd(0));
  CHECK(zero.a_mean == cd(0));
  CHECK(zero.xi_prop == cd(0));

  const double D = 123.0;
  const auto only_dk = coupling_at(SusceptibilitySet{}, k, D);
  CHECK(only_dk.a_mean == cd(0.0, -D / 2));
  CHECK(std::abs(only_dk.xi_prop * only_dk.xi_prop + D * D / 4) < 1e-12);

  // direct recomputation at delta = 0, dkz = 0
  const auto chi = susceptibilities(p, 0.0);
  const auto cs = coupling_at(chi, k, 0.0);
  CHECK(cs.a_pp == I * k.kp * chi.chi_pp / 2.0);
  CHECK(cs.a_pc == I * k.kp * chi.chi_pc / 2.0);
  CHECK(cs.a_cc == I * k.kc * std::conj(chi.chi_cc) / 2.0);
  CHECK(cs.a_cp == I * k.kc * std::conj(chi.chi_cp) / 2.0);
  CHECK(std::abs(cs.xi_prop * cs.xi_prop - (cs.a_mean * cs.a_mean - cs.a_pc * cs.a_cp)) <
        1e-12 * std::norm(cs.a_mean));
}

TEST_CASE("closed form basics") {
  const auto cs = make_coupling({1.0, 2.0}, {3.0, -1.0}, {-2.0, 0.5}, {0.3, 0.1}, 40.0);
  const auto f0 = solve_closed_form(cs, 0.0);
  CHECK(f0.e_p == cd(1.0));
  CHECK(f0.e_c_conj == cd(0.0));
  CHECK(f0.g_p == 1.0);
  CHECK(f0.g_c == 0.0);
  CHECK_THROWS_AS(solve_closed_form(cs, -1.0), ValidationError);

  const auto no_mix = make_coupling({1.0, 2.0}, {3.0, -1.0}, 0.0, {0.3, 0.1}, 40.0);
  CHECK(solve_closed_form(no_mix, 0.01).g_c == 0.0);
  CHECK(solve_closed_form(cs, 0.01).g_c > 0.0);
}

TEST_CASE("ideal amplifier conserves g_p - g_c") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> L(0.0, 0.02);
  for (int n = 0; n < 200; ++n) {
    const cd apc = rand_c(rng, 400.0);
    const auto cs = make_coupling(0.0, apc, -std::conj(apc), 0.0, 0.0);
    const double len = L(rng);
    const auto f = solve_closed_form(cs, len);
    CHECK(std::abs(f.g_p - f.g_c - 1.0) <= 1e-12 * f.g_p);
    const auto o = integrate_ode(cs, len, 4000);
    CHECK(std::abs(o.g_p - o.g_c - 1.0) <= 1e-9 * o.g_p);
  }
}

TEST_CASE("branch independence and series switch") {
  std::mt19937_64 rng(9);
  for (int n = 0; n < 100; ++n) {
    auto cs = make_coupling(rand_c(rng, 300), rand_c(rng, 300), rand_c(rng, 300), rand_c(rng, 300), 0.0);
    const auto a = solve_closed_form(cs, 0.01);
    cs.xi_prop = -cs.xi_prop;
    const auto b = solve_closed_form(cs, 0.01);
    CHECK(a.e_p == b.e_p);
    CHECK(a.e_c_conj == b.e_c_conj);
  }
  // straddle |xi L| = 1e-4: a_pc a_cp chosen so xi = x / L
  const double L = 0.01;
  const cd amean(20.0, 5.0);
  for (double x : {0.99e-4, 1.01e-4}) {
    const cd xi = x / L;
    const cd apc(3.0, 1.0);
    const cd acp = (amean * amean - xi * xi) / apc;
    // a_pp = amean, a_cc = amean, dkz = 0
    const auto cs = make_coupling(amean, apc, acp, amean, 0.0);
    const auto f = solve_closed_form(cs, L);
    const auto o = integrate_ode(cs, L, 2000);
    const double s = std::abs(f.e_p) + std::abs(f.e_c_conj);
    CHECK(rel(f.e_p, o.e_p, s) < 1e-12);
    CHECK(rel(f.e_c_conj, o.e_c_conj, s) < 1e-12);
  }
}

TEST_CASE("overflow switches to log form") {
  const auto cs = make_coupling(0.0, {1e5, 0.0}, {-1e5, 0.0}, 0.0, 0.0);
  const auto f = solve_closed_form(cs, 0.01);  // xi L = 1000
  CHECK(f.log_form);
  CHECK(std::isfinite(f.log_g_p));
  CHECK(f.log_g_p == doctest::Approx(2 * (1000 - std::log(2.0))).epsilon(1e-12));
  CHECK(std::abs(f.log_g_c - f.log_g_p) < 1e-12);

  const auto mild = solve_closed_form(cs, 1e-3);
  CHECK_FALSE(mild.log_form);
  CHECK(std::log(mild.g_p) == doctest::Approx(mild.log_g_p).epsilon(1e-13));
}

TEST_CASE("ode oracle") {
  SUBCASE("decoupled") {
    const cd app(-30.0, 200.0);
    const auto cs = make_coupling(app, 0.0, 0.0, {5.0, 1.0}, 500.0);
    const auto o = integrate_ode(cs, 0.012, 2000);
    CHECK(std::abs(o.e_p - std::exp(app * 0.012)) < 1e-11);
    CHECK(o.e_c_conj == cd(0.0));
  }
  SUBCASE("step halving at mismatch parameters") {
    const auto p = mismatch_params();
    for (double dkz : {0.0, 3000.0}) {
      const auto k = kinematics(p, -3.0, 0.0);
      const auto cs = coupling_at(susceptibilities(p, -3.0), k, dkz);
      const auto a = integrate_ode(cs, p.length, 4000);
      const auto b = integrate_ode(cs, p.length, 8000);
      CHECK(std::abs(a.g_p - b.g_p) < 1e-9 * b.g_p);
      const auto f = solve_closed_form(cs, p.length);
      CHECK(f.g_p == doctest::Approx(b.g_p).epsilon(1e-8));
      CHECK(f.g_c == doctest::Approx(b.g_c).epsilon(1e-8));
    }
  }
  SUBCASE("random draws agree with the closed form") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n = 0; n < 200; ++n) {
      const double L = 0.001 + 0.02 * u(rng);
      const double r = 10.0 / L / 4;  // |a| L <= 10 per coefficient
      const auto cs = make_coupling(rand_c(rng, r), rand_c(rng, r), rand_c(rng, r), rand_c(rng, r),
                                    (u(rng) - 0.5) * 10.0 / L);
      const auto f = solve_closed_form(cs, L);
      const auto o = integrate_ode(cs, L, 4000);
      const double s = std::abs(f.e_p) + std::abs(f.e_c_conj);
      CHECK(rel(f.e_p, o.e_p, s) < 1e-8);
      CHECK(rel(f.e_c_conj, o.e_c_conj, s) < 1e-8);
    }
  }
  SUBCASE("errors") {
    const auto cs = make_coupling(1.0, 0.0, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(integrate_ode(cs, 1.0, 1), ValidationError);
    const auto blow = make_coupling(1e308, 0.0, 0.0, 0.0, 0.0);
    try {
      integrate_ode(blow, 1.0, 10);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("z = ") != std::string::npos);
    }
  }
}

TEST_CASE("conjugated pair matches the unconjugated field equations") {
  // Integrate dE_p/dz = i kp/2 (chi_pp E_p + chi_pc e^{i dk z} E_c^*),
  //           dE_c/dz = i kc/2 (chi_cc E_c + chi_cp e^{i dk z} E_p^*)
  // directly and compare E_c^* with integrate_ode.
  const auto p = mismatch_params();
  const auto k = kinematics(p, -2.0, 0.0);
  const auto chi = susceptibilities(p, -2.0);
  const double dk = 1500.0, L = p.length;
  const int n = 20000;
  const double h = L / n;
  auto rhs = [&](double z, cd ep, cd ec, cd& dp, cd& dc) {
    const cd ph = std::exp(I * dk * z);
    dp = I * k.kp / 2.0 * (chi.chi_pp * ep + chi.chi_pc * ph * std::conj(ec));
    dc = I * k.kc / 2.0 * (chi.chi_cc * ec + chi.chi_cp * ph * std::conj(ep));
  };
  cd ep = 1.0, ec = 0.0;
  for (int s = 0; s < n; ++s) {
    const double z = s * h;
    cd p1, c1, p2, c2, p3, c3, p4, c4;
    rhs(z, ep, ec, p1, c1);
    rhs(z + h / 2, ep + h / 2 * p1, ec + h / 2 * c1, p2, c2);
    rhs(z + h / 2, ep + h / 2 * p2, ec + h / 2 * c2, p3, c3);
    rhs(z + h, ep + h * p3, ec + h * c3, p4, c4);
    ep += h / 6 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
    ec += h / 6 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
  }
  const auto cs = coupling_at(chi, k, dk);
  const auto f = solve_closed_form(cs, L);
  const double s = std::abs(ep) + std::abs(ec);
  CHECK(rel(f.e_p, ep, s) < 1e-9);
  CHECK(rel(f.e_c_conj, std::conj(ec), s) < 1e-9);
}

TEST_CASE("solve_twin_beam composes the pieces") {
  auto p = mismatch_params();
  p.epsilon_pump = 6.5e-6;
  const double theta = deg_to_rad(0.4);
  const auto k = kinematics(p, -4.0, theta);
  const auto direct = solve_closed_form(coupling(susceptibilities(p, -4.0), k, p.pump_index()), p.length);
  const auto f = solve_twin_beam(p, -4.0, theta);
  CHECK(f.g_p == direct.g_p);
  CHECK(f.g_c == direct.g_c);
  CHECK(f.g_p >= 0.0);
}
