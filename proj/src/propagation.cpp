#include "lambda4wm/propagation.hpp"

#include <cmath>
#include <sstream>

#include "lambda4wm/errors.hpp"

namespace lambda4wm {

namespace {

constexpr cdouble I{0.0, 1.0};
constexpr double kSeriesCutoff = 1e-4;
constexpr double kLogThreshold = 300.0;

// exp(z) - 1 without cancellation for small |z|.
cdouble expm1(cdouble z) {
  const double a = z.real(), b = z.imag();
  const double s = std::sin(0.5 * b);
  return {std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b)};
}

double log_abs2(cdouble z) { return 2.0 * std::log(std::abs(z)); }

}  // namespace

double phase_mismatch(const BeamKinematics& kin, double n0) {
  return 2.0 * n0 * kin.k0 - (kin.kp + kin.kc) * std::cos(kin.theta);
}

CouplingSet make_coupling(cdouble a_pp, cdouble a_pc, cdouble a_cp, cdouble a_cc, double dkz) {
  CouplingSet cs{a_pp, a_pc, a_cp, a_cc, {}, {}, {}, dkz};
  cs.delta_a = 0.5 * (a_pp - a_cc + I * dkz);
  cs.a_mean = 0.5 * (a_pp + a_cc - I * dkz);
  cs.xi_prop = std::sqrt(cs.a_mean * cs.a_mean - a_pc * a_cp);
  return cs;
}

CouplingSet coupling(const SusceptibilitySet& chi, const BeamKinematics& kin, double n0) {
  return coupling_at(chi, kin, phase_mismatch(kin, n0));
}

CouplingSet coupling_at(const SusceptibilitySet& chi, const BeamKinematics& kin, double dkz) {
  const cdouble p = 0.5 * I * kin.kp;
  const cdouble c = 0.5 * I * kin.kc;
  return make_coupling(p * chi.chi_pp, p * chi.chi_pc, c * std::conj(chi.chi_cp),
                       c * std::conj(chi.chi_cc), dkz);
}

FieldPair solve_closed_form(const CouplingSet& cs, double length) {
  if (!(length >= 0.0)) throw ValidationError("length must be non-negative");

  // cosh and sinh(xL)/x are even in xi; fix the branch so both signs give identical bits.
  cdouble xi = cs.xi_prop;
  if (xi.real() < 0.0 || (xi.real() == 0.0 && xi.imag() < 0.0)) xi = -xi;
  const cdouble x = xi * length;
  const cdouble base = cs.delta_a * length;

  cdouble ch, sh_over_xi;  // scaled by exp(-x) outside the series branch
  double log_scale = base.real();
  double phase = base.imag();
  if (std::abs(x) < kSeriesCutoff) {
    const cdouble x2 = x * x;
    ch = 1.0 + x2 / 2.0 + x2 * x2 / 24.0;
    sh_over_xi = length * (1.0 + x2 / 6.0 + x2 * x2 / 120.0);
  } else {
    const cdouble m = -expm1(-2.0 * x);  // 1 - e^{-2x}, |e^{-2x}| <= 1
    ch = 1.0 - 0.5 * m;
    sh_over_xi = m / (2.0 * xi);
    log_scale += x.real();
    phase += x.imag();
  }
  const cdouble rot = std::exp(I * phase);
  const cdouble p = rot * (ch + cs.a_mean * sh_over_xi);
  const cdouble c = std::exp(-I * (cs.dkz * length)) * rot * (-cs.a_cp * sh_over_xi);

  FieldPair out;
  out.log_g_p = 2.0 * log_scale + log_abs2(p);
  out.log_g_c = 2.0 * log_scale + log_abs2(c);
  out.log_form = std::abs(log_scale) > kLogThreshold;
  if (out.log_form) {
    out.e_p = p;
    out.e_c_conj = c;
    out.log_scale = log_scale;
    out.g_p = std::exp(out.log_g_p);
    out.g_c = std::exp(out.log_g_c);
  } else {
    const double s = std::exp(log_scale);
    out.e_p = s * p;
    out.e_c_conj = s * c;
    out.g_p = std::norm(out.e_p);
    out.g_c = std::norm(out.e_c_conj);
  }
  return out;
}

FieldPair integrate_ode(const CouplingSet& cs, double length, int steps) {
  if (steps < 2) throw ValidationError("integrate_ode needs at least 2 steps");
  if (!(length >= 0.0)) throw ValidationError("length must be non-negative");

  using State = Eigen::Vector2cd;
  auto rhs = [&cs](double z, const State& y) {
    const cdouble ph = std::exp(I * (cs.dkz * z));
    return State(cs.a_pp * y(0) + cs.a_pc * ph * y(1),
                 -cs.a_cc * y(1) - cs.a_cp * std::conj(ph) * y(0));
  };

  const double h = length / steps;
  State y(1.0, 0.0);
  for (int n = 0; n < steps; ++n) {
    const double z = n * h;
    const State k1 = rhs(z, y);
    const State k2 = rhs(z + 0.5 * h, y + 0.5 * h * k1);
    const State k3 = rhs(z + 0.5 * h, y + 0.5 * h * k2);
    const State k4 = rhs(z + h, y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite()) {
      std::ostringstream msg;
      msg << "integrate_ode: non-finite envelope at z = " << z + h << " m";
      throw NumericalError(msg.str());
    }
  }
  FieldPair out;
  out.e_p = y(0);
  out.e_c_conj = y(1);
  out.g_p = std::norm(y(0));
  out.g_c = std::norm(y(1));
  out.log_g_p = std::log(out.g_p);
  out.log_g_c = std::log(out.g_c);
  return out;
}

FieldPair solve_twin_beam(const ModelParams& params, double delta, double theta,
                          const DopplerConfig& doppler) {
  const auto kin = kinematics(params, delta, theta);
  const auto chi = doppler.enabled ? averaged_susceptibilities(params, delta, kin, doppler)
                                   : susceptibilities(params, delta);
  return solve_closed_form(coupling(chi, kin, params.pump_index()), params.length);
}

FieldPair solve_twin_beam_dkz(const ModelParams& params, double delta, double dkz,
                              const DopplerConfig& doppler) {
  const auto kin = kinematics(params, delta, 0.0);
  const auto chi = doppler.enabled ? averaged_susceptibilities(params, delta, kin, doppler)
                                   : susceptibilities(params, delta);
  return solve_closed_form(coupling_at(chi, kin, dkz), params.length);
}

}  // namespace lambda4wm
