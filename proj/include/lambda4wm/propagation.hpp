#pragma once

#include <cmath>
#include <complex>

#include "lambda4wm/doppler.hpp"
#include "lambda4wm/params.hpp"
#include "lambda4wm/susceptibility.hpp"

namespace lambda4wm {

using cdouble = std::complex<double>;

/// Coupled-mode coefficients [1/m].
struct CouplingSet {
  cdouble a_pp, a_pc, a_cp, a_cc;
  cdouble delta_a, a_mean, xi_prop;
  double dkz = 0.0;  // rad/m
};

/// Output envelopes for a unit probe seed and no input conjugate.
///
/// When `log_form` is set the envelopes are stored divided by exp(log_scale)
/// and g_p, g_c may be inf or 0; log_g_p, log_g_c are always valid.
struct FieldPair {
  cdouble e_p{1.0, 0.0};
  cdouble e_c_conj{0.0, 0.0};
  double g_p = 1.0, g_c = 0.0;
  double log_g_p = 0.0, log_g_c = -INFINITY;
  double log_scale = 0.0;
  bool log_form = false;
};

/// 2 n0 k0 - (kp + kc) cos(theta).
double phase_mismatch(const BeamKinematics& kin, double n0);

/// Builds delta_a, a_mean and xi_prop from the four raw coefficients.
CouplingSet make_coupling(cdouble a_pp, cdouble a_pc, cdouble a_cp, cdouble a_cc, double dkz);

/// a_pj = i kp chi_pj / 2, a_cj = i kc chi_cj^* / 2, dkz from phase_mismatch.
CouplingSet coupling(const SusceptibilitySet& chi, const BeamKinematics& kin, double n0);

/// Same coefficients with an externally imposed phase mismatch.
CouplingSet coupling_at(const SusceptibilitySet& chi, const BeamKinematics& kin, double dkz);

FieldPair solve_closed_form(const CouplingSet& cs, double length);

/// Fixed-step RK4 on
///   dE_p/dz   =  a_pp E_p   + a_pc e^{+i dkz z} E_c^*
///   dE_c^*/dz = -a_cc E_c^* - a_cp e^{-i dkz z} E_p
/// from (1, 0). Throws NumericalError on a non-finite value.
FieldPair integrate_ode(const CouplingSet& cs, double length, int steps);

/// Single point: (optionally Doppler-averaged) chi, coupling, closed form.
FieldPair solve_twin_beam(const ModelParams& params, double delta, double theta,
                          const DopplerConfig& doppler = {});

/// Single point on the (delta, dkz) plane, beams taken collinear.
FieldPair solve_twin_beam_dkz(const ModelParams& params, double delta, double dkz,
                              const DopplerConfig& doppler = {});

}  // namespace lambda4wm
