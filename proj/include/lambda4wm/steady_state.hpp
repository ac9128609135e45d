#pragma once

#include <complex>
#include <functional>

#include <Eigen/Core>

#include "lambda4wm/params.hpp"
#include "lambda4wm/susceptibility.hpp"

namespace lambda4wm {

using Liouvillian = Eigen::Matrix<std::complex<double>, 16, 16>;

/// Rotating-frame density matrix; sigma(n-1, m-1) is sigma_nm.
struct DensityMatrixState {
  Eigen::Matrix4cd sigma = Eigen::Matrix4cd::Zero();
  double time = 0.0;  // [1/gamma]
  int steps = 0;
  double residual = 0.0;  // max |d sigma/dt| [gamma]
};

enum class InitialState { ground1, mixed };

struct OracleOptions {
  double seed_fraction = 1e-6;  // seed Rabi frequency / pump Rabi frequency
  bool richardson = true;       // combine seed s and s/2 to cancel the O(s^2) error
  double linearity_tol = 1e-4;  // max relative change under seed halving
  double residual_tol = 1e-12;
  int max_steps = 5000;
  double initial_step = 0.1;
  InitialState start = InitialState::ground1;
  std::function<void(const DensityMatrixState&)> on_step;
};

/// d vec(sigma)/dt = L vec(sigma), vec index 4(n-1) + (m-1). Pump on 1-3 and
/// 2-4, probe on 2-3, conjugate on 1-4; couplings -Omega/2. Excited states decay
/// at gamma with half to each ground state; optical coherences at gamma/2,
/// sigma_43 at gamma, sigma_21 at gamma_c.
Liouvillian liouvillian(const ModelParams& params, double delta, std::complex<double> rabi_p,
                        std::complex<double> rabi_c);

/// Backward-Euler pseudo-transient continuation until max |L sigma| < residual_tol.
/// Throws NumericalError with the residual after max_steps.
DensityMatrixState evolve_to_steady_state(const ModelParams& params, double delta,
                                          std::complex<double> rabi_p,
                                          std::complex<double> rabi_c,
                                          const OracleOptions& opts = {});

struct OracleReport {
  SusceptibilitySet chi;
  SusceptibilitySet chi_half_seed;  // extraction at seed/2
  double linearity = 0.0;           // max relative difference between the two
  DensityMatrixState probe_run, conjugate_run;
};

/// Linear-response susceptibilities from a probe-only and a conjugate-only run.
/// Throws ValidationError when seed halving changes any component by more
/// than linearity_tol.
OracleReport oracle_report(const ModelParams& params, double delta, const OracleOptions& opts = {});

SusceptibilitySet extract_susceptibilities(const ModelParams& params, double delta,
                                           const OracleOptions& opts = {});

}  // namespace lambda4wm
