#pragma once

#include <complex>
#include <span>

#include <Eigen/Core>

#include "lambda4wm/params.hpp"

namespace lambda4wm {

/// Complex decay rates of the six coherences, gamma = 1.
template <class Real>
struct BasicXiSet {
  using C = std::complex<Real>;
  C xi43, xi42, xi41, xi32, xi31, xi21;
};

template <class Real>
BasicXiSet<Real> complex_decay_rates(Real delta, Real delta1, Real delta2, Real gamma_c) {
  using C = std::complex<Real>;
  const Real half(0.5);
  return {C(Real(-1), delta2 - delta1), C(-half, delta2 - delta), C(-half, delta2),
          C(-half, delta1 - delta),     C(-half, delta1),         C(-gamma_c, delta)};
}

/// Pump-only steady-state population differences sigma_ii - sigma_jj.
template <class Real>
struct BasicPopulationDifferences {
  Real s11_33, s11_44, s22_33, s22_44;
};

template <class Real>
BasicPopulationDifferences<Real> population_differences(Real omega_rabi,
                                                        const BasicXiSet<Real>& xi) {
  const Real a = std::norm(xi.xi31);
  const Real b = std::norm(xi.xi42);
  const Real den = omega_rabi * omega_rabi + a + b;
  return {a / den, a / den, b / den, b / den};
}

/// chi_pp, chi_cc, chi_pc, chi_cp. The probe sees chi_pp E_p + chi_pc E_c^*,
/// the conjugate chi_cc E_c + chi_cp E_p^*.
template <class Real>
struct BasicSusceptibilitySet {
  using C = std::complex<Real>;
  C chi_pp{}, chi_cc{}, chi_pc{}, chi_cp{};

  [[nodiscard]] Eigen::Matrix<C, 4, 1> as_vector() const {
    return {chi_pp, chi_cc, chi_pc, chi_cp};
  }
  static BasicSusceptibilitySet from_vector(const Eigen::Matrix<C, 4, 1>& v) {
    return {v(0), v(1), v(2), v(3)};
  }
  BasicSusceptibilitySet& operator*=(Real s) {
    chi_pp *= s, chi_cc *= s, chi_pc *= s, chi_cp *= s;
    return *this;
  }
};

/// Closed forms with the common prefactor N d^2/(eps0 hbar gamma) stripped.
/// Singular at omega_rabi = 0; callers guard.
template <class Real>
BasicSusceptibilitySet<Real> normalized_susceptibilities(Real omega_rabi,
                                                         const BasicXiSet<Real>& xi) {
  using C = std::complex<Real>;
  const C i(0, 1);
  auto c = [](const C& z) { return std::conj(z); };
  const auto pop = population_differences(omega_rabi, xi);
  const Real q = omega_rabi * omega_rabi / Real(4);

  const auto& [x43, x42, x41, x32, x31, x21] = xi;
  const C D = (x43 + x21) * (c(x32) + x41) + c(x32) * x41 * x43 * x21 / q;
  const C Dc = c(D);

  BasicSusceptibilitySet<Real> out;
  out.chi_pp = i * c(x41) / Dc *
               (c(x21) / c(x42) * pop.s22_44 + c(x43) / c(x31) * pop.s11_33 -
                ((c(x21) + c(x43)) / c(x41) + c(x21) * c(x43) / q) * pop.s22_33);
  out.chi_cc = i * c(x32) / D *
               (x43 / c(x42) * pop.s22_44 + x21 / c(x31) * pop.s11_33 -
                ((x21 + x43) / c(x32) + x21 * x43 / q) * pop.s11_44);
  out.chi_pc = i * c(x41) / Dc *
               (c(x21) / x31 * pop.s11_33 + c(x43) / x42 * pop.s22_44 +
                (c(x21) + c(x43)) / c(x41) * pop.s11_44);
  out.chi_cp = i * c(x32) / D *
               (x43 / x31 * pop.s11_33 + x21 / x42 * pop.s22_44 +
                (x21 + x43) / c(x32) * pop.s22_33);
  return out;
}

using XiSet = BasicXiSet<double>;
using PopulationDifferences = BasicPopulationDifferences<double>;
using SusceptibilitySet = BasicSusceptibilitySet<double>;

/// Susceptibilities at two-photon detuning `delta` [gamma], prefactor applied.
/// Throws DomainError for omega_rabi = 0.
SusceptibilitySet susceptibilities(const ModelParams& params, double delta);

/// Same with explicit one-photon detunings, used for velocity-shifted classes.
SusceptibilitySet susceptibilities(const ModelParams& params, double delta, double delta1,
                                   double delta2);

/// |chi_cp - chi_pc^*| / max(|chi_pc|, |chi_cp|).
double cp_conjugate_deviation(const SusceptibilitySet& chi);

/// n0 = 1 + chi/2 for a far-detuned pump; `fractions[i]` of the atoms sit in a
/// ground state whose pump detuning is `detunings[i]` [gamma].
double pump_index(std::span<const double> fractions, std::span<const double> detunings,
                  const ModelParams& params);

}  // namespace lambda4wm
