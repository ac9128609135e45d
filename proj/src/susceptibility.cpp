#include "lambda4wm/susceptibility.hpp"

#include <algorithm>
#include <cmath>

#include "lambda4wm/errors.hpp"

namespace lambda4wm {

SusceptibilitySet susceptibilities(const ModelParams& params, double delta) {
  return susceptibilities(params, delta, params.delta1, params.delta2);
}

SusceptibilitySet susceptibilities(const ModelParams& params, double delta, double delta1,
                                   double delta2) {
  if (!(params.omega_rabi > 0.0)) {
    throw DomainError(
        "susceptibilities need omega_rabi > 0 (the closed forms divide by the pump Rabi "
        "frequency); use a small positive value for the weak-pump limit");
  }
  if (!std::isfinite(delta) || !std::isfinite(delta1) || !std::isfinite(delta2)) {
    throw ValidationError("detunings must be finite");
  }
  const auto xi = complex_decay_rates(delta, delta1, delta2, params.gamma_c);
  auto chi = normalized_susceptibilities(params.omega_rabi, xi);
  chi *= params.chi_prefactor();
  return chi;
}

double cp_conjugate_deviation(const SusceptibilitySet& chi) {
  const double scale = std::max(std::abs(chi.chi_pc), std::abs(chi.chi_cp));
  if (scale == 0.0) return 0.0;
  return std::abs(chi.chi_cp - std::conj(chi.chi_pc)) / scale;
}

double pump_index(std::span<const double> fractions, std::span<const double> detunings,
                  const ModelParams& params) {
  if (fractions.size() != detunings.size()) {
    throw ValidationError("pump_index: fractions and detunings differ in length");
  }
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("pump_index: fraction outside [0, 1]");
    total += f;
  }
  if (total > 1.0 + 1e-12) throw ValidationError("pump_index: fractions sum above 1");

  double chi = 0.0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    const double d = detunings[k];
    chi -= fractions[k] * d / (d * d + 0.25);
  }
  return 1.0 + 0.5 * params.chi_prefactor() * chi;
}

}  // namespace lambda4wm
