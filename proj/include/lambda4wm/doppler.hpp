#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "lambda4wm/errors.hpp"
#include "lambda4wm/params.hpp"
#include "lambda4wm/quadrature.hpp"
#include "lambda4wm/susceptibility.hpp"

namespace lambda4wm {

enum class DopplerRule { adaptive, gauss_hermite };

/// With the adaptive rule `nodes` is the number of initial Gauss-Kronrod panels
/// on [-vmax_sigmas, vmax_sigmas]; with gauss_hermite it is the node count and
/// the cutoff is unused.
struct DopplerConfig {
  int nodes = 64;
  double vmax_sigmas = 8.0;
  bool enabled = false;
  DopplerRule rule = DopplerRule::adaptive;
  double rel_tol = 1e-10;

  void validate() const;
};

struct VelocityShifts {
  double d_delta1 = 0.0, d_delta2 = 0.0, d_delta = 0.0;  // [gamma]
};

/// Detuning shifts seen by an atom with velocity `v_axial` along the pump and
/// `v_transverse` in the pump-probe plane (towards the probe).
VelocityShifts velocity_shifts(double v_axial, const BeamKinematics& kin,
                               double v_transverse = 0.0);

/// sqrt(kB T / m) [m/s].
double velocity_sigma(const ModelParams& params);

/// E[f(X)] for X ~ N(0, 1), truncated at +-vmax_sigmas and renormalized for the
/// adaptive rule. `f` returns a fixed-size real Eigen vector.
template <class F>
auto gaussian_average(F&& f, const DopplerConfig& cfg) {
  cfg.validate();
  using Vec = std::decay_t<decltype(f(0.0))>;
  if (cfg.rule == DopplerRule::gauss_hermite) {
    const auto rule = gauss_hermite_rule(cfg.nodes);
    Vec sum = rule.weights(0) * f(rule.nodes(0));
    for (Eigen::Index k = 1; k < rule.nodes.size(); ++k) sum += rule.weights(k) * f(rule.nodes(k));
    return sum;
  }
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto weighted = [&f, norm](double x) { return Vec(norm * std::exp(-0.5 * x * x) * f(x)); };
  const double X = cfg.vmax_sigmas;
  const auto res = integrate_adaptive(weighted, -X, X, cfg.nodes, cfg.rel_tol);
  if (!res.value.allFinite()) throw NumericalError("Doppler average produced a non-finite value");
  return Vec(res.value / std::erf(X / std::numbers::sqrt2));
}

/// Susceptibilities averaged over the 1-D thermal distribution of axial velocity.
SusceptibilitySet averaged_susceptibilities(const ModelParams& params, double delta,
                                            const BeamKinematics& kin, const DopplerConfig& cfg);

}  // namespace lambda4wm
