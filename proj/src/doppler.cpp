#include "lambda4wm/doppler.hpp"

#include <cmath>

namespace lambda4wm {

void DopplerConfig::validate() const {
  if (nodes < 8) throw ValidationError("field 'doppler_nodes' must be at least 8");
  if (!(vmax_sigmas >= 4.0)) throw ValidationError("field 'doppler_vmax_sigmas' must be >= 4");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw ValidationError("field 'doppler_rel_tol' must lie in (0, 1)");
  }
}

VelocityShifts velocity_shifts(double v_axial, const BeamKinematics& kin, double v_transverse) {
  const double one_photon = -kin.k0 * v_axial / kin.gamma;
  const double two_photon = (-(kin.k0 - kin.kp * std::cos(kin.theta)) * v_axial +
                             kin.kp * std::sin(kin.theta) * v_transverse) /
                            kin.gamma;
  return {one_photon, one_photon, two_photon};
}

double velocity_sigma(const ModelParams& params) {
  return std::sqrt(constants::boltzmann * params.temperature / params.atomic_mass);
}

SusceptibilitySet averaged_susceptibilities(const ModelParams& params, double delta,
                                            const BeamKinematics& kin, const DopplerConfig& cfg) {
  const double sigma_v = velocity_sigma(params);
  auto chi_at = [&](double x) {
    const auto s = velocity_shifts(sigma_v * x, kin);
    const auto chi = susceptibilities(params, delta + s.d_delta, params.delta1 + s.d_delta1,
                                      params.delta2 + s.d_delta2);
    Eigen::Matrix<double, 8, 1> v;
    v << chi.chi_pp.real(), chi.chi_pp.imag(), chi.chi_cc.real(), chi.chi_cc.imag(),
        chi.chi_pc.real(), chi.chi_pc.imag(), chi.chi_cp.real(), chi.chi_cp.imag();
    return v;
  };
  const Eigen::Matrix<double, 8, 1> v = gaussian_average(chi_at, cfg);
  return {{v(0), v(1)}, {v(2), v(3)}, {v(4), v(5)}, {v(6), v(7)}};
}

}  // namespace lambda4wm
