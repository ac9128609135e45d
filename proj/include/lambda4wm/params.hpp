#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"

namespace lambda4wm {

namespace constants {
inline constexpr double speed_of_light = 299792458.0;         // m/s
inline constexpr double hbar = 1.054571817e-34;               // J s
inline constexpr double epsilon0 = 8.8541878128e-12;          // F/m
inline constexpr double boltzmann = 1.380649e-23;             // J/K
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
inline constexpr double rb85_mass = 84.911789738 * atomic_mass_unit;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

namespace defaults {
inline constexpr double gamma = constants::two_pi * 6.0e6;  // rad/s
inline constexpr double hf_split_hz = 3.0357e9;             // 85Rb ground splitting
inline constexpr double density = 2.8e18;                   // m^-3
inline constexpr double length = 0.012;                     // m
inline constexpr double wavelength = 795.0e-9;              // m, Rb D1
inline constexpr double dipole = 1.47e-29;                  // C m
inline constexpr double temperature = 383.15;               // K
}  // namespace defaults

/// Physical inputs of the double-lambda model.
///
/// Rates and detunings are stored in units of the excited-state decay rate
/// `gamma`; `gamma` itself is in rad/s and sets the scale. Everything else is SI.
struct ModelParams {
  double omega_rabi = 0.0;  ///< pump resonant Rabi frequency [gamma]
  double delta1 = 0.0;      ///< pump detuning on 1-3 [gamma]
  double delta2 = 0.0;      ///< 1-4 detuning entering the closed forms [gamma]
  double gamma = defaults::gamma;
  double gamma_c = 0.0;     ///< ground-state decoherence [gamma]
  double density = defaults::density;
  double length = defaults::length;
  double hf_split = defaults::hf_split_hz * constants::two_pi / defaults::gamma;
  double wavelength = defaults::wavelength;
  double dipole = defaults::dipole;
  double epsilon_pump = 0.0;  ///< n0 = 1 - epsilon_pump
  double temperature = defaults::temperature;
  double atomic_mass = constants::rb85_mass;

  /// N d^2 / (epsilon0 hbar gamma): the common scale of all four susceptibilities.
  [[nodiscard]] double chi_prefactor() const;
  [[nodiscard]] double pump_index() const { return 1.0 - epsilon_pump; }

  /// Throws ValidationError naming the first offending field.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// Parses a flat JSON document into validated parameters.
///
/// Frequencies are given either in units of gamma (`<name>_gamma`) or as cyclic
/// frequencies in Hz (`<name>_hz`); giving both is an error. Required:
/// omega_rabi, delta1, gamma_c. `delta2` defaults to `delta1 + hf_split`.
ModelParams build_params(const nlohmann::json& config);

/// Inverse of build_params; `build_params(to_json(p)) == p` holds bit-exactly.
nlohmann::json to_json(const ModelParams& params);

/// Every key build_params understands.
const std::vector<std::string>& param_keys();

/// Vacuum wavenumbers and angular frequencies of the three beams for one
/// (two-photon detuning, pump-probe angle) point.
struct BeamKinematics {
  double k0 = 0.0, kp = 0.0, kc = 0.0;                 // rad/m
  double omega0 = 0.0, omegap = 0.0, omegac = 0.0;     // rad/s
  double theta = 0.0;                                  // rad
  double gamma = defaults::gamma;                      // rad/s, unit of detunings
};

/// omega_p = omega_0 - (hf_split + delta) gamma, omega_c = 2 omega_0 - omega_p.
BeamKinematics kinematics(const ModelParams& params, double delta, double theta);

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace lambda4wm
