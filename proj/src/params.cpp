#include "lambda4wm/params.hpp"

#include <cmath>
#include <optional>

#include "lambda4wm/errors.hpp"

namespace lambda4wm {

namespace {

using nlohmann::json;

std::optional<double> read_number(const json& config, const std::string& key) {
  auto it = config.find(key);
  if (it == config.end()) return std::nullopt;
  if (!it->is_number()) {
    throw ValidationError("field '" + key + "' must be a number, got " + it->dump());
  }
  double value = it->get<double>();
  if (!std::isfinite(value)) throw ValidationError("field '" + key + "' is not finite");
  return value;
}

// Reads a quantity that may be given under one of two unit-suffixed keys.
// Returns the value in the first key's units after applying `convert_second`.
template <class Convert>
std::optional<double> read_either(const json& config, const std::string& name,
                                  const std::string& first, const std::string& second,
                                  Convert convert_second) {
  auto a = read_number(config, name + first);
  auto b = read_number(config, name + second);
  if (a && b) {
    throw ValidationError("field '" + name + "' given as both '" + name + first + "' and '" +
                          name + second + "'");
  }
  if (a) return a;
  if (b) return convert_second(*b);
  return std::nullopt;
}

double require(std::optional<double> value, const std::string& name, const std::string& hint) {
  if (!value) throw ValidationError("missing required field '" + name + "' (" + hint + ")");
  return *value;
}

void check(bool ok, const char* field, const char* what) {
  if (!ok) throw ValidationError(std::string("field '") + field + "' " + what);
}

}  // namespace

double ModelParams::chi_prefactor() const {
  return density * dipole * dipole / (constants::epsilon0 * constants::hbar * gamma);
}

void ModelParams::validate() const {
  const std::pair<const char*, double> all[] = {
      {"omega_rabi", omega_rabi}, {"delta1", delta1},       {"delta2", delta2},
      {"gamma", gamma},           {"gamma_c", gamma_c},     {"density", density},
      {"length", length},         {"hf_split", hf_split},   {"wavelength", wavelength},
      {"dipole", dipole},         {"epsilon_pump", epsilon_pump},
      {"temperature", temperature}, {"atomic_mass", atomic_mass}};
  for (const auto& [name, value] : all) check(std::isfinite(value), name, "must be finite");

  check(gamma > 0.0, "gamma", "must be positive");
  check(omega_rabi >= 0.0, "omega_rabi", "must be non-negative");
  check(gamma_c >= 0.0, "gamma_c", "must be non-negative");
  check(density >= 0.0, "density", "must be non-negative");
  check(length >= 0.0, "length", "must be non-negative");
  check(hf_split > 0.0, "hf_split", "must be positive");
  check(wavelength > 0.0, "wavelength", "must be positive");
  check(dipole >= 0.0, "dipole", "must be non-negative");
  check(temperature > 0.0, "temperature", "must be positive");
  check(atomic_mass > 0.0, "atomic_mass", "must be positive");
}

ModelParams build_params(const json& config) {
  if (!config.is_object()) throw ValidationError("configuration must be a JSON object");

  ModelParams p;
  auto gamma = read_either(config, "gamma", "_rad_s", "_hz",
                           [](double hz) { return constants::two_pi * hz; });
  if (gamma) {
    // Checked early: every _hz conversion below divides by it.
    if (*gamma <= 0.0) throw ValidationError("field 'gamma' must be positive");
    p.gamma = *gamma;
  }
  const double g = p.gamma;
  auto from_hz = [g](double hz) { return constants::two_pi * hz / g; };
  auto freq = [&](const std::string& name) {
    return read_either(config, name, "_gamma", "_hz", from_hz);
  };

  p.omega_rabi = require(freq("omega_rabi"), "omega_rabi", "omega_rabi_gamma or omega_rabi_hz");
  p.delta1 = require(freq("delta1"), "delta1", "delta1_gamma or delta1_hz");
  p.gamma_c = require(freq("gamma_c"), "gamma_c", "gamma_c_gamma or gamma_c_hz");
  p.hf_split = freq("hf_split").value_or(from_hz(defaults::hf_split_hz));
  p.delta2 = freq("delta2").value_or(p.delta1 + p.hf_split);

  p.density = read_either(config, "density", "_m3", "_cm3", [](double v) { return v * 1e6; })
                  .value_or(defaults::density);
  p.length = read_number(config, "length_m").value_or(defaults::length);
  p.wavelength = read_number(config, "wavelength_m").value_or(defaults::wavelength);
  p.dipole = read_number(config, "dipole_cm").value_or(defaults::dipole);
  p.epsilon_pump = read_number(config, "epsilon_pump").value_or(0.0);
  p.temperature = read_number(config, "temperature_k").value_or(defaults::temperature);
  p.atomic_mass = read_either(config, "atomic_mass", "_kg", "_u",
                              [](double u) { return u * constants::atomic_mass_unit; })
                      .value_or(constants::rb85_mass);
  p.validate();
  return p;
}

json to_json(const ModelParams& p) {
  return json{{"omega_rabi_gamma", p.omega_rabi}, {"delta1_gamma", p.delta1},
              {"delta2_gamma", p.delta2},         {"gamma_rad_s", p.gamma},
              {"gamma_c_gamma", p.gamma_c},       {"density_m3", p.density},
              {"length_m", p.length},             {"hf_split_gamma", p.hf_split},
              {"wavelength_m", p.wavelength},     {"dipole_cm", p.dipole},
              {"epsilon_pump", p.epsilon_pump},   {"temperature_k", p.temperature},
              {"atomic_mass_kg", p.atomic_mass}};
}

const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> keys = {
      "omega_rabi_gamma", "omega_rabi_hz", "delta1_gamma",  "delta1_hz",   "delta2_gamma",
      "delta2_hz",        "gamma_rad_s",   "gamma_hz",      "gamma_c_gamma", "gamma_c_hz",
      "hf_split_gamma",   "hf_split_hz",   "density_m3",    "density_cm3", "length_m",
      "wavelength_m",     "dipole_cm",     "epsilon_pump",  "temperature_k",
      "atomic_mass_kg",   "atomic_mass_u"};
  return keys;
}

BeamKinematics kinematics(const ModelParams& params, double delta, double theta) {
  params.validate();
  if (!std::isfinite(delta)) throw ValidationError("two-photon detuning must be finite");
  if (!(theta >= 0.0 && theta < std::numbers::pi / 2)) {
    throw ValidationError("pump-probe angle must lie in [0, pi/2)");
  }
  BeamKinematics kin;
  kin.gamma = params.gamma;
  kin.theta = theta;
  kin.omega0 = constants::two_pi * constants::speed_of_light / params.wavelength;
  kin.omegap = kin.omega0 - (params.hf_split + delta) * params.gamma;
  kin.omegac = 2.0 * kin.omega0 - kin.omegap;
  kin.k0 = kin.omega0 / constants::speed_of_light;
  kin.kp = kin.omegap / constants::speed_of_light;
  kin.kc = kin.omegac / constants::speed_of_light;
  if (!(kin.kp > 0.0)) throw ValidationError("probe frequency is not positive");
  return kin;
}

}  // namespace lambda4wm
