#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lambda4wm/dataset.hpp"
#include "lambda4wm/doppler.hpp"
#include "lambda4wm/params.hpp"

namespace lambda4wm {

enum class FitParam { omega_rabi, density, gamma_c, epsilon_pump };

std::string fit_param_name(FitParam p);
FitParam parse_fit_param(const std::string& name);  // throws ValidationError

double get_param(const ModelParams& params, FitParam p);
void set_param(ModelParams& params, FitParam p, double value);

struct Bounds {
  double lo, hi;
};

/// omega_rabi, density and gamma_c are searched in log space, epsilon_pump
/// linearly in units of 1e-5.
Bounds default_bounds(FitParam p);

enum class FitStatus { converged, max_iter, stalled };
std::string fit_status_name(FitStatus s);  // "converged", "max-iter", "stalled"

struct FitOptions {
  std::vector<FitParam> free;
  std::map<FitParam, Bounds> bounds;  // overrides default_bounds
  DopplerConfig doppler;
  std::optional<std::pair<double, double>> theta_window_deg;
  int max_iterations = 200;
  double rel_step = 1e-4;
  double ftol = 1e-12;      // relative objective decrease counted as converged
  double xtol = 1e-10;      // relative step counted as converged
  double max_damping = 1e12;
  int threads = 1;
};

struct FitResult {
  ModelParams params_out;
  std::vector<FitParam> free;
  Eigen::VectorXd values;                // fitted free parameters, physical units
  std::vector<double> objective_history; // one entry per accepted iterate, first = initial
  FitStatus status = FitStatus::converged;
  Eigen::VectorXd residuals;             // [g_p rows..., g_c rows...] of the final iterate
  Eigen::MatrixXd covariance;            // s^2 (J^T J)^-1 in the search coordinates
  int iterations = 0;
  int evaluations = 0;
  std::size_t points = 0;                // records used after the theta window
  std::string message;
};

/// sqrt(w) (log g_model - log g_data), g_p block followed by g_c block. Returns
/// nullopt if the model fails or is non-finite at any record.
std::optional<Eigen::VectorXd> log_gain_residuals(const GainDataset& data,
                                                  const ModelParams& params,
                                                  const DopplerConfig& doppler, int threads = 1);

FitResult fit_model(const GainDataset& data, const ModelParams& initial, const FitOptions& opts);

}  // namespace lambda4wm
