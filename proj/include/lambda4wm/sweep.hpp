#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lambda4wm/doppler.hpp"
#include "lambda4wm/params.hpp"

namespace lambda4wm {

enum class AxisKind { theta_deg, dkz };

struct AxisSpec {
  AxisKind kind = AxisKind::theta_deg;
  std::vector<double> values;  // degrees or rad/m
};

std::string axis_name(AxisKind kind);  // "theta_deg" or "dkz_rad_m"

/// n evenly spaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int n);

/// gp(i, j), gc(i, j) at (delta_axis[i], second.values[j]); NaN marks a cell
/// whose evaluation failed.
struct GainMap {
  std::vector<double> delta_axis;
  AxisSpec second;
  Eigen::MatrixXd gp, gc;
  ModelParams params;
  DopplerConfig doppler;
  int missing = 0;
};

/// Runs body(0..n-1) on `threads` workers; each index is handled exactly once.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

/// Default worker count: LAMBDA4WM_THREADS if set, else hardware concurrency.
int default_threads();

GainMap gain_map(const ModelParams& params, const std::vector<double>& deltas,
                 const AxisSpec& second, const DopplerConfig& doppler = {}, int threads = 1);

}  // namespace lambda4wm
