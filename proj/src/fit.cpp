#include "lambda4wm/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "lambda4wm/errors.hpp"
#include "lambda4wm/propagation.hpp"
#include "lambda4wm/sweep.hpp"

namespace lambda4wm {

namespace {

constexpr double kEpsUnit = 1e-5;

bool is_log(FitParam p) { return p != FitParam::epsilon_pump; }

double to_search(FitParam p, double v) { return is_log(p) ? std::log(v) : v / kEpsUnit; }
double from_search(FitParam p, double u) { return is_log(p) ? std::exp(u) : u * kEpsUnit; }

}  // namespace

std::string fit_param_name(FitParam p) {
  switch (p) {
    case FitParam::omega_rabi: return "omega_rabi";
    case FitParam::density: return "density";
    case FitParam::gamma_c: return "gamma_c";
    case FitParam::epsilon_pump: return "epsilon_pump";
  }
  return "?";
}

FitParam parse_fit_param(const std::string& name) {
  for (auto p : {FitParam::omega_rabi, FitParam::density, FitParam::gamma_c,
                 FitParam::epsilon_pump}) {
    if (fit_param_name(p) == name) return p;
  }
  throw ValidationError("unknown fit parameter '" + name +
                        "' (expected omega_rabi, density, gamma_c or epsilon_pump)");
}

double get_param(const ModelParams& params, FitParam p) {
  switch (p) {
    case FitParam::omega_rabi: return params.omega_rabi;
    case FitParam::density: return params.density;
    case FitParam::gamma_c: return params.gamma_c;
    case FitParam::epsilon_pump: return params.epsilon_pump;
  }
  return 0.0;
}

void set_param(ModelParams& params, FitParam p, double value) {
  switch (p) {
    case FitParam::omega_rabi: params.omega_rabi = value; break;
    case FitParam::density: params.density = value; break;
    case FitParam::gamma_c: params.gamma_c = value; break;
    case FitParam::epsilon_pump: params.epsilon_pump = value; break;
  }
}

Bounds default_bounds(FitParam p) {
  switch (p) {
    case FitParam::omega_rabi: return {1e-3, 1e4};
    case FitParam::density: return {1e10, 1e24};
    case FitParam::gamma_c: return {1e-6, 1e2};
    case FitParam::epsilon_pump: return {-1e-4, 1e-4};
  }
  return {0.0, 0.0};
}

std::string fit_status_name(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iter: return "max-iter";
    case FitStatus::stalled: return "stalled";
  }
  return "?";
}

std::optional<Eigen::VectorXd> log_gain_residuals(const GainDataset& data,
                                                  const ModelParams& params,
                                                  const DopplerConfig& doppler, int threads) {
  const auto n = static_cast<Eigen::Index>(data.records.size());
  Eigen::VectorXd r(2 * n);
  std::atomic<bool> ok{true};
  parallel_for(static_cast<int>(n), threads, [&](int k) {
    const auto& rec = data.records[k];
    try {
      const auto f = solve_twin_beam(params, rec.delta, deg_to_rad(rec.theta_deg), doppler);
      const double w = std::sqrt(rec.weight);
      r(k) = w * (f.log_g_p - std::log(rec.g_p));
      r(n + k) = w * (f.log_g_c - std::log(rec.g_c));
      if (!std::isfinite(r(k)) || !std::isfinite(r(n + k))) ok = false;
    } catch (const std::exception&) {
      ok = false;
    }
  });
  if (!ok) return std::nullopt;
  return r;
}

FitResult fit_model(const GainDataset& data_in, const ModelParams& initial,
                    const FitOptions& opts) {
  initial.validate();
  if (opts.doppler.enabled) opts.doppler.validate();
  validate_dataset(data_in);

  GainDataset data = data_in;
  if (opts.theta_window_deg) {
    const auto [lo, hi] = *opts.theta_window_deg;
    std::erase_if(data.records,
                  [lo, hi](const GainRecord& r) { return r.theta_deg < lo || r.theta_deg > hi; });
    if (data.records.empty()) throw ValidationError("no records inside theta_window_deg");
  }

  const auto& free = opts.free;
  const auto nf = static_cast<Eigen::Index>(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) {
    for (std::size_t b = a + 1; b < free.size(); ++b) {
      if (free[a] == free[b]) throw ValidationError("fit parameter listed twice: " + fit_param_name(free[a]));
    }
  }

  Eigen::VectorXd u(nf), lo(nf), hi(nf);
  for (Eigen::Index j = 0; j < nf; ++j) {
    const FitParam p = free[j];
    auto it = opts.bounds.find(p);
    const Bounds b = it != opts.bounds.end() ? it->second : default_bounds(p);
    const std::string name = fit_param_name(p);
    if (!(b.lo < b.hi)) throw ValidationError("bounds for '" + name + "' must satisfy lo < hi");
    if (is_log(p) && !(b.lo > 0.0)) throw ValidationError("bounds for '" + name + "' must be positive");
    if (p == FitParam::epsilon_pump && (b.lo < -1e-4 || b.hi > 1e-4)) {
      throw ValidationError("bounds for 'epsilon_pump' must lie within [-1e-4, 1e-4]");
    }
    const double v = get_param(initial, p);
    if (!(v >= b.lo && v <= b.hi)) {
      throw ValidationError("initial '" + name + "' lies outside its bounds");
    }
    u(j) = to_search(p, v);
    lo(j) = to_search(p, b.lo);
    hi(j) = to_search(p, b.hi);
  }

  auto params_at = [&](const Eigen::VectorXd& x) {
    ModelParams p = initial;
    for (Eigen::Index j = 0; j < nf; ++j) set_param(p, free[j], from_search(free[j], x(j)));
    return p;
  };
  FitResult out;
  out.free = free;
  out.points = data.records.size();
  auto residuals = [&](const Eigen::VectorXd& x) {
    ++out.evaluations;
    return log_gain_residuals(data, params_at(x), opts.doppler, opts.threads);
  };

  auto r0 = residuals(u);
  if (!r0) throw NumericalError("model is not finite at the initial parameters");
  Eigen::VectorXd r = *r0;
  double F = r.squaredNorm();
  out.objective_history.push_back(F);

  auto jacobian = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& rx) {
    Eigen::MatrixXd J(rx.size(), nf);
    for (Eigen::Index j = 0; j < nf; ++j) {
      double h = is_log(free[j]) ? opts.rel_step : opts.rel_step * std::max(std::abs(x(j)), 1.0);
      if (x(j) + h > hi(j)) h = -h;
      Eigen::VectorXd xs = x;
      xs(j) += h;
      auto rs = residuals(xs);
      if (!rs) {
        std::ostringstream msg;
        msg << "model not finite while differentiating along " << fit_param_name(free[j]);
        throw NumericalError(msg.str());
      }
      J.col(j) = (*rs - rx) / h;
    }
    return J;
  };

  double lambda = 1e-3;
  out.status = FitStatus::max_iter;
  if (nf == 0) {
    out.status = FitStatus::converged;
  }
  for (int iter = 0; nf > 0 && iter < opts.max_iterations; ++iter) {
    out.iterations = iter + 1;
    if (F < 1e-28) {
      out.status = FitStatus::converged;
      break;
    }
    const Eigen::MatrixXd J = jacobian(u, r);
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    const double dfloor = 1e-12 * std::max(A.diagonal().maxCoeff(), 1e-300);

    bool accepted = false, done = false;
    while (!accepted && !done) {
      Eigen::MatrixXd M = A;
      M.diagonal() += lambda * A.diagonal().cwiseMax(dfloor);
      const Eigen::VectorXd step = M.ldlt().solve(-g);
      const Eigen::VectorXd trial = (u + step).cwiseMax(lo).cwiseMin(hi);
      const Eigen::VectorXd s = trial - u;
      const double predicted = -2.0 * g.dot(s) - s.dot(A * s);

      const bool tiny_step = s.norm() <= opts.xtol * (u.norm() + opts.xtol);
      if (step.allFinite() && (tiny_step || (predicted <= opts.ftol * F && lambda <= 1.0))) {
        // Nothing left to gain along any admissible direction.
        out.status = FitStatus::converged;
        done = true;
        break;
      }
      auto rt = step.allFinite() ? residuals(trial) : std::nullopt;
      const double Ft = rt ? rt->squaredNorm() : INFINITY;
      if (rt && Ft < F) {
        const double gain = (F - Ft) / F;
        u = trial;
        r = *rt;
        F = Ft;
        out.objective_history.push_back(F);
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
        if (gain < opts.ftol) {
          out.status = FitStatus::converged;
          done = true;
        }
      } else {
        lambda *= 4.0;
        if (lambda > opts.max_damping) {
          out.status = FitStatus::stalled;
          out.message = "damping exceeded its cap without reducing the objective";
          done = true;
        }
      }
    }
    if (done) break;
  }

  out.params_out = params_at(u);
  out.values.resize(nf);
  for (Eigen::Index j = 0; j < nf; ++j) out.values(j) = get_param(out.params_out, free[j]);
  out.residuals = r;
  if (nf > 0) {
    const Eigen::MatrixXd J = jacobian(u, r);
    const double dof = std::max<double>(1.0, static_cast<double>(r.size() - nf));
    out.covariance = (F / dof) * (J.transpose() * J).completeOrthogonalDecomposition().pseudoInverse();
  }
  return out;
}

}  // namespace lambda4wm
