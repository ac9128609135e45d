#include "lambda4wm/steady_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "lambda4wm/errors.hpp"

namespace lambda4wm {

namespace {

using cdouble = std::complex<double>;
using Vec16 = Eigen::Matrix<cdouble, 16, 1>;

constexpr int idx(int n, int m) { return 4 * n + m; }

Eigen::Matrix4cd unvec(const Vec16& v) {
  Eigen::Matrix4cd s;
  for (int n = 0; n < 4; ++n)
    for (int m = 0; m < 4; ++m) s(n, m) = v(idx(n, m));
  return s;
}

// Real coordinates of a unit-trace hermitian matrix: rho11, rho22, rho33, then Re and Im of each
// upper off-diagonal entry. rho44 = 1 - rho11 - rho22 - rho33.
using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat15 = Eigen::Matrix<double, 15, 15>;
constexpr std::array<std::pair<int, int>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

Vec16 to_matrix(const Vec15& y, double unit) {
  Vec16 v = Vec16::Zero();
  double rest = unit;
  for (int n = 0; n < 3; ++n) v(idx(n, n)) = y(n), rest -= y(n);
  v(idx(3, 3)) = rest;
  for (int k = 0; k < 6; ++k) {
    const auto [n, m] = kPairs[k];
    v(idx(n, m)) = cdouble(y(3 + 2 * k), y(4 + 2 * k));
    v(idx(m, n)) = std::conj(v(idx(n, m)));
  }
  return v;
}

Vec15 to_coords(const Vec16& v) {
  Vec15 y;
  for (int n = 0; n < 3; ++n) y(n) = v(idx(n, n)).real();
  for (int k = 0; k < 6; ++k) {
    const auto [n, m] = kPairs[k];
    y(3 + 2 * k) = v(idx(n, m)).real();
    y(4 + 2 * k) = v(idx(n, m)).imag();
  }
  return y;
}

double max_rel_diff(const SusceptibilitySet& a, const SusceptibilitySet& b) {
  const auto va = a.as_vector(), vb = b.as_vector();
  const double floor = 1e-9 * vb.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) {
    worst = std::max(worst, std::abs(va(k) - vb(k)) / std::max(std::abs(vb(k)), floor));
  }
  return worst;
}

}  // namespace

Liouvillian liouvillian(const ModelParams& params, double delta, cdouble rabi_p, cdouble rabi_c) {
  Eigen::Matrix4cd H = Eigen::Matrix4cd::Zero();
  H.diagonal() << 0.0, -delta, -params.delta1, -params.delta2;
  auto couple = [&H](int e, int g, cdouble omega) {
    H(e, g) += -0.5 * omega;
    H(g, e) += -0.5 * std::conj(omega);
  };
  couple(2, 0, params.omega_rabi);
  couple(3, 1, params.omega_rabi);
  couple(2, 1, rabi_p);
  couple(3, 0, rabi_c);

  // Coherence damping rates by unordered level pair.
  double rate[4][4] = {};
  auto set_rate = [&rate](int n, int m, double r) { rate[n][m] = rate[m][n] = r; };
  set_rate(0, 1, params.gamma_c);
  set_rate(0, 2, 0.5), set_rate(0, 3, 0.5), set_rate(1, 2, 0.5), set_rate(1, 3, 0.5);
  set_rate(2, 3, 1.0);

  const cdouble i(0.0, 1.0);
  Liouvillian L = Liouvillian::Zero();
  for (int n = 0; n < 4; ++n) {
    for (int m = 0; m < 4; ++m) {
      const int r = idx(n, m);
      for (int k = 0; k < 4; ++k) {
        L(r, idx(k, m)) += -i * H(n, k);
        L(r, idx(n, k)) += i * H(k, m);
      }
      if (n != m) L(r, r) -= rate[n][m];
    }
  }
  for (int e : {2, 3}) {
    L(idx(e, e), idx(e, e)) -= 1.0;
    L(idx(0, 0), idx(e, e)) += 0.5;
    L(idx(1, 1), idx(e, e)) += 0.5;
  }
  return L;
}

DensityMatrixState evolve_to_steady_state(const ModelParams& params, double delta, cdouble rabi_p,
                                          cdouble rabi_c, const OracleOptions& opts) {
  params.validate();
  const double limit = 1e-3 * params.omega_rabi;
  if (std::abs(rabi_p) > limit || std::abs(rabi_c) > limit) {
    throw ValidationError("probe and conjugate seeds must not exceed 1e-3 of the pump Rabi frequency");
  }
  const Liouvillian L = liouvillian(params, delta, rabi_p, rabi_c);

  // dy/dt = A y + b in real coordinates.
  Mat15 A;
  for (int k = 0; k < 15; ++k) {
    Vec15 e = Vec15::Zero();
    e(k) = 1.0;
    A.col(k) = to_coords(L * to_matrix(e, 0.0));
  }
  const Vec15 b = to_coords(L * to_matrix(Vec15::Zero(), 1.0));

  Vec16 start = Vec16::Zero();
  if (opts.start == InitialState::ground1) {
    start(idx(0, 0)) = 1.0;
  } else {
    for (int n = 0; n < 4; ++n) start(idx(n, n)) = 0.25;
  }
  Vec15 y = to_coords(start);
  Vec16 rho = to_matrix(y, 1.0);

  DensityMatrixState state;
  double h = opts.initial_step;
  double r_prev = (L * rho).cwiseAbs().maxCoeff();
  for (int step = 1; step <= opts.max_steps; ++step) {
    const Vec15 rhs = y + h * b;
    y = (Mat15::Identity() - h * A).partialPivLu().solve(rhs);
    rho = to_matrix(y, 1.0);
    state.time += h;
    const double r = (L * rho).cwiseAbs().maxCoeff();
    state.steps = step;
    state.residual = r;
    if (opts.on_step) {
      state.sigma = unvec(rho);
      opts.on_step(state);
    }
    if (!std::isfinite(r)) throw NumericalError("steady-state evolution produced a non-finite state");
    if (r < opts.residual_tol) {
      state.sigma = unvec(rho);
      return state;
    }
    h *= std::clamp(r_prev / std::max(r, 1e-300), 1.1, 10.0);
    r_prev = r;
  }
  std::ostringstream msg;
  msg << "steady state not reached after " << opts.max_steps << " steps, residual "
      << state.residual;
  throw NumericalError(msg.str());
}

OracleReport oracle_report(const ModelParams& params, double delta, const OracleOptions& opts) {
  if (!(params.omega_rabi > 0.0)) throw DomainError("oracle needs omega_rabi > 0");
  if (!(opts.seed_fraction > 0.0 && opts.seed_fraction <= 1e-3)) {
    throw ValidationError("seed_fraction must lie in (0, 1e-3]");
  }
  const double scale = params.chi_prefactor();
  OracleReport report;

  // Real seeds: sigma_32 = (chi_pp Op + chi_pc Oc^*)/2, sigma_41 = (chi_cc Oc + chi_cp Op^*)/2.
  auto extract = [&](double seed, bool keep) {
    const auto probe = evolve_to_steady_state(params, delta, seed, 0.0, opts);
    const auto conj = evolve_to_steady_state(params, delta, 0.0, seed, opts);
    if (keep) report.probe_run = probe, report.conjugate_run = conj;
    const double f = 2.0 * scale / seed;
    return SusceptibilitySet{f * probe.sigma(2, 1), f * conj.sigma(3, 0), f * conj.sigma(2, 1),
                             f * probe.sigma(3, 0)};
  };
  const double seed = opts.seed_fraction * params.omega_rabi;
  const auto full = extract(seed, true);
  const auto half = extract(0.5 * seed, false);
  report.chi_half_seed = half;
  report.linearity = max_rel_diff(full, half);
  if (report.linearity > opts.linearity_tol) {
    std::ostringstream msg;
    msg << "seed too large: halving it changes chi by " << report.linearity << " (relative)";
    throw ValidationError(msg.str());
  }
  if (opts.richardson) {
    report.chi = SusceptibilitySet::from_vector((4.0 * half.as_vector() - full.as_vector()) / 3.0);
  } else {
    report.chi = half;
  }
  return report;
}

SusceptibilitySet extract_susceptibilities(const ModelParams& params, double delta,
                                           const OracleOptions& opts) {
  return oracle_report(params, delta, opts).chi;
}

}  // namespace lambda4wm
