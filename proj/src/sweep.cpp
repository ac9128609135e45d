#include "lambda4wm/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "lambda4wm/errors.hpp"
#include "lambda4wm/propagation.hpp"

namespace lambda4wm {

namespace {

bool monotone(const std::vector<double>& v) {
  if (v.size() < 2) return true;
  bool up = true, down = true;
  for (std::size_t k = 1; k < v.size(); ++k) {
    up = up && v[k] > v[k - 1];
    down = down && v[k] < v[k - 1];
  }
  return up || down;
}

}  // namespace

std::string axis_name(AxisKind kind) {
  return kind == AxisKind::theta_deg ? "theta_deg" : "dkz_rad_m";
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ValidationError("grid needs at least one point");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = lo + (hi - lo) * k / (n - 1);
  out.back() = hi;
  return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex guard;
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) {
      try {
        body(k);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int default_threads() {
  if (const char* env = std::getenv("LAMBDA4WM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ValidationError(std::string("LAMBDA4WM_THREADS must be a positive integer, got '") +
                            env + "'");
    }
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

GainMap gain_map(const ModelParams& params, const std::vector<double>& deltas,
                 const AxisSpec& second, const DopplerConfig& doppler, int threads) {
  params.validate();
  if (doppler.enabled) doppler.validate();
  if (deltas.empty() || second.values.empty()) throw ValidationError("gain map axes must be non-empty");
  if (!monotone(deltas) || !monotone(second.values)) {
    throw ValidationError("gain map axes must be strictly monotone");
  }

  const auto nd = static_cast<Eigen::Index>(deltas.size());
  const auto ns = static_cast<Eigen::Index>(second.values.size());
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  GainMap map{deltas, second, Eigen::MatrixXd::Constant(nd, ns, nan),
              Eigen::MatrixXd::Constant(nd, ns, nan), params, doppler, 0};
  const double n0 = params.pump_index();

  // Rows are independent and each cell is written by one worker only.
  parallel_for(static_cast<int>(nd), threads, [&](int i) {
    const double delta = deltas[i];
    auto store = [&](Eigen::Index j, const FieldPair& f) {
      map.gp(i, j) = f.g_p;
      map.gc(i, j) = f.g_c;
    };
    // theta enters the Doppler average through the two-photon shift, so only
    // the unaveraged susceptibilities can be shared along a theta row.
    const bool per_cell = doppler.enabled && second.kind == AxisKind::theta_deg;
    SusceptibilitySet chi;
    if (!per_cell) {
      try {
        const auto kin0 = kinematics(params, delta, 0.0);
        chi = doppler.enabled ? averaged_susceptibilities(params, delta, kin0, doppler)
                              : susceptibilities(params, delta);
      } catch (const std::exception&) {
        return;
      }
    }
    for (Eigen::Index j = 0; j < ns; ++j) {
      try {
        if (second.kind == AxisKind::dkz) {
          const auto kin = kinematics(params, delta, 0.0);
          store(j, solve_closed_form(coupling_at(chi, kin, second.values[j]), params.length));
        } else {
          const auto kin = kinematics(params, delta, deg_to_rad(second.values[j]));
          const auto c = per_cell ? averaged_susceptibilities(params, delta, kin, doppler) : chi;
          store(j, solve_closed_form(coupling(c, kin, n0), params.length));
        }
      } catch (const std::exception&) {
        // left as NaN
      }
    }
  });
  map.missing = static_cast<int>(map.gp.array().isNaN().count());
  return map;
}

}  // namespace lambda4wm
