#pragma once

#include <algorithm>
#include <array>
#include <queue>
#include <vector>

#include <Eigen/Core>

namespace lambda4wm {

/// Nodes and weights for the standard normal density: sum w_i f(x_i) ~ E[f(X)].
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Golub-Welsch on the Hermite Jacobi matrix; weights sum to 1.
QuadratureRule gauss_hermite_rule(int n);

template <class Vec>
struct AdaptiveResult {
  Vec value;
  Vec error;
  int evaluations = 0;
  int panels = 0;
  bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule, nodes on [0, 1] descending.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class Vec>
struct Panel {
  double a, b;
  Vec value, error;
  double priority;
};

template <class Vec, class F>
Panel<Vec> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const Vec fc = f(c);
  Vec kron = kWgk[7] * fc;
  Vec gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const Vec s = f(c - h * kXgk[j]) + f(c + h * kXgk[j]);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {a, b, Vec(h * kron), Vec((h * (kron - gauss)).cwiseAbs()), 0.0};
}

}  // namespace detail

/// Globally adaptive G7K15 for vector-valued integrands over [a, b].
///
/// Starts from `initial_panels` equal panels and keeps bisecting the panel with
/// the largest scaled error until every component satisfies
/// err_i <= rel_tol max(|I_i|, floor_fraction max_j |I_j|) or `max_panels` is
/// reached. The value is summed left to right, so the result does not depend on
/// heap order.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, int initial_panels, double rel_tol,
                        double floor_fraction = 1e-6, int max_panels = 4096) {
  using Vec = std::decay_t<decltype(f(a))>;
  using Panel = detail::Panel<Vec>;

  std::vector<Panel> done;
  auto cmp = [](const Panel& x, const Panel& y) { return x.priority < y.priority; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> heap(cmp);

  const int n0 = std::max(1, initial_panels);
  std::vector<Panel> first;
  Vec total, err;
  for (int k = 0; k < n0; ++k) {
    first.push_back(detail::gk15<Vec>(f, a + (b - a) * k / n0, a + (b - a) * (k + 1) / n0));
    total = k == 0 ? first.back().value : Vec(total + first.back().value);
    err = k == 0 ? first.back().error : Vec(err + first.back().error);
  }
  // Fixed per-component scale so priorities stay comparable as panels split.
  auto floored = [floor_fraction](const Vec& v) {
    return Vec(v.cwiseAbs().cwiseMax(floor_fraction * v.cwiseAbs().maxCoeff()).cwiseMax(1e-300));
  };
  const Vec scale = floored(total);
  for (auto& p : first) {
    p.priority = (p.error.array() / scale.array()).maxCoeff();
    heap.push(p);
  }

  int evaluations = 15 * n0;
  auto within = [&] {
    return (err.array() <= rel_tol * floored(total).array()).all();
  };
  while (!within() && static_cast<int>(heap.size() + done.size()) < max_panels) {
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = detail::gk15<Vec>(f, worst.a, mid);
    Panel right = detail::gk15<Vec>(f, mid, worst.b);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    for (Panel* p : {&left, &right}) {
      p->priority = (p->error.array() / scale.array()).maxCoeff();
      heap.push(*p);
    }
  }
  const bool converged = within();

  while (!heap.empty()) {
    done.push_back(heap.top());
    heap.pop();
  }
  std::sort(done.begin(), done.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  AdaptiveResult<Vec> out;
  out.value = done.front().value;
  out.error = done.front().error;
  for (std::size_t k = 1; k < done.size(); ++k) {
    out.value += done[k].value;
    out.error += done[k].error;
  }
  out.evaluations = evaluations;
  out.panels = static_cast<int>(done.size());
  out.converged = converged;
  return out;
}

}  // namespace lambda4wm
