#include "lambda4wm/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "lambda4wm/errors.hpp"

namespace lambda4wm {

QuadratureRule gauss_hermite_rule(int n) {
  if (n < 1) throw ValidationError("gauss_hermite_rule needs n >= 1");
  // Probabilists' Hermite recurrence: off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  if (eig.info() != Eigen::Success) throw NumericalError("Golub-Welsch eigensolve failed");

  QuadratureRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();
  // Exact symmetry about zero; the eigensolver leaves ~1e-15 asymmetry.
  for (int k = 0; k < n / 2; ++k) {
    const double x = 0.5 * (rule.nodes(n - 1 - k) - rule.nodes(k));
    const double w = 0.5 * (rule.weights(n - 1 - k) + rule.weights(k));
    rule.nodes(k) = -x, rule.nodes(n - 1 - k) = x;
    rule.weights(k) = rule.weights(n - 1 - k) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  return rule;
}

}  // namespace lambda4wm
