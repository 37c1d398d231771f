#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lsrf {

/// Nodes and weights of a fixed quadrature rule.  For the probability rules
/// the weights sum to one and E[f] is approximated by sum_i w_i f(x_i); for
/// gauss_legendre the weights integrate against Lebesgue measure on [a,b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

namespace detail {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix.  Weights come
// from the Christoffel function, w_i = mu0 / sum_k e_k(x_i)^2 with e_k the
// orthonormal polynomials of the measure.  The eigenvector route puts rounding
// noise (~1e-32) where true weights underflow, and the far-tail polynomial
// values are large enough to turn that into O(1) quadrature error; the
// Christoffel sum instead saturates and the weight goes truthfully to zero.
inline QuadratureRule golub_welsch(const Eigen::VectorXd& diag,
                                   const Eigen::VectorXd& subdiag,
                                   double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, subdiag, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("quadrature: tridiagonal eigensolve failed");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = solver.eigenvalues()[i];
    rule.nodes[i] = x;
    double prev = 0.0, cur = 1.0, sum = 1.0;
    for (int k = 0; k + 1 < n; ++k) {
      const double bk = (k > 0) ? subdiag[k - 1] : 0.0;
      const double next = ((x - diag[k]) * cur - bk * prev) / subdiag[k];
      prev = cur;
      cur = next;
      sum += cur * cur;
      if (sum > 1e300) {
        sum = std::numeric_limits<double>::infinity();
        break;
      }
    }
    rule.weights[i] = mu0 / sum;
    total += rule.weights[i];
  }
  // Rescale so the weights sum to mu0 exactly up to one rounding.
  const double fix = mu0 / total;
  for (double& w : rule.weights) w *= fix;
  return rule;
}

}  // namespace detail

/// Probability rule for the standard Gaussian: sum_i w_i f(x_i) ~ E[f(Z)].
inline QuadratureRule gauss_hermite_prob(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_prob: n must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
  QuadratureRule rule = detail::golub_welsch(diag, sub, 1.0);
  for (double& x : rule.nodes) x *= std::sqrt(2.0);
  return rule;
}

/// Probability rule for Gamma(alpha + 1, scale): nodes on (0, inf),
/// weights sum to one.
inline QuadratureRule gauss_laguerre_prob(int n, double alpha,
                                          double scale = 1.0) {
  if (n < 1) throw std::invalid_argument("gauss_laguerre_prob: n must be >= 1");
  if (alpha <= -1.0)
    throw std::invalid_argument("gauss_laguerre_prob: alpha must be > -1");
  if (scale <= 0.0)
    throw std::invalid_argument("gauss_laguerre_prob: scale must be > 0");
  Eigen::VectorXd diag(n), sub(n - 1);
  for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + alpha + 1.0;
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k * (k + alpha));
  QuadratureRule rule = detail::golub_welsch(diag, sub, 1.0);
  for (double& x : rule.nodes) x *= scale;
  return rule;
}

/// Lebesgue rule on [a,b]: sum_i w_i f(x_i) ~ int_a^b f(x) dx.
inline QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre: need a < b");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  QuadratureRule rule = detail::golub_welsch(diag, sub, 2.0);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

}  // namespace lsrf
