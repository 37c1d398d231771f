#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsrf/quadrature.hpp"

namespace lsrf {

/// A density sampled on an integration grid: paired Lebesgue weights and
/// density values, so that sums w*f approximate integrals of f.  Build from a
/// Lebesgue quadrature rule (from_rule), from plain abscissae with trapezoid
/// weights (on_grid), or as a tensor product of two densities.
class GriddedDensity {
 public:
  GriddedDensity(std::vector<double> weights, std::vector<double> values)
      : weights_(std::move(weights)), values_(std::move(values)) {
    validate();
  }

  static GriddedDensity from_rule(const QuadratureRule& rule,
                                  std::vector<double> values) {
    return GriddedDensity(rule.weights, std::move(values));
  }

  /// Trapezoid weights on strictly increasing nodes.
  static GriddedDensity on_grid(const std::vector<double>& nodes,
                                std::vector<double> values) {
    const int n = static_cast<int>(nodes.size());
    if (n < 2)
      throw std::invalid_argument("GriddedDensity: need at least two nodes");
    for (int i = 1; i < n; ++i)
      if (!(nodes[i] > nodes[i - 1]))
        throw std::invalid_argument(
            "GriddedDensity: nodes must be strictly increasing");
    std::vector<double> w(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
      const double h = 0.5 * (nodes[i + 1] - nodes[i]);
      w[i] += h;
      w[i + 1] += h;
    }
    GriddedDensity d(std::move(w), std::move(values));
    d.nodes_ = nodes;
    return d;
  }

  /// Independent product f(x)g(y) on the tensor grid, row-major in x.
  static GriddedDensity product(const GriddedDensity& a,
                                const GriddedDensity& b) {
    std::vector<double> w, v;
    w.reserve(a.size() * b.size());
    v.reserve(a.size() * b.size());
    for (int i = 0; i < a.size(); ++i)
      for (int j = 0; j < b.size(); ++j) {
        w.push_back(a.weights_[i] * b.weights_[j]);
        v.push_back(a.values_[i] * b.values_[j]);
      }
    return GriddedDensity(std::move(w), std::move(v));
  }

  int size() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& values() const { return values_; }

  bool shares_grid(const GriddedDensity& other) const {
    return weights_ == other.weights_ &&
           (!nodes_ || !other.nodes_ || *nodes_ == *other.nodes_);
  }

 private:
  void validate() const {
    if (weights_.size() != values_.size() || values_.empty())
      throw std::invalid_argument(
          "GriddedDensity: weights/values size mismatch");
    double mass = 0.0;
    for (size_t i = 0; i < values_.size(); ++i) {
      if (!(weights_[i] >= 0.0))
        throw std::invalid_argument("GriddedDensity: negative weight");
      if (!(values_[i] >= 0.0))
        throw std::invalid_argument("GriddedDensity: negative density value");
      mass += weights_[i] * values_[i];
    }
    if (std::abs(mass - 1.0) > 1e-8)
      throw std::invalid_argument(
          "GriddedDensity: density does not integrate to 1 (mass " +
          std::to_string(mass) + ")");
  }

  std::vector<double> weights_;
  std::vector<double> values_;
  std::optional<std::vector<double>> nodes_;
};

/// -int f ln f, with 0 ln 0 := 0.
inline double shannon_entropy(const GriddedDensity& f) {
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double v = f.values()[i];
    if (v > 0.0) acc -= f.weights()[i] * v * std::log(v);
  }
  return acc;
}

/// (1/(1-q)) ln int f^q for q > 0, q != 1.
inline double renyi_entropy(const GriddedDensity& f, double q) {
  if (!(q > 0.0) || q == 1.0)
    throw std::invalid_argument("renyi_entropy: need q > 0, q != 1");
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i)
    acc += f.weights()[i] * std::pow(f.values()[i], q);
  return std::log(acc) / (1.0 - q);
}

namespace detail {
inline void require_shared_grid(const GriddedDensity& f,
                                const GriddedDensity& g, const char* op) {
  if (f.size() != g.size() || !f.shares_grid(g))
    throw std::invalid_argument(std::string(op) +
                                ": densities on different grids");
}
}  // namespace detail

/// int f ln(f/g); requires g > 0 wherever f > 0.
inline double kl_divergence(const GriddedDensity& f, const GriddedDensity& g) {
  detail::require_shared_grid(f, g, "kl_divergence");
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double fv = f.values()[i];
    if (fv <= 0.0) continue;
    const double gv = g.values()[i];
    if (!(gv > 0.0))
      throw std::runtime_error("kl_divergence: not absolutely continuous");
    acc += f.weights()[i] * fv * std::log(fv / gv);
  }
  return acc;
}

/// (1/(q-1)) ln int f (f/g)^{q-1}; q > 0, q != 1.
inline double renyi_divergence(const GriddedDensity& f,
                               const GriddedDensity& g, double q) {
  if (!(q > 0.0) || q == 1.0)
    throw std::invalid_argument("renyi_divergence: need q > 0, q != 1");
  detail::require_shared_grid(f, g, "renyi_divergence");
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double fv = f.values()[i];
    if (fv <= 0.0) continue;
    const double gv = g.values()[i];
    if (!(gv > 0.0))
      throw std::runtime_error("renyi_divergence: not absolutely continuous");
    acc += f.weights()[i] * fv * std::pow(fv / gv, q - 1.0);
  }
  return std::log(acc) / (q - 1.0);
}

/// exp(H), saturated at 1e300; the flag records saturation when supplied.
inline double diversity_index(double entropy_value, bool* saturated = nullptr) {
  if (!std::isfinite(entropy_value))
    throw std::invalid_argument("diversity_index: entropy must be finite");
  if (saturated) *saturated = false;
  if (entropy_value > 690.0) {
    if (saturated) *saturated = true;
    return 1e300;
  }
  return std::exp(entropy_value);
}

namespace detail {
inline double entropy_of_order(const GriddedDensity& f, double q) {
  return q == 1.0 ? shannon_entropy(f) : renyi_entropy(f, q);
}
inline double divergence_of_order(const GriddedDensity& f,
                                  const GriddedDensity& g, double q) {
  return q == 1.0 ? kl_divergence(f, g) : renyi_divergence(f, g, q);
}
}  // namespace detail

/// exp(H_alpha - H_beta) = DI_alpha / DI_beta.
inline double complexity(const GriddedDensity& f, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("complexity: orders must be > 0");
  return std::exp(detail::entropy_of_order(f, alpha) -
                  detail::entropy_of_order(f, beta));
}

/// exp(D_alpha(f||g) - D_beta(f||g)).
inline double relative_complexity(const GriddedDensity& f,
                                  const GriddedDensity& g, double alpha,
                                  double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("relative_complexity: orders must be > 0");
  return std::exp(detail::divergence_of_order(f, g, alpha) -
                  detail::divergence_of_order(f, g, beta));
}

/// Probability mass function over a finite state space (row-major when the
/// states form a grid).
class FinitePMF {
 public:
  explicit FinitePMF(std::vector<double> probabilities)
      : p_(std::move(probabilities)) {
    if (p_.empty()) throw std::invalid_argument("FinitePMF: empty");
    double total = 0.0;
    for (double v : p_) {
      if (!(v >= 0.0)) throw std::invalid_argument("FinitePMF: negative entry");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("FinitePMF: probabilities must sum to 1");
  }

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[i]; }
  const std::vector<double>& probabilities() const { return p_; }

 private:
  std::vector<double> p_;
};

namespace detail {
inline void joint_marginals(const FinitePMF& joint, int rows, int cols,
                            std::vector<double>& pi, std::vector<double>& pj) {
  if (rows < 1 || cols < 1 || joint.size() != rows * cols)
    throw std::invalid_argument("discrete_mi: pmf is not rows x cols");
  pi.assign(rows, 0.0);
  pj.assign(cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      pi[i] += joint[i * cols + j];
      pj[j] += joint[i * cols + j];
    }
}
}  // namespace detail

/// Shannon mutual information of a joint pmf over a rows x cols grid.
inline double discrete_mi(const FinitePMF& joint, int rows, int cols) {
  std::vector<double> pi, pj;
  detail::joint_marginals(joint, rows, cols, pi, pj);
  double acc = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double p = joint[i * cols + j];
      if (p > 0.0) acc += p * std::log(p / (pi[i] * pj[j]));
    }
  return acc;
}

/// Renyi mutual information of order q != 1 of a joint pmf: the Renyi
/// divergence between the joint and the product of its marginals.
inline double discrete_renyi_mi(const FinitePMF& joint, int rows, int cols,
                                double q) {
  if (!(q > 0.0) || q == 1.0)
    throw std::invalid_argument("discrete_renyi_mi: need q > 0, q != 1");
  std::vector<double> pi, pj;
  detail::joint_marginals(joint, rows, cols, pi, pj);
  double acc = 0.0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double p = joint[i * cols + j];
      if (p <= 0.0) continue;
      acc += p * std::pow(p / (pi[i] * pj[j]), q - 1.0);
    }
  return std::log(acc) / (q - 1.0);
}

/// Mutual information of a bivariate standard normal pair with correlation c.
/// q = 1 uses the closed form -0.5 ln(1-c^2); other orders are integrated by
/// brute force on [-8,8]^2 so this stays an independent oracle.
inline double gaussian_mi_exact(double c, double q = 1.0) {
  if (!(std::abs(c) < 1.0))
    throw std::invalid_argument("gaussian_mi_exact: need |c| < 1");
  if (!(q > 0.0)) throw std::invalid_argument("gaussian_mi_exact: need q > 0");
  if (q == 1.0) return -0.5 * std::log1p(-c * c);
  const QuadratureRule leg = gauss_legendre(320, -8.0, 8.0);
  const double det = 1.0 - c * c;
  const double two_pi = 2.0 * M_PI;
  double acc = 0.0;
  for (int i = 0; i < leg.size(); ++i) {
    const double u = leg.nodes[i];
    for (int j = 0; j < leg.size(); ++j) {
      const double v = leg.nodes[j];
      const double f =
          std::exp(-(u * u - 2.0 * c * u * v + v * v) / (2.0 * det)) /
          (two_pi * std::sqrt(det));
      const double g = std::exp(-(u * u + v * v) / 2.0) / two_pi;
      acc += leg.weights[i] * leg.weights[j] * f * std::pow(f / g, q - 1.0);
    }
  }
  return std::log(acc) / (q - 1.0);
}

}  // namespace lsrf
