#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsrf/quadrature.hpp"

namespace lsrf {

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Classical probabilists' Hermite polynomial He_k by three-term recurrence.
inline double hermite_he(int k, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int j = 1; j < k; ++j) {
    const double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Classical generalized Laguerre polynomial L_k^(alpha) by recurrence.
inline double laguerre_l(int k, double alpha, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0, cur = 1.0 + alpha - x;
  for (int j = 1; j < k; ++j) {
    const double next =
        ((2.0 * j + alpha + 1.0 - x) * cur - (j + alpha) * prev) / (j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

enum class MarginalFamily { StandardGaussian, Gamma };

/// Marginal density p(u) on its support (a,b): the standard Gaussian on the
/// real line or a Gamma(shape, scale) law on (0, inf).
class MarginalDensity {
 public:
  static MarginalDensity standard_gaussian() { return MarginalDensity(); }

  static MarginalDensity gamma(double shape, double scale) {
    if (shape <= 0.0 || scale <= 0.0)
      throw std::invalid_argument("MarginalDensity: shape and scale must be > 0");
    MarginalDensity m;
    m.family_ = MarginalFamily::Gamma;
    m.shape_ = shape;
    m.scale_ = scale;
    return m;
  }

  MarginalFamily family() const { return family_; }
  double shape() const { return shape_; }
  double scale() const { return scale_; }

  double support_lo() const {
    return family_ == MarginalFamily::StandardGaussian
               ? -std::numeric_limits<double>::infinity()
               : 0.0;
  }
  double support_hi() const { return std::numeric_limits<double>::infinity(); }

  bool in_support(double u) const {
    return family_ == MarginalFamily::StandardGaussian ? std::isfinite(u)
                                                       : u > 0.0;
  }

  double pdf(double u) const {
    if (family_ == MarginalFamily::StandardGaussian) return norm_pdf(u);
    if (u <= 0.0) return 0.0;
    const double s = shape_, th = scale_;
    return std::exp((s - 1.0) * std::log(u) - u / th - std::lgamma(s) -
                    s * std::log(th));
  }

  bool operator==(const MarginalDensity& o) const {
    return family_ == o.family_ && shape_ == o.shape_ && scale_ == o.scale_;
  }

  std::string descriptor() const {
    if (family_ == MarginalFamily::StandardGaussian) return "gaussian";
    return "gamma(shape=" + std::to_string(shape_) +
           ",scale=" + std::to_string(scale_) + ")";
  }

 private:
  MarginalDensity() = default;
  MarginalFamily family_ = MarginalFamily::StandardGaussian;
  double shape_ = 0.0;
  double scale_ = 1.0;
};

enum class BasisKind { HermiteNormalized, LaguerreNormalized };

/// Orthonormal polynomial system {e_k} under the marginal weight p(u)du:
/// normalized probabilists' Hermite for the Gaussian, normalized generalized
/// Laguerre (alpha = shape - 1) for the Gamma marginal.
class OrthonormalBasis {
 public:
  OrthonormalBasis(MarginalDensity marginal, int max_degree)
      : marginal_(marginal), max_degree_(max_degree) {
    if (max_degree < 1)
      throw std::invalid_argument("OrthonormalBasis: max_degree must be >= 1");
    if (max_degree > 64)
      throw std::invalid_argument("OrthonormalBasis: max_degree capped at 64");
    if (marginal_.family() == MarginalFamily::StandardGaussian) {
      kind_ = BasisKind::HermiteNormalized;
      alpha_ = 0.0;
    } else {
      kind_ = BasisKind::LaguerreNormalized;
      alpha_ = marginal_.shape() - 1.0;
    }
  }

  BasisKind kind() const { return kind_; }
  int max_degree() const { return max_degree_; }
  double alpha() const { return alpha_; }
  const MarginalDensity& marginal() const { return marginal_; }

  /// e_k(x): classical polynomial by recurrence divided by the exact norm.
  double eval(int k, double x) const {
    check_degree(k);
    if (!marginal_.in_support(x))
      throw std::domain_error("OrthonormalBasis: x outside support");
    if (kind_ == BasisKind::HermiteNormalized)
      return hermite_he(k, x) / hermite_norm(k);
    return laguerre_l(k, alpha_, x / marginal_.scale()) / laguerre_norm(k);
  }

  /// Fills out[0..K] with e_0(x)..e_K(x) in one recurrence pass.
  void eval_all(double x, std::vector<double>& out) const {
    out.assign(max_degree_ + 1, 0.0);
    if (!marginal_.in_support(x))
      throw std::domain_error("OrthonormalBasis: x outside support");
    if (kind_ == BasisKind::HermiteNormalized) {
      double prev = 1.0, cur = x;
      out[0] = 1.0;
      if (max_degree_ >= 1) out[1] = cur / hermite_norm(1);
      for (int j = 1; j < max_degree_; ++j) {
        const double next = x * cur - j * prev;
        prev = cur;
        cur = next;
        out[j + 1] = cur / hermite_norm(j + 1);
      }
    } else {
      const double t = x / marginal_.scale();
      double prev = 1.0, cur = 1.0 + alpha_ - t;
      out[0] = 1.0;
      if (max_degree_ >= 1) out[1] = cur / laguerre_norm(1);
      for (int j = 1; j < max_degree_; ++j) {
        const double next =
            ((2.0 * j + alpha_ + 1.0 - t) * cur - (j + alpha_) * prev) /
            (j + 1.0);
        prev = cur;
        cur = next;
        out[j + 1] = cur / laguerre_norm(j + 1);
      }
    }
  }

  /// Probability quadrature rule matched to the marginal.
  QuadratureRule prob_rule(int nodes) const {
    if (kind_ == BasisKind::HermiteNormalized) return gauss_hermite_prob(nodes);
    return gauss_laguerre_prob(nodes, alpha_, marginal_.scale());
  }

 private:
  void check_degree(int k) const {
    if (k < 0 || k > max_degree_)
      throw std::out_of_range("OrthonormalBasis: degree out of range");
  }

  // ||He_k|| = sqrt(k!)
  static double hermite_norm(int k) {
    return std::exp(0.5 * std::lgamma(k + 1.0));
  }

  // ||L_k^(alpha)|| = sqrt(Gamma(k+alpha+1) / (k! Gamma(alpha+1)))
  double laguerre_norm(int k) const {
    return std::exp(0.5 * (std::lgamma(k + alpha_ + 1.0) -
                           std::lgamma(k + 1.0) - std::lgamma(alpha_ + 1.0)));
  }

  MarginalDensity marginal_;
  int max_degree_;
  BasisKind kind_;
  double alpha_;
};

/// Expansion coefficients C_0..C_K of a function g in the basis, with the
/// detected rank (smallest k >= 1 with |C_k| above threshold) when computed.
struct CoefficientVector {
  std::vector<double> values;
  OrthonormalBasis basis;
  std::optional<int> rank;

  int max_degree() const { return static_cast<int>(values.size()) - 1; }
};

/// C_k = int g(u) e_k(u) p(u) du by the marginal-matched probability rule.
template <typename G>
CoefficientVector expand(G&& g, const OrthonormalBasis& basis, int K,
                         int nodes = 256) {
  if (K < 0 || K > basis.max_degree())
    throw std::out_of_range("expand: degree out of range");
  const QuadratureRule rule = basis.prob_rule(nodes);
  double gg = 0.0;
  std::vector<double> coeffs(K + 1, 0.0), e;
  for (int i = 0; i < rule.size(); ++i) {
    const double u = rule.nodes[i];
    const double w = rule.weights[i];
    const double gu = g(u);
    gg += w * gu * gu;
    basis.eval_all(u, e);
    for (int k = 0; k <= K; ++k) coeffs[k] += w * gu * e[k];
  }
  if (!std::isfinite(gg) || gg > 1e100)
    throw std::runtime_error("expand: g is not in L2(p)");
  return CoefficientVector{std::move(coeffs), basis, std::nullopt};
}

namespace detail {

// int_lo^hi f(u) p(u) du for a piecewise-smooth f, with infinite endpoints
// handled by the rational map u = c +/- t/(1-t).  Gauss rules applied across
// a jump converge too slowly for coefficient work, so discontinuous
// integrands are split at their breakpoints and each smooth cell integrated
// to near machine accuracy.
template <typename F>
double weighted_cell_integral(const MarginalDensity& marginal, F&& f,
                              double lo, double hi, int nodes = 160) {
  if (!(lo < hi)) return 0.0;
  const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
  auto integrand = [&](double u) { return f(u) * marginal.pdf(u); };
  if (!lo_inf && !hi_inf) {
    const QuadratureRule gl = gauss_legendre(nodes, lo, hi);
    double acc = 0.0;
    for (int i = 0; i < gl.size(); ++i)
      acc += gl.weights[i] * integrand(gl.nodes[i]);
    return acc;
  }
  if (lo_inf && hi_inf) {
    return weighted_cell_integral(marginal, f, lo, 0.0, nodes) +
           weighted_cell_integral(marginal, f, 0.0, hi, nodes);
  }
  const double c = lo_inf ? hi : lo;
  const double sign = lo_inf ? -1.0 : 1.0;
  const QuadratureRule gl = gauss_legendre(nodes, 0.0, 1.0 - 1e-12);
  double acc = 0.0;
  for (int i = 0; i < gl.size(); ++i) {
    const double t = gl.nodes[i];
    const double u = c + sign * t / (1.0 - t);
    const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
    acc += gl.weights[i] * integrand(u) * jac;
  }
  return acc;
}

}  // namespace detail

/// Breakpoint-aware expansion for piecewise-smooth g: the coefficient
/// integrals are split at the given breakpoints and each smooth cell is
/// integrated with mapped Gauss-Legendre rules.
template <typename G>
CoefficientVector expand(G&& g, const OrthonormalBasis& basis, int K,
                         const std::vector<double>& breakpoints,
                         int nodes_per_cell = 160) {
  if (K < 0 || K > basis.max_degree())
    throw std::out_of_range("expand: degree out of range");
  std::vector<double> edges;
  edges.push_back(basis.marginal().support_lo());
  for (double b : breakpoints) {
    if (!(b > edges.back()))
      throw std::invalid_argument("expand: breakpoints must be increasing");
    edges.push_back(b);
  }
  edges.push_back(basis.marginal().support_hi());
  std::vector<double> coeffs(K + 1, 0.0), e;
  for (std::size_t c = 0; c + 1 < edges.size(); ++c) {
    for (int k = 0; k <= K; ++k) {
      coeffs[k] += detail::weighted_cell_integral(
          basis.marginal(),
          [&](double u) { return g(u) * basis.eval(k, u); }, edges[c],
          edges[c + 1], nodes_per_cell);
    }
  }
  return CoefficientVector{std::move(coeffs), basis, std::nullopt};
}

/// Closed-form Hermite coefficients of the indicator 1{x >= nu} in the
/// orthonormal convention: C_0 = 1 - Phi(nu), C_k = phi(nu) He_{k-1}(nu) /
/// sqrt(k!) for k >= 1.
inline CoefficientVector indicator_hermite_coeffs(double nu, int K) {
  if (K < 1)
    throw std::invalid_argument("indicator_hermite_coeffs: K must be >= 1");
  OrthonormalBasis basis(MarginalDensity::standard_gaussian(), K);
  std::vector<double> coeffs(K + 1, 0.0);
  coeffs[0] = 1.0 - norm_cdf(nu);
  const double pdf = norm_pdf(nu);
  for (int k = 1; k <= K; ++k)
    coeffs[k] = pdf * hermite_he(k - 1, nu) / std::exp(0.5 * std::lgamma(k + 1.0));
  return CoefficientVector{std::move(coeffs), basis, std::nullopt};
}

/// Smallest m >= 1 with |C_m| > rank_tol.  A negative rank_tol selects the
/// default threshold 1e-10 relative to the partial Parseval norm of g.
inline int rank_of(const CoefficientVector& coeffs, double rank_tol = -1.0) {
  const int K = coeffs.max_degree();
  if (K < 1) throw std::invalid_argument("rank_of: need coefficients to K >= 1");
  if (rank_tol < 0.0) {
    double ss = 0.0;
    for (double c : coeffs.values) ss += c * c;
    rank_tol = 1e-10 * std::sqrt(ss);
  }
  for (int m = 1; m <= K; ++m)
    if (std::abs(coeffs.values[m]) > rank_tol) return m;
  throw std::runtime_error("rank_of: no rank up to K");
}

}  // namespace lsrf
