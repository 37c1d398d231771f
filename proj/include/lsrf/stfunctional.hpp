#pragma once

// Spatiotemporal functional layer: orthonormal time bases, the spatial
// correlation operator between time-basis projections of a Gneiting-covariance
// field, Shannon-MI operator entries fed through the scalar engine, MI-surface
// reconstruction, and an exact space-time Gaussian sampler.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lsrf/covmodels.hpp"
#include "lsrf/fieldsim.hpp"
#include "lsrf/lsmodel.hpp"
#include "lsrf/quadrature.hpp"

namespace lsrf {

/// Orthonormal basis of L2[0, T]. The cosine family covers the constant mode:
///   phi_1 = 1/sqrt(T),  phi_n = sqrt(2/T) cos((n-1) pi t / T)  for n >= 2.
class TimeBasis {
 public:
  enum class Kind { CosineOrthonormal };

  TimeBasis(Kind kind, double t_end, int count)
      : kind_(kind), t_end_(t_end), count_(count) {
    if (!(t_end > 0.0))
      throw std::invalid_argument("TimeBasis: T must be > 0");
    if (count < 1) throw std::invalid_argument("TimeBasis: count must be >= 1");
  }

  Kind kind() const { return kind_; }
  double t_end() const { return t_end_; }
  int count() const { return count_; }

  double evaluate(int n, double t) const {
    if (n < 1 || n > count_)
      throw std::invalid_argument("TimeBasis: index out of range");
    if (n == 1) return 1.0 / std::sqrt(t_end_);
    return std::sqrt(2.0 / t_end_) *
           std::cos((n - 1) * std::numbers::pi * t / t_end_);
  }

  std::string descriptor() const {
    std::ostringstream os;
    os << "CosineBasis(T=" << t_end_ << ",count=" << count_ << ")";
    return os.str();
  }

 private:
  Kind kind_;
  double t_end_;
  int count_;
};

struct CorrelationOperatorEntry {
  double r = 0.0;
  int n = 0, m = 0;
  double value = 0.0;
};

/// Correlation between the time projections X_x(phi_n) and X_y(phi_m) of a
/// zero-mean field with Gneiting covariance, |x-y| = r:
///   Corr = <C(r, .) phi_n, phi_m> / sqrt(<C(0,.) phi_n, phi_n>) / sqrt(same m)
/// by tensor Gauss-Legendre quadrature on [0,T]^2. Projection variances are
/// cached; all entries for one r come from a single kernel matrix.
class CorrelationOperator {
 public:
  CorrelationOperator(const GneitingCovariance& gc, const TimeBasis& basis,
                      int quad_nodes = 256)
      : gc_(gc), basis_(basis), rule_(gauss_legendre(quad_nodes, 0.0, basis.t_end())) {
    const int nq = rule_.size(), mb = basis.count();
    pw_.resize(mb, nq);
    for (int n = 0; n < mb; ++n)
      for (int i = 0; i < nq; ++i)
        pw_(n, i) = basis.evaluate(n + 1, rule_.nodes[i]) * rule_.weights[i];
    const Eigen::MatrixXd at_zero = projected(0.0);
    inv_sqrt_var_.resize(mb);
    for (int n = 0; n < mb; ++n) {
      const double v = at_zero(n, n);
      if (!(v > 1e-14))
        throw std::runtime_error(
            "CorrelationOperator: degenerate basis projection (variance <= "
            "1e-14 at index " + std::to_string(n + 1) + ")");
      inv_sqrt_var_[n] = 1.0 / std::sqrt(v);
    }
  }

  const TimeBasis& basis() const { return basis_; }

  /// Full M_b x M_b correlation matrix at spatial distance r.
  Eigen::MatrixXd matrix(double r) const {
    Eigen::MatrixXd g = projected(r);
    for (int n = 0; n < g.rows(); ++n)
      for (int m = 0; m < g.cols(); ++m)
        g(n, m) *= inv_sqrt_var_[n] * inv_sqrt_var_[m];
    return g;
  }

  double entry(double r, int n, int m) const {
    check_index(n);
    check_index(m);
    return matrix(r)(n - 1, m - 1);
  }

 private:
  void check_index(int n) const {
    if (n < 1 || n > basis_.count())
      throw std::invalid_argument("CorrelationOperator: basis index out of range");
  }

  // <C(r,.) phi_n, phi_m> for all (n,m): PW * C * (PW)^T with C_ij = C(r, t_i - t_j)
  Eigen::MatrixXd projected(double r) const {
    const int nq = rule_.size();
    Eigen::MatrixXd c(nq, nq);
    for (int i = 0; i < nq; ++i) {
      c(i, i) = gc_(r, 0.0);
      for (int j = 0; j < i; ++j)
        c(i, j) = c(j, i) = gc_(r, rule_.nodes[i] - rule_.nodes[j]);
    }
    return pw_ * c * pw_.transpose();
  }

  GneitingCovariance gc_;
  TimeBasis basis_;
  QuadratureRule rule_;
  Eigen::MatrixXd pw_;
  std::vector<double> inv_sqrt_var_;
};

inline CorrelationOperatorEntry correlation_operator(
    const GneitingCovariance& gc, const TimeBasis& basis, double r, int n,
    int m, int quad_nodes = 256) {
  CorrelationOperator op(gc, basis, quad_nodes);
  return CorrelationOperatorEntry{r, n, m, op.entry(r, n, m)};
}

/// Shannon MI between the (n, m) projections at spatial distance r: the
/// correlation value is fed as gamma into the scalar truncated-expansion
/// engine (Gaussian marginal is exact for linear functionals of a Gaussian
/// field).
inline double mi_operator_entry(const GneitingCovariance& gc,
                                const TimeBasis& basis, const LSModel& scalar,
                                double r, int n, int m, int quad_nodes = 256) {
  CorrelationOperator op(gc, basis, quad_nodes);
  return scalar.shannon_mi_from_gamma(op.entry(r, n, m));
}

struct MIOperatorSurface {
  double r = 0.0;
  Eigen::MatrixXd entries;          // M_b x M_b MI values
  Eigen::MatrixXd correlations;     // the gamma_{nm}(r) they came from
  std::vector<double> time_mesh;
  Eigen::MatrixXd k_values;         // K(t, s) on mesh x mesh
  TimeBasis basis;

  /// K(t,s) = sum_{n,m} entries(n,m) phi_n(t) phi_m(s).
  double evaluate(double t, double s) const {
    double acc = 0.0;
    for (int n = 0; n < entries.rows(); ++n) {
      const double pn = basis.evaluate(n + 1, t);
      for (int m = 0; m < entries.cols(); ++m)
        acc += entries(n, m) * pn * basis.evaluate(m + 1, s);
    }
    return acc;
  }

  double mean_level() const { return k_values.mean(); }
};

/// All M_b^2 MI entries at distance r plus the reconstructed kernel on the
/// given time mesh.
inline MIOperatorSurface mi_surface(const GneitingCovariance& gc,
                                    const TimeBasis& basis,
                                    const LSModel& scalar, double r,
                                    const std::vector<double>& time_mesh,
                                    int quad_nodes = 256) {
  for (double t : time_mesh)
    if (t < 0.0 || t > basis.t_end())
      throw std::invalid_argument("mi_surface: mesh point outside [0, T]");
  CorrelationOperator op(gc, basis, quad_nodes);
  const int mb = basis.count();
  MIOperatorSurface s{r, Eigen::MatrixXd(mb, mb), op.matrix(r), time_mesh,
                      Eigen::MatrixXd(), basis};
  for (int n = 0; n < mb; ++n)
    for (int m = 0; m < mb; ++m)
      s.entries(n, m) = scalar.shannon_mi_from_gamma(s.correlations(n, m));
  const int nt = static_cast<int>(time_mesh.size());
  s.k_values.resize(nt, nt);
  Eigen::MatrixXd p(mb, nt);
  for (int n = 0; n < mb; ++n)
    for (int i = 0; i < nt; ++i) p(n, i) = basis.evaluate(n + 1, time_mesh[i]);
  s.k_values = p.transpose() * s.entries * p;
  return s;
}

namespace detail {

/// Exact space-time Gaussian sampler with a cached Cholesky factor; point
/// (space_flat, t) maps to flat index space_flat * time_points + t.
class StGaussianSampler {
 public:
  StGaussianSampler(const GridSpec& space, int time_points,
                    double time_spacing, const GneitingCovariance& gc)
      : space_(space), time_points_(time_points), time_spacing_(time_spacing) {
    if (time_points < 1)
      throw std::invalid_argument("simulate_st_gaussian: time_points >= 1");
    if (!(time_spacing > 0.0))
      throw std::invalid_argument("simulate_st_gaussian: time spacing > 0");
    const std::int64_t n = space.total_points() * time_points;
    if (n > 8192)
      throw std::invalid_argument(
          "simulate_st_gaussian: " + std::to_string(n) +
          " points exceed the dense-Cholesky cap 8192; consider thinning the "
          "grid");
    Eigen::MatrixXd sigma(n, n);
    std::vector<double> xi, xj;
    const double jitter = 1e-10 * gc(0.0, 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t si = i / time_points, ti = i % time_points;
      space.coordinate(si, xi);
      for (std::int64_t j = 0; j <= i; ++j) {
        const std::int64_t sj = j / time_points, tj = j % time_points;
        space.coordinate(sj, xj);
        double s2 = 0.0;
        for (size_t a = 0; a < xi.size(); ++a)
          s2 += (xi[a] - xj[a]) * (xi[a] - xj[a]);
        const double c =
            gc(std::sqrt(s2), time_spacing * static_cast<double>(ti - tj));
        sigma(i, j) = sigma(j, i) = (i == j) ? c + jitter : c;
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error(
          "simulate_st_gaussian: covariance is not positive definite");
    chol_l_ = llt.matrixL();
    std::ostringstream os;
    os << "StGaussian(" << gc.descriptor() << ",dt=" << time_spacing << ")";
    model_descriptor_ = os.str();
  }

  std::vector<double> draw(std::uint64_t seed) const {
    const std::int64_t n = chol_l_.rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (std::int64_t i = 0; i < n; ++i) z[i] = gauss(rng);
    const Eigen::VectorXd x = chol_l_ * z;
    return std::vector<double>(x.data(), x.data() + n);
  }

  /// Grid with the time axis appended to the spatial sizes; the (possibly
  /// different) time spacing lives in the provenance descriptor.
  FieldRealization realize(std::uint64_t seed) const {
    std::vector<int> sizes = space_.sizes;
    sizes.push_back(time_points_);
    return FieldRealization{GridSpec(sizes, space_.spacing), draw(seed), seed,
                            {model_descriptor_, "Cholesky"}};
  }

  int time_points() const { return time_points_; }
  double time_spacing() const { return time_spacing_; }

 private:
  GridSpec space_;
  int time_points_;
  double time_spacing_;
  Eigen::MatrixXd chol_l_;
  std::string model_descriptor_;
};

}  // namespace detail

/// Exact zero-mean Gaussian draw over (space grid) x (time_points) with
/// covariance C(|x-y|, (t_i - t_j) dt), dense Cholesky, cap 8192 points.
inline FieldRealization simulate_st_gaussian(const GridSpec& space,
                                             int time_points,
                                             double time_spacing,
                                             const GneitingCovariance& gc,
                                             std::uint64_t seed) {
  return detail::StGaussianSampler(space, time_points, time_spacing, gc)
      .realize(seed);
}

}  // namespace lsrf
