#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lsrf/covmodels.hpp"
#include "lsrf/infotheory.hpp"
#include "lsrf/polybasis.hpp"
#include "lsrf/quadrature.hpp"

namespace lsrf {

enum class NegativityPolicy { ClampFloor, Reject };

/// Ordinary least squares of ln(y) on ln(x) over a distance window.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int points_used = 0;
  bool valid = false;
  std::string warning;
};

inline SlopeFit fit_loglog_slope(const std::vector<double>& x,
                                 const std::vector<double>& y, double lo,
                                 double hi) {
  if (x.size() != y.size())
    throw std::invalid_argument("fit_loglog_slope: size mismatch");
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("fit_loglog_slope: need 0 < lo < hi");
  SlopeFit fit;
  fit.window_lo = lo;
  fit.window_hi = hi;
  std::vector<double> lx, ly;
  bool dropped = false;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) continue;
    if (!(y[i] >= 1e-300) || !std::isfinite(y[i])) {
      dropped = true;
      continue;
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  fit.points_used = static_cast<int>(lx.size());
  if (dropped) {
    fit.warning = "window auto-shrunk: values below 1e-300 dropped";
    if (!lx.empty()) {
      fit.window_lo = std::exp(lx.front());
      fit.window_hi = std::exp(lx.back());
    }
  }
  if (fit.points_used < 3) {
    fit.valid = false;
    if (fit.warning.empty()) fit.warning = "fewer than 3 usable points";
    return fit;
  }
  const int n = fit.points_used;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) {
    fit.valid = false;
    fit.warning = "degenerate window: single abscissa";
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.slope_stderr = std::sqrt(rss / (n - 2) / sxx);
  fit.valid = true;
  return fit;
}

/// An MI decay curve over distances, with optional analytic bound curves
/// (filled for the Shannon variant on the base field) and a log-log slope fit.
struct MICurve {
  std::vector<double> distances;
  std::vector<double> mi_values;
  std::vector<double> lower_bound;  // empty unless bounds computed
  std::vector<double> upper_bound;
  std::optional<double> bound_validity_distance;  // first d with gamma <= 0.5
  SlopeFit slope_fit;
};

/// Finite-state transform of the marginal: either a threshold indicator or a
/// labelled partition of the support; repeated labels merge cells into one
/// state.
class SubordinationSpec {
 public:
  enum class Kind { Indicator, FiniteLevels };

  static SubordinationSpec indicator(double nu) {
    SubordinationSpec s;
    s.kind_ = Kind::Indicator;
    s.breakpoints_ = {nu};
    s.labels_ = {"below", "above"};
    return s;
  }

  static SubordinationSpec finite_levels(std::vector<double> breakpoints,
                                         std::vector<std::string> labels) {
    if (breakpoints.empty())
      throw std::invalid_argument("SubordinationSpec: need >= 1 breakpoint");
    for (size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1]))
        throw std::invalid_argument(
            "SubordinationSpec: breakpoints must be strictly increasing");
    if (labels.size() != breakpoints.size() + 1)
      throw std::invalid_argument(
          "SubordinationSpec: need one label per cell (breakpoints + 1)");
    SubordinationSpec s;
    s.kind_ = Kind::FiniteLevels;
    s.breakpoints_ = std::move(breakpoints);
    s.labels_ = std::move(labels);
    if (s.state_labels().size() < 2)
      throw std::invalid_argument("SubordinationSpec: need >= 2 states");
    return s;
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<std::string>& cell_labels() const { return labels_; }

  /// Distinct labels in first-appearance order; these are the states.
  std::vector<std::string> state_labels() const {
    std::vector<std::string> out;
    for (const std::string& l : labels_)
      if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
    return out;
  }

  int states() const { return static_cast<int>(state_labels().size()); }

  std::string descriptor() const {
    std::ostringstream os;
    if (kind_ == Kind::Indicator) {
      os << "Indicator(nu=" << breakpoints_[0] << ")";
    } else {
      os << "FiniteLevels(breakpoints=[";
      for (size_t i = 0; i < breakpoints_.size(); ++i)
        os << (i ? "," : "") << breakpoints_[i];
      os << "],labels=[";
      for (size_t i = 0; i < labels_.size(); ++i)
        os << (i ? "," : "") << labels_[i];
      os << "])";
    }
    return os.str();
  }

 private:
  SubordinationSpec() = default;
  Kind kind_ = Kind::Indicator;
  std::vector<double> breakpoints_;
  std::vector<std::string> labels_;
};

/// State-space expansion data for a subordination: a[i] is the probability of
/// state i, b[i][k-1] the coefficient of e_k over the state's preimage.
struct SubordinationCoeffs {
  std::vector<std::string> labels;
  std::vector<double> a;
  std::vector<std::vector<double>> b;
};

/// Truncated bivariate expansion model
///   p_M(u,v;gamma) = p(u) p(v) [1 + sum_{k=1..M} gamma^k e_k(u) e_k(v)]
/// over a Gaussian or Gamma marginal, with all analytic MI quantities.
class LSModel {
 public:
  LSModel(const MarginalDensity& marginal, const CorrelationModel& corr,
          int truncation_m, int quad_nodes = 200,
          NegativityPolicy policy = NegativityPolicy::ClampFloor)
      : LSModel(marginal, std::optional<CorrelationModel>(corr), truncation_m,
                quad_nodes, policy) {}

  /// Scalar engine: no correlation model attached; only the *_from_gamma
  /// entry points are available.
  LSModel(const MarginalDensity& marginal, int truncation_m,
          int quad_nodes = 200,
          NegativityPolicy policy = NegativityPolicy::ClampFloor)
      : LSModel(marginal, std::optional<CorrelationModel>(), truncation_m,
                quad_nodes, policy) {}

  const MarginalDensity& marginal() const { return basis_.marginal(); }
  const OrthonormalBasis& basis() const { return basis_; }
  const QuadratureRule& rule() const { return rule_; }
  int truncation() const { return m_; }
  int quad_nodes() const { return rule_.size(); }
  NegativityPolicy policy() const { return policy_; }
  bool has_correlation() const { return corr_.has_value(); }
  const CorrelationModel& correlation_model() const {
    if (!corr_) throw std::logic_error("LSModel: no correlation model attached");
    return *corr_;
  }
  double gamma_at(double r) const { return correlation_model()(r); }

  /// Coefficients C_j^p of the marginal density expanded in its own basis,
  /// j = 1..M (the j = 0 term is the L2 norm of p and is not stored).
  const std::vector<double>& density_coeffs() const { return cp_; }

  /// Raw truncated kernel bracket 1 + sum_k gamma^k e_k(u) e_k(v), unclamped.
  double bracket_value(double u, double v, double gamma) const {
    std::vector<double> eu, ev;
    basis_.eval_all(u, eu);
    basis_.eval_all(v, ev);
    double q = 0.0, gk = 1.0;
    for (int k = 1; k <= m_; ++k) {
      gk *= gamma;
      // parenthesized so the u/v product rounds first: keeps the kernel
      // bitwise symmetric under FP contraction
      q += gk * (eu[k] * ev[k]);
    }
    return 1.0 + q;
  }

  double bivariate_density(double u, double v, double r) const {
    return bivariate_density_gamma(u, v, gamma_at(r));
  }

  double bivariate_density_gamma(double u, double v, double gamma) const {
    const double pu = marginal().pdf(u), pv = marginal().pdf(v);
    if (gamma == 0.0) return pu * pv;
    const double b = bracket_value(u, v, gamma);
    return pu * pv * apply_policy(b, u, v, gamma);
  }

  double shannon_mi_quadrature(double r, double* clamped_mass = nullptr) const {
    return shannon_mi_from_gamma(gamma_at(r), clamped_mass);
  }

  /// E_{p x p}[ B ln B ] with B the (policy-handled) bracket.
  double shannon_mi_from_gamma(double gamma,
                               double* clamped_mass = nullptr) const {
    if (clamped_mass) *clamped_mass = 0.0;
    if (gamma == 0.0) return 0.0;
    const Eigen::MatrixXd q = kernel_matrix(gamma);
    const int n = rule_.size();
    double acc = 0.0, clamped = 0.0;
    for (int i = 0; i < n; ++i) {
      const double wi = rule_.weights[i];
      if (wi == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        const double w = wi * rule_.weights[j];
        if (w == 0.0) continue;
        const double qv = q(i, j);
        if (qv <= kClampEps - 1.0) {
          report_negative(1.0 + qv, rule_.nodes[i], rule_.nodes[j], gamma);
          clamped += w;
          acc += w * kClampEps * kLogClampEps;
        } else {
          acc += w * (1.0 + qv) * std::log1p(qv);
        }
      }
    }
    if (clamped_mass) *clamped_mass = clamped;
    return acc;
  }

  double renyi_mi_quadrature(double r, double q_order,
                             double* clamped_mass = nullptr) const {
    return renyi_mi_from_gamma(gamma_at(r), q_order, clamped_mass);
  }

  /// (1/(q-1)) ln E_{p x p}[ B^q ].
  double renyi_mi_from_gamma(double gamma, double q_order,
                             double* clamped_mass = nullptr) const {
    if (!(q_order > 0.0) || q_order == 1.0)
      throw std::invalid_argument(
          "renyi_mi: need q > 0, q != 1 (use the Shannon path for q = 1)");
    if (clamped_mass) *clamped_mass = 0.0;
    if (gamma == 0.0) return 0.0;
    const Eigen::MatrixXd q = kernel_matrix(gamma);
    const int n = rule_.size();
    double acc = 0.0, clamped = 0.0;
    for (int i = 0; i < n; ++i) {
      const double wi = rule_.weights[i];
      if (wi == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        const double w = wi * rule_.weights[j];
        if (w == 0.0) continue;
        const double qv = q(i, j);
        double b = 1.0 + qv;
        if (b < kClampEps) {
          report_negative(b, rule_.nodes[i], rule_.nodes[j], gamma);
          clamped += w;
          b = kClampEps;
        }
        acc += w * std::pow(b, q_order);
      }
    }
    if (clamped_mass) *clamped_mass = clamped;
    return std::log(acc) / (q_order - 1.0);
  }

  double shannon_mi_series(double r) const {
    return shannon_mi_series_from_gamma(gamma_at(r));
  }

  /// sum_j gamma^j (C_j^p)^2 + sum_i gamma^{2i}: the Taylor-order surrogate.
  /// Its constants differ from the quadrature value by design (the quadratic
  /// term of E[B ln B] carries a 1/2); use for order-of-decay diagnostics.
  double shannon_mi_series_from_gamma(double gamma) const {
    require_nondegenerate(gamma);
    if (gamma == 0.0) return 0.0;
    double acc = 0.0, gj = 1.0, g2 = 1.0;
    for (int j = 1; j <= m_; ++j) {
      gj *= gamma;
      g2 *= gamma * gamma;
      acc += gj * cp_[j - 1] * cp_[j - 1] + g2;
    }
    return acc;
  }

  std::pair<double, double> mi_bounds(double r) const {
    return mi_bounds_from_gamma(gamma_at(r));
  }

  /// (lower, upper) decay bounds from the truncated coefficient extremes:
  ///   upper = max_j (C_j^p)^2 gamma/(1-gamma) + gamma^2/(1-gamma^2)
  ///   lower = min_j (C_j^p)^2 gamma/(1-gamma).
  std::pair<double, double> mi_bounds_from_gamma(double gamma) const {
    require_nondegenerate(gamma);
    if (gamma == 0.0) return {0.0, 0.0};
    double lo = cp_[0] * cp_[0], hi = lo;
    for (int j = 1; j < m_; ++j) {
      const double c2 = cp_[j] * cp_[j];
      lo = std::min(lo, c2);
      hi = std::max(hi, c2);
    }
    const double gr = gamma / (1.0 - gamma);
    return {lo * gr, hi * gr + gamma * gamma / (1.0 - gamma * gamma)};
  }

  double renyi_mi_multinomial(double r, int q_order) const {
    return renyi_mi_multinomial_from_gamma(gamma_at(r), q_order);
  }

  /// (1/(q-1)) ln(1 + sum over multi-indices (k_1..k_q) in {1..M}^q of
  /// gamma^{sum k_i} (E_p[prod_i e_{k_i}])^2), moments cached per sorted index.
  double renyi_mi_multinomial_from_gamma(double gamma, int q_order) const {
    if (q_order < 2)
      throw std::invalid_argument("renyi_mi_multinomial: need integer q >= 2");
    const double cost = q_order * std::pow(double(m_), double(q_order));
    if (cost > 1e7)
      throw std::runtime_error(
          "renyi_mi_multinomial: cost guard exceeded (q*M^q > 1e7)");
    if (gamma == 0.0) return 0.0;
    std::map<std::vector<int>, double> cache;
    std::vector<int> idx(q_order, 1);
    double total = 0.0;
    for (;;) {
      std::vector<int> key = idx;
      std::sort(key.begin(), key.end());
      auto it = cache.find(key);
      double moment;
      if (it != cache.end()) {
        moment = it->second;
      } else {
        moment = product_moment(key);
        cache.emplace(std::move(key), moment);
      }
      int ksum = 0;
      for (int k : idx) ksum += k;
      total += std::pow(gamma, ksum) * moment * moment;
      int pos = q_order - 1;
      while (pos >= 0 && idx[pos] == m_) idx[pos--] = 1;
      if (pos < 0) break;
      ++idx[pos];
    }
    return std::log1p(total) / (q_order - 1.0);
  }

  /// Per-state probabilities and expansion coefficients of a subordination.
  SubordinationCoeffs subordination_coeffs(const SubordinationSpec& spec) const {
    const std::vector<std::string> states = spec.state_labels();
    const int n_states = static_cast<int>(states.size());
    SubordinationCoeffs out;
    out.labels = states;
    out.a.assign(n_states, 0.0);
    out.b.assign(n_states, std::vector<double>(m_, 0.0));

    const double lo_sup = marginal().support_lo();
    const double hi_sup = marginal().support_hi();
    const std::vector<double>& bp = spec.breakpoints();
    for (double t : bp)
      if (!(t > lo_sup && t < hi_sup) &&
          marginal().family() != MarginalFamily::StandardGaussian)
        throw std::invalid_argument(
            "subordination: breakpoint outside the support interior");

    for (size_t cell = 0; cell <= bp.size(); ++cell) {
      const double lo = (cell == 0) ? lo_sup : bp[cell - 1];
      const double hi = (cell == bp.size()) ? hi_sup : bp[cell];
      const std::string& label = spec.cell_labels()[cell];
      const int s = static_cast<int>(
          std::find(states.begin(), states.end(), label) - states.begin());
      if (marginal().family() == MarginalFamily::StandardGaussian) {
        out.a[s] += norm_cdf(hi) - norm_cdf(lo);
        for (int k = 1; k <= m_; ++k)
          out.b[s][k - 1] += gaussian_cell_coeff(k, lo, hi);
      } else {
        out.a[s] += detail::weighted_cell_integral(
            marginal(), [](double) { return 1.0; }, lo, hi);
        for (int k = 1; k <= m_; ++k)
          out.b[s][k - 1] += detail::weighted_cell_integral(
              marginal(), [this, k](double x) { return basis_.eval(k, x); },
              lo, hi);
      }
    }
    return out;
  }

  FinitePMF subordinated_joint_pmf(const SubordinationSpec& spec,
                                   double r) const {
    return subordinated_pmf_from_gamma(subordination_coeffs(spec),
                                       gamma_at(r));
  }

  /// P_ij = a_i a_j + sum_k gamma^k b_ik b_jk, clamped to [0,1] and
  /// renormalized; drift beyond 1e-6 means the truncation cannot represent
  /// this gamma.
  FinitePMF subordinated_pmf_from_gamma(const SubordinationCoeffs& sc,
                                        double gamma) const {
    const int n = static_cast<int>(sc.a.size());
    std::vector<double> p(n * n, 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = sc.a[i] * sc.a[j];
        double gk = 1.0;
        for (int k = 1; k <= m_; ++k) {
          gk *= gamma;
          v += gk * sc.b[i][k - 1] * sc.b[j][k - 1];
        }
        v = std::clamp(v, 0.0, 1.0);
        p[i * n + j] = v;
        total += v;
      }
    if (std::abs(total - 1.0) > 1e-6)
      throw std::runtime_error(
          "subordinated_joint_pmf: truncation too coarse for this gamma "
          "(total mass " +
          std::to_string(total) + ")");
    for (double& v : p) v /= total;
    return FinitePMF(std::move(p));
  }

  double subordinated_mi(const SubordinationSpec& spec, double r) const {
    const int n = spec.states();
    return discrete_mi(subordinated_joint_pmf(spec, r), n, n);
  }

  double subordinated_renyi_mi(const SubordinationSpec& spec, double r,
                               double q_order) const {
    const int n = spec.states();
    return discrete_renyi_mi(subordinated_joint_pmf(spec, r), n, n, q_order);
  }

  /// Evaluate the selected MI variant along a distance grid and fit the
  /// log-log slope.  Variant: base Shannon (neither spec nor q), base Renyi
  /// (q only), subordinated Shannon (spec only), subordinated Renyi (both).
  /// Bound curves attach to the base Shannon variant; entries where
  /// gamma(d) = 1 are recorded as NaN (the bounds diverge there).
  MICurve mi_curve(const std::vector<double>& distances,
                   const std::optional<SubordinationSpec>& spec = std::nullopt,
                   const std::optional<double>& q_order = std::nullopt,
                   const std::optional<std::pair<double, double>>& fit_window =
                       std::nullopt) const {
    if (distances.empty())
      throw std::invalid_argument("mi_curve: empty distance grid");
    for (size_t i = 1; i < distances.size(); ++i)
      if (!(distances[i] > distances[i - 1]))
        throw std::invalid_argument("mi_curve: distances must be increasing");
    double wlo, whi;
    if (fit_window) {
      wlo = fit_window->first;
      whi = fit_window->second;
      if (!(wlo < whi) || whi < distances.front() || wlo > distances.back())
        throw std::invalid_argument("mi_curve: fit window outside distances");
    } else {
      whi = distances.back();
      wlo = whi / 10.0;
    }

    MICurve curve;
    curve.distances = distances;
    curve.mi_values.resize(distances.size());
    const bool base_shannon = !spec && !q_order;
    if (base_shannon) {
      curve.lower_bound.resize(distances.size());
      curve.upper_bound.resize(distances.size());
    }
    std::optional<SubordinationCoeffs> sc;
    if (spec) sc = subordination_coeffs(*spec);

    for (size_t i = 0; i < distances.size(); ++i) {
      const double g = gamma_at(distances[i]);
      double mi;
      if (spec && q_order) {
        const int n = spec->states();
        mi = discrete_renyi_mi(subordinated_pmf_from_gamma(*sc, g), n, n,
                               *q_order);
      } else if (spec) {
        const int n = spec->states();
        mi = discrete_mi(subordinated_pmf_from_gamma(*sc, g), n, n);
      } else if (q_order) {
        mi = renyi_mi_from_gamma(g, *q_order);
      } else {
        mi = shannon_mi_from_gamma(g);
      }
      curve.mi_values[i] = mi;
      if (base_shannon) {
        if (g < 1.0) {
          const auto [lo, hi] = mi_bounds_from_gamma(g);
          curve.lower_bound[i] = lo;
          curve.upper_bound[i] = hi;
        } else {
          curve.lower_bound[i] = std::numeric_limits<double>::quiet_NaN();
          curve.upper_bound[i] = std::numeric_limits<double>::quiet_NaN();
        }
        if (!curve.bound_validity_distance && g <= 0.5)
          curve.bound_validity_distance = distances[i];
      }
    }
    curve.slope_fit = fit_loglog_slope(curve.distances, curve.mi_values, wlo, whi);
    return curve;
  }

 private:
  static constexpr double kClampEps = 1e-12;
  // ln(1e-12), precomputed because constexpr std::log is not portable
  static constexpr double kLogClampEps = -27.631021115928547;

  LSModel(const MarginalDensity& marginal, std::optional<CorrelationModel> corr,
          int truncation_m, int quad_nodes, NegativityPolicy policy)
      : basis_(marginal, truncation_m),
        corr_(std::move(corr)),
        m_(truncation_m),
        policy_(policy),
        rule_(basis_.prob_rule(quad_nodes)) {
    if (truncation_m < 1)
      throw std::invalid_argument("LSModel: truncation must be >= 1");
    if (quad_nodes < 8)
      throw std::invalid_argument("LSModel: need >= 8 quadrature nodes");
    const int n = rule_.size();
    e1_.resize(n, m_);
    std::vector<double> buf;
    Eigen::VectorXd wp(n);
    for (int i = 0; i < n; ++i) {
      basis_.eval_all(rule_.nodes[i], buf);
      for (int k = 1; k <= m_; ++k) e1_(i, k - 1) = buf[k];
      wp[i] = rule_.weights[i] * marginal.pdf(rule_.nodes[i]);
    }
    // C_j^p = int p(u)^2 e_j(u) du = E_p[p e_j]
    cp_.resize(m_);
    for (int j = 0; j < m_; ++j) cp_[j] = wp.dot(e1_.col(j));
  }

  Eigen::MatrixXd kernel_matrix(double gamma) const {
    Eigen::VectorXd gpow(m_);
    double gk = 1.0;
    for (int k = 0; k < m_; ++k) {
      gk *= gamma;
      gpow[k] = gk;
    }
    return e1_ * gpow.asDiagonal() * e1_.transpose();
  }

  double apply_policy(double bracket, double u, double v, double gamma) const {
    if (bracket >= kClampEps) return bracket;
    report_negative(bracket, u, v, gamma);
    return kClampEps;
  }

  void report_negative(double bracket, double u, double v, double gamma) const {
    if (policy_ != NegativityPolicy::Reject) return;
    std::ostringstream os;
    os << "LSModel: truncated density negative at (u=" << u << ", v=" << v
       << ", gamma=" << gamma << "): bracket=" << bracket;
    throw std::runtime_error(os.str());
  }

  void require_nondegenerate(double gamma) const {
    if (gamma >= 1.0)
      throw std::runtime_error("LSModel: degenerate: zero distance");
  }

  // E_p[prod_t e_{k_t}] for a (sorted) multi-index with entries in 1..M.
  double product_moment(const std::vector<int>& key) const {
    const int n = rule_.size();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = rule_.weights[i];
      if (w == 0.0) continue;
      double prod = 1.0;
      for (int k : key) prod *= e1_(i, k - 1);
      acc += w * prod;
    }
    return acc;
  }

  // int_{lo}^{hi} e_k phi dt = [phi(t) He_{k-1}(t)]_{hi}^{lo} / sqrt(k!)
  static double gaussian_cell_coeff(int k, double lo, double hi) {
    auto end = [k](double t) {
      if (std::isinf(t)) return 0.0;
      return norm_pdf(t) * hermite_he(k - 1, t);
    };
    return (end(lo) - end(hi)) * std::exp(-0.5 * std::lgamma(k + 1.0));
  }

  OrthonormalBasis basis_;
  std::optional<CorrelationModel> corr_;
  int m_;
  NegativityPolicy policy_;
  QuadratureRule rule_;
  Eigen::MatrixXd e1_;      // nodes x M, columns e_1..e_M at the nodes
  std::vector<double> cp_;  // C_1^p..C_M^p
};

}  // namespace lsrf
