#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lsrf {

/// Isotropic spatial correlation family with an algebraic tail gamma(r) ~
/// r^{-rho}.  The long-range-dependence exponent rho must lie in (0, dim).
class CorrelationModel {
 public:
  enum class Family { PowerLawBG, PurePower, Squared };

  /// gamma(r) = 1/(1 + r^beta)^gamma_exp with beta in (0,2], gamma_exp > 0.
  static CorrelationModel power_law_bg(double beta, double gamma_exp, int dim) {
    if (!(beta > 0.0 && beta <= 2.0))
      throw std::invalid_argument("CorrelationModel: beta must be in (0,2]");
    if (!(gamma_exp > 0.0))
      throw std::invalid_argument("CorrelationModel: gamma_exp must be > 0");
    CorrelationModel m;
    m.family_ = Family::PowerLawBG;
    m.beta_ = beta;
    m.gamma_exp_ = gamma_exp;
    m.rho_ = beta * gamma_exp;
    m.dim_ = dim;
    m.validate();
    return m;
  }

  /// gamma(r) = min(1, r^{-rho}): already at its asymptote for r > 1.
  static CorrelationModel pure_power(double rho, int dim) {
    CorrelationModel m;
    m.family_ = Family::PurePower;
    m.rho_ = rho;
    m.dim_ = dim;
    m.validate();
    return m;
  }

  /// gamma(r) = inner(r)^2; the tail exponent doubles.
  static CorrelationModel squared(const CorrelationModel& inner) {
    CorrelationModel m;
    m.family_ = Family::Squared;
    m.rho_ = 2.0 * inner.rho_;
    m.dim_ = inner.dim_;
    m.inner_ = std::make_shared<CorrelationModel>(inner);
    m.validate();
    return m;
  }

  Family family() const { return family_; }
  int dim() const { return dim_; }
  double lrd_exponent() const { return rho_; }
  const CorrelationModel& inner() const {
    if (!inner_) throw std::logic_error("CorrelationModel: no inner model");
    return *inner_;
  }

  double operator()(double r) const {
    if (!(r >= 0.0))
      throw std::invalid_argument("CorrelationModel: r must be >= 0");
    switch (family_) {
      case Family::PowerLawBG:
        return std::exp(-gamma_exp_ * std::log1p(std::pow(r, beta_)));
      case Family::PurePower:
        return r <= 1.0 ? 1.0 : std::pow(r, -rho_);
      case Family::Squared: {
        const double g = (*inner_)(r);
        return g * g;
      }
    }
    throw std::logic_error("CorrelationModel: unknown family");
  }

  /// Present when rho >= dim/2: several spectral-domain identities assume the
  /// stricter half-dimension range even though construction allows (0, dim).
  std::optional<std::string> config_warning() const {
    if (rho_ < dim_ / 2.0) return std::nullopt;
    std::ostringstream os;
    os << "correlation exponent rho=" << rho_ << " is >= d/2=" << dim_ / 2.0
       << "; spectral-domain identities assume rho < d/2";
    return os.str();
  }

  std::string descriptor() const {
    std::ostringstream os;
    switch (family_) {
      case Family::PowerLawBG:
        os << "PowerLawBG(beta=" << beta_ << ",gamma_exp=" << gamma_exp_
           << ",d=" << dim_ << ")";
        break;
      case Family::PurePower:
        os << "PurePower(rho=" << rho_ << ",d=" << dim_ << ")";
        break;
      case Family::Squared:
        os << "Squared(" << inner_->descriptor() << ")";
        break;
    }
    return os.str();
  }

 private:
  CorrelationModel() = default;

  void validate() const {
    if (dim_ < 1)
      throw std::invalid_argument("CorrelationModel: dim must be >= 1");
    if (!(rho_ > 0.0 && rho_ < dim_))
      throw std::invalid_argument(
          "CorrelationModel: lrd exponent must lie in (0, dim)");
  }

  Family family_ = Family::PurePower;
  int dim_ = 1;
  double beta_ = 0.0;
  double gamma_exp_ = 0.0;
  double rho_ = 0.0;
  std::shared_ptr<const CorrelationModel> inner_;
};

inline double correlation(const CorrelationModel& model, double r) {
  return model(r);
}

inline double lrd_exponent(const CorrelationModel& model) {
  return model.lrd_exponent();
}

/// Nonseparable space-time covariance
///   C(z, tau) = sigma2 / psi(tau^2)^{d/2} * phi(|z|^2 / psi(tau^2)),
/// with phi(u) = 1/(1 + c u^{gamma_phi})^delta and psi(u) = (1 + a u^alpha)^{beta_psi}.
class GneitingCovariance {
 public:
  GneitingCovariance(double sigma2, double c, double gamma_phi, double delta,
                     double a, double alpha, double beta_psi, int dim)
      : sigma2_(sigma2),
        c_(c),
        gamma_phi_(gamma_phi),
        delta_(delta),
        a_(a),
        alpha_(alpha),
        beta_psi_(beta_psi),
        dim_(dim) {
    std::string bad;
    auto fail = [&bad](const std::string& msg) {
      if (!bad.empty()) bad += "; ";
      bad += msg;
    };
    if (!(sigma2 >= 0.0)) fail("sigma2 must be >= 0");
    if (!(c > 0.0)) fail("c must be > 0");
    if (!(delta > 0.0)) fail("delta must be > 0");
    if (!(gamma_phi > 0.0 && gamma_phi <= 1.0)) fail("gamma_phi must be in (0,1]");
    if (!(a > 0.0)) fail("a must be > 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha must be in (0,1]");
    if (!(beta_psi > 0.0 && beta_psi <= 1.0)) fail("beta_psi must be in (0,1]");
    if (dim < 1) fail("dim must be >= 1");
    if (!(2.0 * gamma_phi * delta > 0.0 && 2.0 * gamma_phi * delta < dim))
      fail("2*gamma_phi*delta must lie in (0, dim)");
    if (!(2.0 * alpha * beta_psi > 0.0 && 2.0 * alpha * beta_psi < 1.0))
      fail("2*alpha*beta_psi must lie in (0, 1)");
    if (!bad.empty())
      throw std::invalid_argument("GneitingCovariance: " + bad);
  }

  double sigma2() const { return sigma2_; }
  int dim() const { return dim_; }
  double spatial_lrd_exponent() const { return 2.0 * gamma_phi_ * delta_; }
  double temporal_lrd_exponent() const { return 2.0 * alpha_ * beta_psi_; }

  double phi(double u) const {
    if (!(u >= 0.0)) throw std::invalid_argument("GneitingCovariance: u < 0");
    return std::exp(-delta_ * std::log1p(c_ * std::pow(u, gamma_phi_)));
  }

  double psi(double u) const {
    if (!(u >= 0.0)) throw std::invalid_argument("GneitingCovariance: u < 0");
    return std::exp(beta_psi_ * std::log1p(a_ * std::pow(u, alpha_)));
  }

  double operator()(double z_norm, double tau) const {
    if (!(z_norm >= 0.0))
      throw std::invalid_argument("GneitingCovariance: z_norm must be >= 0");
    const double ps = psi(tau * tau);
    return sigma2_ / std::pow(ps, dim_ / 2.0) * phi(z_norm * z_norm / ps);
  }

  std::string descriptor() const {
    std::ostringstream os;
    os << "Gneiting(sigma2=" << sigma2_ << ",c=" << c_
       << ",gamma_phi=" << gamma_phi_ << ",delta=" << delta_ << ",a=" << a_
       << ",alpha=" << alpha_ << ",beta_psi=" << beta_psi_ << ",d=" << dim_
       << ")";
    return os.str();
  }

 private:
  double sigma2_, c_, gamma_phi_, delta_, a_, alpha_, beta_psi_;
  int dim_;
};

inline double gneiting_cov(const GneitingCovariance& gc, double z_norm,
                           double tau) {
  return gc(z_norm, tau);
}

}  // namespace lsrf
