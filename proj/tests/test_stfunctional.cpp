#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "lsrf/stfunctional.hpp"

using namespace lsrf;

namespace {

// sigma2, c, gamma_phi, delta, a, alpha, beta_psi, dim
const GneitingCovariance kGc(1.0, 1.0, 0.2, 0.35, 1.0, 0.3, 0.7, 2);
const TimeBasis kBasis(TimeBasis::Kind::CosineOrthonormal, 1.0, 20);
const LSModel kScalar(MarginalDensity::standard_gaussian(), 10);

}  // namespace

TEST_CASE("cosine time basis is orthonormal by quadrature") {
  const QuadratureRule gl = gauss_legendre(256, 0.0, 1.0);
  for (int n = 1; n <= 20; ++n)
    for (int m = n; m <= 20; ++m) {
      double acc = 0.0;
      for (int i = 0; i < gl.size(); ++i)
        acc += gl.weights[i] * kBasis.evaluate(n, gl.nodes[i]) *
               kBasis.evaluate(m, gl.nodes[i]);
      CHECK(acc == Catch::Approx(n == m ? 1.0 : 0.0).margin(1e-10));
    }
  CHECK(kBasis.evaluate(1, 0.3) == Catch::Approx(1.0));
  CHECK(kBasis.evaluate(2, 0.0) == Catch::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(kBasis.evaluate(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(kBasis.evaluate(21, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(TimeBasis(TimeBasis::Kind::CosineOrthonormal, 0.0, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(TimeBasis(TimeBasis::Kind::CosineOrthonormal, 1.0, 0),
                  std::invalid_argument);
}

TEST_CASE("correlation operator: normalization, symmetry, bounds") {
  CorrelationOperator op(kGc, kBasis);
  const Eigen::MatrixXd g0 = op.matrix(0.0);
  for (int n = 0; n < 20; ++n)
    CHECK(g0(n, n) == Catch::Approx(1.0).margin(1e-8));
  for (double r : {0.5, 1.0, 10.0, 1000.0}) {
    const Eigen::MatrixXd g = op.matrix(r);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(g.cwiseAbs().maxCoeff() <= 1.0 + 1e-8);
  }
  CHECK_THROWS_AS(op.entry(1.0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(op.entry(1.0, 1, 21), std::invalid_argument);
}

TEST_CASE("correlation operator fixtures") {
  CorrelationOperator op(kGc, kBasis);
  CHECK(op.entry(1.0, 1, 1) == Catch::Approx(0.791480497021).epsilon(1e-9));
  CHECK(op.entry(1.0, 2, 2) == Catch::Approx(0.764828559721).epsilon(1e-9));
  // parity: even covariance kernel decouples odd/even cosine indices
  CHECK(std::abs(op.entry(1.0, 1, 2)) < 1e-12);
  const CorrelationOperatorEntry e = correlation_operator(kGc, kBasis, 1.0, 1, 1);
  CHECK(e.value == Catch::Approx(0.791480497021).epsilon(1e-9));
  CHECK(e.n == 1);
  CHECK(e.r == 1.0);
}

TEST_CASE("far-distance entries vanish for fast-decaying parameters") {
  // 2*gamma_phi*delta = 0.6 < d: valid, and phi decays fast enough that the
  // r = 1e6 proxy is below 1e-3 for every (n, m)
  const GneitingCovariance fast(1.0, 1.0, 0.5, 0.6, 1.0, 0.3, 0.7, 2);
  CorrelationOperator op(fast, kBasis);
  CHECK(op.matrix(1e6).cwiseAbs().maxCoeff() < 1e-3);
  // the slow sec-4 parameters still decrease, just not below 1e-3
  CorrelationOperator slow(kGc, kBasis);
  CHECK(slow.entry(1e6, 1, 1) < slow.entry(1.0, 1, 1));
}

TEST_CASE("degenerate basis projection is rejected") {
  const GneitingCovariance tiny(1e-20, 1.0, 0.2, 0.35, 1.0, 0.3, 0.7, 2);
  CHECK_THROWS_WITH(CorrelationOperator(tiny, kBasis),
                    Catch::Matchers::ContainsSubstring("degenerate basis projection"));
}

TEST_CASE("mi_operator_entry: zero case and scalar oracle") {
  // gamma = 0 -> MI 0 exactly
  CHECK(kScalar.shannon_mi_from_gamma(0.0) == 0.0);
  CorrelationOperator op(kGc, kBasis);
  // M=10 holds the 2e-3 oracle tolerance for gamma <= ~0.7 (r >= 5 here)
  for (double r : {5.0, 10.0, 50.0}) {
    for (int n : {1, 2, 7}) {
      const double g = op.entry(r, n, n);
      CHECK(mi_operator_entry(kGc, kBasis, kScalar, r, n, n) ==
            Catch::Approx(gaussian_mi_exact(g, 1.0)).margin(2e-3));
    }
  }
  // short distances push gamma ~ 0.79; doubling the truncation recovers it
  const LSModel deep(MarginalDensity::standard_gaussian(), 20);
  for (double r : {1.0, 2.0}) {
    const double g = op.entry(r, 1, 1);
    CHECK(deep.shannon_mi_from_gamma(g) ==
          Catch::Approx(gaussian_mi_exact(g, 1.0)).margin(2e-3));
  }
}

TEST_CASE("diagonal MI entries are non-increasing in distance") {
  CorrelationOperator op(kGc, kBasis);
  for (int n : {1, 2, 5}) {
    double prev = 1e300;
    for (double r : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      const double v = kScalar.shannon_mi_from_gamma(op.entry(r, n, n));
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("same power law: MI slope vs correlation is the scalar order 2") {
  CorrelationOperator op(kGc, kBasis);
  std::vector<double> lg, lmi;
  for (double r = 100.0; r <= 1000.01; r *= std::pow(10.0, 0.25)) {
    const double g = op.entry(r, 1, 1);
    lg.push_back(std::log(g));
    lmi.push_back(std::log(kScalar.shannon_mi_from_gamma(g)));
  }
  const int n = static_cast<int>(lg.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += lg[i];
    sy += lmi[i];
    sxx += lg[i] * lg[i];
    sxy += lg[i] * lmi[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == Catch::Approx(2.0).epsilon(0.15));
}

TEST_CASE("mi_surface: reconstruction, re-projection and monotone mean") {
  std::vector<double> mesh;
  for (int i = 0; i <= 30; ++i) mesh.push_back(i / 30.0);
  const MIOperatorSurface s1 = mi_surface(kGc, kBasis, kScalar, 1.0, mesh);
  REQUIRE(s1.entries.rows() == 20);
  CHECK(s1.entries.minCoeff() >= 0.0);
  CHECK((s1.k_values - s1.k_values.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 0; i < 31; ++i)
    CHECK(s1.k_values(i, i) >= -1e-8);  // diagonal positivity
  // K on the mesh equals the basis expansion evaluated directly
  CHECK(s1.k_values(4, 9) ==
        Catch::Approx(s1.evaluate(mesh[4], mesh[9])).margin(1e-12));

  // re-projection of K recovers the entries
  const QuadratureRule gl = gauss_legendre(256, 0.0, 1.0);
  for (int n : {1, 3, 7})
    for (int m : {2, 5}) {
      double acc = 0.0;
      for (int i = 0; i < gl.size(); ++i) {
        double inner = 0.0;
        for (int j = 0; j < gl.size(); ++j)
          inner += gl.weights[j] * s1.evaluate(gl.nodes[i], gl.nodes[j]) *
                   kBasis.evaluate(m, gl.nodes[j]);
        acc += gl.weights[i] * inner * kBasis.evaluate(n, gl.nodes[i]);
      }
      CHECK(acc == Catch::Approx(s1.entries(n - 1, m - 1)).margin(1e-6));
    }

  // mean level decreases with distance (fixtures pinned)
  const MIOperatorSurface s2 = mi_surface(kGc, kBasis, kScalar, 2.0, mesh);
  CHECK(s1.mean_level() == Catch::Approx(0.500676).epsilon(1e-4));
  CHECK(s2.mean_level() == Catch::Approx(0.421953).epsilon(1e-4));
  CHECK(s2.mean_level() < s1.mean_level());

  // single-term reconstruction
  const TimeBasis one(TimeBasis::Kind::CosineOrthonormal, 1.0, 1);
  const MIOperatorSurface s_one = mi_surface(kGc, one, kScalar, 1.0, mesh);
  CHECK(s_one.evaluate(0.2, 0.7) ==
        Catch::Approx(s_one.entries(0, 0) * one.evaluate(1, 0.2) *
                      one.evaluate(1, 0.7)).margin(1e-14));

  CHECK_THROWS_AS(mi_surface(kGc, kBasis, kScalar, 1.0, {0.5, 1.5}),
                  std::invalid_argument);
}

TEST_CASE("mi_surface vanishes when all correlations vanish") {
  const GneitingCovariance fast(1.0, 1.0, 0.5, 0.6, 1.0, 0.3, 0.7, 2);
  std::vector<double> mesh = {0.0, 0.25, 0.5, 0.75, 1.0};
  const MIOperatorSurface s = mi_surface(fast, kBasis, kScalar, 1e6, mesh);
  // gamma ~ 2.7e-4 -> MI ~ gamma^2/2 ~ 4e-8: numerically zero surface
  CHECK(s.entries.maxCoeff() < 1e-7);
  CHECK(s.k_values.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("space-time sampler: shape, reproducibility, trivial case") {
  FieldRealization f = simulate_st_gaussian(GridSpec({1}, 1.0), 1, 1.0, kGc, 3);
  REQUIRE(f.values.size() == 1);
  CHECK(std::isfinite(f.values[0]));

  FieldRealization a = simulate_st_gaussian(GridSpec({3, 3}, 1.0), 4, 0.5, kGc, 11);
  FieldRealization b = simulate_st_gaussian(GridSpec({3, 3}, 1.0), 4, 0.5, kGc, 11);
  CHECK(a.values == b.values);
  CHECK(a.grid.sizes == std::vector<int>{3, 3, 4});
  CHECK(a.provenance.model.find("dt=0.5") != std::string::npos);

  CHECK_THROWS_WITH(
      simulate_st_gaussian(GridSpec({13, 13}, 1.0), 50, 1.0, kGc, 1),
      Catch::Matchers::ContainsSubstring("thinning"));
  CHECK_THROWS_AS(simulate_st_gaussian(GridSpec({2}, 1.0), 0, 1.0, kGc, 1),
                  std::invalid_argument);
}

TEST_CASE("space-time sampler: variance and pure-time correlation") {
  detail::StGaussianSampler s(GridSpec({10, 10}, 1.0), 50, 1.0, kGc);
  std::vector<double> rep_var;
  double num = 0.0, den = 0.0;
  for (int r = 0; r < 100; ++r) {
    const std::vector<double> v = s.draw(detail::derive_seed(2026, r));
    double m2 = 0.0;
    for (double x : v) m2 += x * x;
    rep_var.push_back(m2 / v.size());
    for (int p = 0; p < 100; ++p)
      for (int t = 0; t + 1 < 50; ++t) {
        num += v[p * 50 + t] * v[p * 50 + t + 1];
        den += v[p * 50 + t] * v[p * 50 + t];
      }
  }
  double mean = 0.0;
  for (double x : rep_var) mean += x;
  mean /= rep_var.size();
  double sd = 0.0;
  for (double x : rep_var) sd += (x - mean) * (x - mean);
  const double se = std::sqrt(sd / (rep_var.size() - 1.0) / rep_var.size());
  CHECK(std::abs(mean - 1.0) <= 3.0 * se);  // sigma^2 = 1
  // lag-1 temporal correlation vs C(0,1)/sigma^2 = 2^-0.7
  CHECK(num / den == Catch::Approx(kGc(0.0, 1.0)).margin(0.05));
}
